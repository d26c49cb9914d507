"""Kaiser-windowed sinc low-pass design and the filtered (anti-aliased)
activation: upsample 2x, apply the nonlinearity, downsample 2x.

Design recipe for an integer ratio m: tap count n = 6*m, transition
half-width f_h = 0.6/m (in cycles/sample of the signal being resampled),
attenuation A = 2.285*(n/2 - 1)*pi*4*f_h + 7.95 dB, Kaiser shape
beta = 0.1102*(A - 8.7), cutoff 1/(2m) of the upsampled rate. Taps are a
DC-normalized windowed sinc.

Boundary handling is reflection; the even tap count gives a half-sample
group delay on each path, split (n/2-1, n/2) on the way up and
(n/2, n/2-1) on the way down so the up-then-down composite has zero net
delay and exact 2x / x0.5 frame counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DTYPE, ConfigurationError, pad_time
from .snake import SnakeParams, snake


@dataclass(frozen=True)
class LowPassFilter:
    """Designed FIR taps plus the parameters that produced them."""

    taps: np.ndarray
    ratio: int
    beta: float
    attenuation_db: float
    transition_half_width: float
    cutoff: float

    @property
    def tap_count(self) -> int:
        return self.taps.size


def design_kaiser_lowpass(m: int = 2) -> LowPassFilter:
    """Design the low-pass filter for an integer up/down ratio m >= 2."""
    if int(m) != m or m < 2:
        raise ConfigurationError("resampling ratio m must be an integer >= 2")
    m = int(m)
    n = 6 * m
    f_h = 0.6 / m
    atten = 2.285 * (n / 2 - 1) * np.pi * 4.0 * f_h + 7.95
    beta = 0.1102 * (atten - 8.7)
    cutoff = 1.0 / (2 * m)  # cycles/sample at the upsampled rate
    i = np.arange(n)
    taps = np.sinc(2.0 * cutoff * (i - (n - 1) / 2.0)) * np.kaiser(n, beta)
    taps = (taps / taps.sum()).astype(DTYPE)
    return LowPassFilter(
        taps=taps,
        ratio=m,
        beta=float(beta),
        attenuation_db=float(atten),
        transition_half_width=f_h,
        cutoff=cutoff,
    )


def _accumulate(taps: np.ndarray, xp: np.ndarray, width: int) -> np.ndarray:
    # sum_a taps[a] * xp[:, a : a + width], all slices contiguous
    out = np.multiply(xp[:, :width], taps[0])
    tmp = np.empty_like(out)
    for a in range(1, taps.size):
        np.multiply(xp[:, a : a + width], taps[a], out=tmp)
        out += tmp
    return out


def upsample2x(x: np.ndarray, lowpass: LowPassFilter) -> np.ndarray:
    """Interpolate to twice the frame count.

    Equivalent to zero-stuffing followed by the low-pass with gain 2;
    computed in polyphase form, so each output phase is a 6-tap
    correlation against the reflect-padded input.
    """
    if lowpass.ratio != 2:
        raise ConfigurationError("upsample2x needs a ratio-2 filter")
    x = np.asarray(x, dtype=DTYPE)
    c, t = x.shape
    n = lowpass.tap_count
    g = lowpass.taps * np.float32(2.0)  # gain 2 restores unit DC after stuffing
    left = (n // 2 - 1) // 2
    xp = pad_time(x, left, (n // 2 - 1) - left, reflect=True)
    y = np.empty((c, 2 * t), dtype=DTYPE)
    y[:, 0::2] = _accumulate(g[1::2], xp, t)
    y[:, 1::2] = _accumulate(g[0::2], xp, t)
    return y


def downsample2x(x: np.ndarray, lowpass: LowPassFilter) -> np.ndarray:
    """Low-pass with unit gain, then keep every second frame.

    An odd frame count is right-padded by one reflected sample first, so
    the output has ceil(frames/2) frames.
    """
    if lowpass.ratio != 2:
        raise ConfigurationError("downsample2x needs a ratio-2 filter")
    x = np.asarray(x, dtype=DTYPE)
    if x.shape[1] % 2:
        x = pad_time(x, 0, 1, reflect=True)
    c, t2 = x.shape
    t = t2 // 2
    n = lowpass.tap_count
    xp = pad_time(x, n // 2, n // 2 - 1, reflect=True)
    even = np.ascontiguousarray(xp[:, 0::2])
    odd = np.ascontiguousarray(xp[:, 1::2])
    y = _accumulate(lowpass.taps[0::2], even, t)
    y += _accumulate(lowpass.taps[1::2], odd, t)
    return y


def filtered_activation(x: np.ndarray, activation, lowpass: LowPassFilter) -> np.ndarray:
    """Apply ``activation`` at the 2x rate, band-limiting on both sides."""
    return downsample2x(activation(upsample2x(x, lowpass)), lowpass)


def filtered_snake(x: np.ndarray, params: SnakeParams, lowpass: LowPassFilter) -> np.ndarray:
    """Anti-aliased Snake: upsample 2x, snake, downsample 2x."""
    return filtered_activation(x, lambda v: snake(v, params), lowpass)
