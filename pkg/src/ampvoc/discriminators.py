"""Multi-period and multi-resolution discriminator forward passes.

Both return, per sub-discriminator, the final score map plus every
intermediate feature map (the inputs to the feature-matching loss). The
weights here are random-initialized only; the artifact has no trained
discriminator checkpoints, so their job is exercising the loss algebra
and the structural contracts.

MPD reshapes the waveform to (ceil(T/p), p) per period p after reflection
padding; MRD runs a conv stack over linear magnitude spectrograms at three
STFT resolutions, framed without centering padding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DTYPE, AudioBuffer, ConfigurationError, leaky_relu
from .mel import stft_magnitude

MPD_PERIODS = (2, 3, 5, 7, 11)
MPD_CHANNELS = (32, 128, 512, 1024, 1024)
MRD_RESOLUTIONS = ((1024, 120, 600), (2048, 240, 1200), (512, 50, 240))
MRD_CHANNELS = (32, 32, 32, 32, 32)
LEAKY_SLOPE = 0.1


@dataclass(frozen=True)
class Conv2dLayer:
    """2-D convolution, weight (out, in, kh, kw), per-axis stride/padding."""

    weight: np.ndarray
    bias: np.ndarray
    stride: tuple = (1, 1)
    padding: tuple = (0, 0)

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=DTYPE)
        b = np.asarray(self.bias, dtype=DTYPE)
        if w.ndim != 4 or b.shape != (w.shape[0],):
            raise ConfigurationError("conv2d weight must be (out, in, kh, kw)")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)


def conv2d(layer: Conv2dLayer, x: np.ndarray) -> np.ndarray:
    """Strided 2-D convolution with zero padding; x is (in, H, W)."""
    w, (sh, sw), (ph, pw) = layer.weight, layer.stride, layer.padding
    c_out, c_in, kh, kw = w.shape
    if x.ndim != 3 or x.shape[0] != c_in:
        raise ConfigurationError(f"conv2d expects ({c_in}, H, W), got {x.shape}")
    x = np.asarray(x, dtype=DTYPE)
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw)))
    h_out = (xp.shape[1] - kh) // sh + 1
    w_out = (xp.shape[2] - kw) // sw + 1
    if h_out <= 0 or w_out <= 0:
        raise ConfigurationError("conv2d input too small for this kernel")
    out = np.empty((c_out, h_out, w_out), dtype=DTYPE)
    out[:] = layer.bias[:, None, None]
    for i in range(kh):
        for j in range(kw):
            seg = xp[:, i : i + sh * (h_out - 1) + 1 : sh, j : j + sw * (w_out - 1) + 1 : sw]
            out += np.tensordot(w[:, :, i, j], seg, axes=([1], [0]))
    return out


@dataclass(frozen=True)
class DiscriminatorOutput:
    """Final score map plus the per-layer features that produced it."""

    score: np.ndarray
    features: tuple

    def __post_init__(self):
        if len(self.features) == 0:
            raise ConfigurationError("feature list must include the score map")


@dataclass(frozen=True)
class SubDiscriminator:
    layers: tuple  # intermediate Conv2dLayers
    out_layer: Conv2dLayer


@dataclass(frozen=True)
class MultiPeriodDiscriminator:
    periods: tuple
    subs: tuple


@dataclass(frozen=True)
class MultiResolutionDiscriminator:
    resolutions: tuple  # (n_fft, hop, win_length) triplets
    subs: tuple


def _rand_conv2d(rng, c_in, c_out, kernel, stride, padding):
    bound = 1.0 / math.sqrt(c_in * kernel[0] * kernel[1])
    w = rng.uniform(-bound, bound, size=(c_out, c_in, *kernel)).astype(DTYPE)
    b = rng.uniform(-bound, bound, size=c_out).astype(DTYPE)
    return Conv2dLayer(w, b, stride=stride, padding=padding)


def build_mpd(seed=0, periods=MPD_PERIODS, channels=MPD_CHANNELS) -> MultiPeriodDiscriminator:
    """5 sub-discriminators of (5,1)-kernel, (3,1)-stride conv stacks."""
    rng = np.random.default_rng(seed)
    subs = []
    for _p in periods:
        layers = []
        c_prev = 1
        for c in channels:
            layers.append(_rand_conv2d(rng, c_prev, c, (5, 1), (3, 1), (2, 0)))
            c_prev = c
        out = _rand_conv2d(rng, c_prev, 1, (3, 1), (1, 1), (1, 0))
        subs.append(SubDiscriminator(tuple(layers), out))
    return MultiPeriodDiscriminator(tuple(periods), tuple(subs))


def build_mrd(seed=0, resolutions=MRD_RESOLUTIONS, channels=MRD_CHANNELS) -> MultiResolutionDiscriminator:
    """3 sub-discriminators over linear spectrograms, (3,9) kernels with
    frame-axis downsampling then a (3,3) tail."""
    rng = np.random.default_rng(seed)
    kernels = ((3, 9), (3, 9), (3, 9), (3, 9), (3, 3))
    strides = ((1, 1), (1, 2), (1, 2), (1, 2), (1, 1))
    subs = []
    for _res in resolutions:
        layers = []
        c_prev = 1
        for c, k, s in zip(channels, kernels, strides):
            pad = (k[0] // 2, k[1] // 2)
            layers.append(_rand_conv2d(rng, c_prev, c, k, s, pad))
            c_prev = c
        out = _rand_conv2d(rng, c_prev, 1, (3, 3), (1, 1), (1, 1))
        subs.append(SubDiscriminator(tuple(layers), out))
    return MultiResolutionDiscriminator(tuple(resolutions), tuple(subs))


def discriminators_from_config(config: dict, seed=0):
    """Build (MPD, MRD) from a config dict with optional "mpd_periods" and
    "mrd_resolutions" entries; defaults follow the published setup."""
    periods = tuple(int(p) for p in config.get("mpd_periods", MPD_PERIODS))
    resolutions = tuple(
        tuple(int(v) for v in r) for r in config.get("mrd_resolutions", MRD_RESOLUTIONS)
    )
    for _n_fft, _hop, win in resolutions:
        if win > _n_fft:
            raise ConfigurationError("win_length must be <= n_fft per resolution")
    return build_mpd(seed, periods=periods), build_mrd(seed, resolutions=resolutions)


def mpd_reshape(audio: AudioBuffer, period: int) -> np.ndarray:
    """Reflection-pad to a multiple of the period, reshape to (ceil(T/p), p)."""
    if period < 1:
        raise ConfigurationError("period must be >= 1")
    x = audio.samples
    if x.size == 0:
        raise ConfigurationError("empty audio")
    rem = (-x.size) % period
    if rem:
        x = np.pad(x, (0, rem), mode="reflect")
    return x.reshape(-1, period)


def _sub_forward(sub: SubDiscriminator, x: np.ndarray) -> DiscriminatorOutput:
    feats = []
    for layer in sub.layers:
        x = leaky_relu(conv2d(layer, x), LEAKY_SLOPE)
        feats.append(x)
    score = conv2d(sub.out_layer, x)
    feats.append(score)
    return DiscriminatorOutput(score=score, features=tuple(feats))


def mpd_forward(mpd: MultiPeriodDiscriminator, audio: AudioBuffer) -> list:
    """One DiscriminatorOutput per period."""
    if audio.samples.size == 0:
        raise ConfigurationError("empty audio")
    outs = []
    for p, sub in zip(mpd.periods, mpd.subs):
        x = mpd_reshape(audio, p)[None, :, :]
        outs.append(_sub_forward(sub, x))
    return outs


def mrd_forward(mrd: MultiResolutionDiscriminator, audio: AudioBuffer) -> list:
    """One DiscriminatorOutput per STFT resolution."""
    needed = max(r[0] for r in mrd.resolutions)
    if audio.samples.size < needed:
        raise ConfigurationError(
            f"audio must be at least {needed} samples for the largest FFT"
        )
    outs = []
    for (n_fft, hop, win), sub in zip(mrd.resolutions, mrd.subs):
        spec = stft_magnitude(audio.samples, n_fft, hop, win, pad=False)
        outs.append(_sub_forward(sub, spec[None, :, :]))
    return outs
