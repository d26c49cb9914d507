"""Waveform to 100-band log-mel spectrogram conversion.

The framing contract matters for the vocoder: with reflection padding of
(n_fft - hop)/2 per side and non-centered frames, an input whose length is
a multiple of hop yields exactly length/hop frames, so the generator's
256x upsampling reproduces the original sample count.

Mel scale is Slaney-style (linear below 1 kHz, log above) with
area-normalized triangular filters; log is natural with a 1e-5 floor.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, asdict

import numpy as np

from .core import DTYPE, AudioBuffer, ConfigurationError, FormatError

MEL_MAGIC = b"BVGM"
MEL_VERSION = 1


@dataclass(frozen=True)
class MelConfig:
    sample_rate: int = 24000
    n_fft: int = 1024
    win_length: int = 1024
    hop: int = 256
    n_mels: int = 100
    fmin: float = 0.0
    fmax: float = 12000.0
    log_clamp_floor: float = 1e-5

    def __post_init__(self):
        if self.win_length > self.n_fft:
            raise ConfigurationError("win_length must be <= n_fft")
        if self.fmax > self.sample_rate / 2:
            raise ConfigurationError("fmax must be <= Nyquist")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MelConfig":
        return cls(**d)


def hann_window(length: int) -> np.ndarray:
    """Periodic Hann window."""
    k = np.arange(length)
    return (0.5 - 0.5 * np.cos(2.0 * np.pi * k / length)).astype(DTYPE)


def stft_magnitude(
    samples: np.ndarray,
    n_fft: int = 1024,
    hop: int = 256,
    win_length: int = 1024,
    pad: bool = True,
) -> np.ndarray:
    """Magnitude spectrogram, shape (n_fft//2 + 1, frames).

    ``pad=True`` reflection-pads (n_fft - hop)/2 per side before the
    non-centered framing; ``pad=False`` starts framing at sample 0 (the
    multi-resolution discriminator convention).
    """
    if win_length > n_fft:
        raise ConfigurationError("win_length must be <= n_fft")
    x = np.asarray(samples, dtype=DTYPE).reshape(-1)
    if x.size == 0:
        raise ConfigurationError("empty audio")
    if pad:
        x = np.pad(x, (n_fft - hop) // 2, mode="reflect")
    if x.size < n_fft:
        raise ConfigurationError(
            f"audio too short for a single {n_fft}-point frame"
        )
    frames = np.lib.stride_tricks.sliding_window_view(x, n_fft)[::hop]
    win = hann_window(win_length)
    if win_length < n_fft:
        left = (n_fft - win_length) // 2
        win = np.pad(win, (left, n_fft - win_length - left))
    spec = np.abs(np.fft.rfft(frames * win, axis=1))
    return np.ascontiguousarray(spec.T.astype(DTYPE))


def _hz_to_mel(f):
    # Slaney: linear below 1 kHz, logarithmic above
    f = np.asarray(f, dtype=np.float64)
    mel = f * 3.0 / 200.0
    log_region = f >= 1000.0
    mel = np.where(
        log_region,
        15.0 + np.log(np.maximum(f, 1000.0) / 1000.0) / (np.log(6.4) / 27.0),
        mel,
    )
    return mel


def _mel_to_hz(mel):
    mel = np.asarray(mel, dtype=np.float64)
    f = mel * 200.0 / 3.0
    log_region = mel >= 15.0
    f = np.where(log_region, 1000.0 * np.exp((np.log(6.4) / 27.0) * (mel - 15.0)), f)
    return f


def mel_filterbank(cfg: MelConfig = MelConfig()) -> np.ndarray:
    """Triangular area-normalized filterbank, shape (n_mels, n_fft//2 + 1)."""
    n_bins = cfg.n_fft // 2 + 1
    freqs = np.linspace(0.0, cfg.sample_rate / 2.0, n_bins)
    mel_pts = np.linspace(_hz_to_mel(cfg.fmin), _hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    hz_pts = _mel_to_hz(mel_pts)
    fdiff = np.diff(hz_pts)
    ramps = hz_pts[:, None] - freqs[None, :]
    lower = -ramps[:-2] / fdiff[:-1, None]
    upper = ramps[2:] / fdiff[1:, None]
    fb = np.maximum(0.0, np.minimum(lower, upper))
    fb *= (2.0 / (hz_pts[2:] - hz_pts[:-2]))[:, None]
    return fb.astype(DTYPE)


def mel_spectrogram(audio: AudioBuffer, cfg: MelConfig = MelConfig()) -> np.ndarray:
    """Natural-log mel spectrogram, shape (n_mels, frames), floor 1e-5."""
    if audio.sample_rate != cfg.sample_rate:
        raise ConfigurationError(
            f"audio is {audio.sample_rate} Hz, frontend expects {cfg.sample_rate} Hz"
        )
    spec = stft_magnitude(audio.samples, cfg.n_fft, cfg.hop, cfg.win_length, pad=True)
    mel = mel_filterbank(cfg) @ spec
    return np.log(np.maximum(mel, np.float32(cfg.log_clamp_floor)))


def write_mel(path, mel: np.ndarray) -> None:
    """Write a (bands, frames) mel array in the little-endian BVGM format."""
    mel = np.asarray(mel, dtype=DTYPE)
    if mel.ndim != 2:
        raise ConfigurationError("mel must be 2-D (bands, frames)")
    with open(path, "wb") as f:
        f.write(MEL_MAGIC)
        f.write(struct.pack("<III", MEL_VERSION, mel.shape[0], mel.shape[1]))
        f.write(mel.astype("<f4").tobytes(order="C"))


def read_mel(path) -> np.ndarray:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 16 or blob[:4] != MEL_MAGIC:
        raise FormatError("not a BVGM mel file")
    version, bands, frames = struct.unpack_from("<III", blob, 4)
    if version != MEL_VERSION:
        raise FormatError(f"unsupported mel file version {version}")
    need = 16 + 4 * bands * frames
    if len(blob) != need:
        raise FormatError("mel file truncated or oversized")
    data = np.frombuffer(blob, dtype="<f4", count=bands * frames, offset=16)
    return data.reshape(bands, frames).astype(DTYPE)
