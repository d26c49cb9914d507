"""RIFF WAV reading and writing.

Reads PCM16 and IEEE float32; writes float32 by default or dithered PCM16
on request. Channel handling is left to the caller (the CLI rejects
non-mono input), so read_wav returns the raw array shape.
"""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile

from .core import DTYPE, AudioBuffer, FormatError


def read_wav(path):
    """Returns (sample_rate, float32 array); 2-D (frames, channels) if multichannel."""
    try:
        rate, data = wavfile.read(path)
    except ValueError as e:
        raise FormatError(f"unreadable WAV file: {e}") from e
    if data.dtype == np.int16:
        data = (data.astype(DTYPE)) / np.float32(32768.0)
    elif data.dtype == np.float32:
        pass
    else:
        raise FormatError(
            f"unsupported WAV encoding {data.dtype}; expected PCM16 or float32"
        )
    return int(rate), np.asarray(data, dtype=DTYPE)


def write_wav(path, audio: AudioBuffer, pcm16: bool = False, dither_seed: int = 0) -> None:
    """Write mono audio; PCM16 output applies seeded triangular dither."""
    x = audio.samples
    if pcm16:
        rng = np.random.default_rng(dither_seed)
        tpdf = rng.random(x.size) - rng.random(x.size)
        q = np.round(x.astype(np.float64) * 32767.0 + tpdf)
        data = np.clip(q, -32768, 32767).astype(np.int16)
    else:
        data = x.astype("<f4")
    wavfile.write(path, audio.sample_rate, data)
