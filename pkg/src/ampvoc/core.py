"""Core feature-map types and 1-D convolution kernels.

A feature map is a float32 ndarray of shape (channels, frames). Layers are
frozen parameter containers and every operation is a pure function of its
inputs, so everything here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DTYPE = np.float32

PAD_SAME_REFLECT = "same-reflect"
PAD_SAME_ZERO = "same-zero"
PAD_NONE = "none"


class ConfigurationError(ValueError):
    """Invalid layer/model configuration or mismatched shapes."""


class FormatError(ValueError):
    """Malformed binary container (checkpoint, mel file, WAV)."""


class ValidationError(ValueError):
    """Checkpoint contents disagree with the embedded config."""


def feature_map(data, channels: int | None = None) -> np.ndarray:
    """Coerce ``data`` to a (channels, frames) float32 array.

    1-D input is promoted to a single channel. ``channels``, when given,
    is enforced.
    """
    x = np.asarray(data, dtype=DTYPE)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ConfigurationError(f"feature map must be 2-D, got shape {x.shape}")
    if channels is not None and x.shape[0] != channels:
        raise ConfigurationError(
            f"expected {channels} channels, got {x.shape[0]}"
        )
    return x


@dataclass(frozen=True)
class AudioBuffer:
    """1-D waveform tagged with its sample rate."""

    sample_rate: int
    samples: np.ndarray

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ConfigurationError("sample_rate must be positive")
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=DTYPE).reshape(-1)
        )

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class Conv1dLayer:
    """Dilated 1-D convolution parameters, weight shape (out, in, k)."""

    weight: np.ndarray
    bias: np.ndarray
    dilation: int = 1
    stride: int = 1

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=DTYPE)
        b = np.asarray(self.bias, dtype=DTYPE)
        if w.ndim != 3:
            raise ConfigurationError("conv weight must be (out, in, k)")
        if b.shape != (w.shape[0],):
            raise ConfigurationError("bias length must equal out_channels")
        if self.dilation < 1 or self.stride < 1:
            raise ConfigurationError("dilation and stride must be >= 1")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    def tap_matrices(self) -> np.ndarray:
        """Contiguous (k, out, in) view of the weight so the per-tap matmuls
        hit BLAS; built lazily on the first forward pass."""
        cached = self.__dict__.get("_taps")
        if cached is None:
            cached = np.ascontiguousarray(self.weight.transpose(2, 0, 1))
            object.__setattr__(self, "_taps", cached)
        return cached

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weight.shape[2]


@dataclass(frozen=True)
class TransposedConv1dLayer:
    """Transposed 1-D convolution, weight shape (out, in, k), stride u, padding p."""

    weight: np.ndarray
    bias: np.ndarray
    stride: int
    padding: int = 0

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=DTYPE)
        b = np.asarray(self.bias, dtype=DTYPE)
        if w.ndim != 3:
            raise ConfigurationError("transposed conv weight must be (out, in, k)")
        if b.shape != (w.shape[0],):
            raise ConfigurationError("bias length must equal out_channels")
        if self.stride < 1 or self.padding < 0:
            raise ConfigurationError("stride must be >= 1 and padding >= 0")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    def flat_matrix(self) -> np.ndarray:
        """(k*out, in) copy so all taps go through one BLAS call; lazy."""
        cached = self.__dict__.get("_flat")
        if cached is None:
            cached = np.ascontiguousarray(self.weight.transpose(2, 0, 1)).reshape(
                -1, self.weight.shape[1]
            )
            object.__setattr__(self, "_flat", cached)
        return cached

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weight.shape[2]


def pad_time(x: np.ndarray, left: int, right: int, reflect: bool) -> np.ndarray:
    """Pad the frame axis. Reflection falls back to zeros when the map is
    shorter than the pad (reflection is undefined there)."""
    if left == 0 and right == 0:
        return x
    if reflect and x.shape[1] >= 2 and max(left, right) <= x.shape[1] - 1:
        return np.pad(x, ((0, 0), (left, right)), mode="reflect")
    return np.pad(x, ((0, 0), (left, right)))


def conv1d(layer: Conv1dLayer, x: np.ndarray, padding_mode: str = PAD_SAME_ZERO) -> np.ndarray:
    """Run a dilated 1-D convolution over a (channels, frames) map.

    With a ``same-*`` padding mode and stride 1 the frame count is
    preserved; the pad is (k-1)*dilation/2 per side, which requires
    (k-1)*dilation to be even.
    """
    x = np.asarray(x, dtype=DTYPE)
    if x.ndim != 2 or x.shape[0] != layer.in_channels:
        raise ConfigurationError(
            f"conv1d expects ({layer.in_channels}, frames), got {x.shape}"
        )
    k, d, s = layer.kernel_size, layer.dilation, layer.stride
    span = (k - 1) * d
    if padding_mode == PAD_NONE:
        xp = x
    elif padding_mode in (PAD_SAME_ZERO, PAD_SAME_REFLECT):
        if span % 2:
            raise ConfigurationError(
                f"same padding needs (k-1)*dilation even, got {span}"
            )
        pad = span // 2
        xp = pad_time(x, pad, pad, reflect=padding_mode == PAD_SAME_REFLECT)
    else:
        raise ConfigurationError(f"unknown padding mode {padding_mode!r}")
    n_out = (xp.shape[1] - span - 1) // s + 1
    if n_out <= 0:
        raise ConfigurationError("input too short for this kernel/dilation")
    xp = np.asfortranarray(xp)  # keeps the per-tap column slices BLAS-friendly
    taps = layer.tap_matrices()
    out = np.empty((layer.out_channels, n_out), dtype=DTYPE)
    out[:] = layer.bias[:, None]
    tmp = np.empty_like(out)
    for j in range(k):
        seg = xp[:, j * d : j * d + s * (n_out - 1) + 1 : s]
        if s == 1:
            np.matmul(taps[j], seg, out=tmp)
            out += tmp
        else:
            out += taps[j] @ seg
    return out


def transposed_conv1d(layer: TransposedConv1dLayer, x: np.ndarray) -> np.ndarray:
    """Transposed convolution; output frames = (T-1)*stride + k - 2*padding."""
    x = np.asarray(x, dtype=DTYPE)
    if x.ndim != 2 or x.shape[0] != layer.in_channels:
        raise ConfigurationError(
            f"transposed_conv1d expects ({layer.in_channels}, frames), got {x.shape}"
        )
    u, k, p = layer.stride, layer.kernel_size, layer.padding
    t = x.shape[1]
    full = (t - 1) * u + k
    if full - 2 * p <= 0:
        raise ConfigurationError("padding consumes the whole output")
    c_out = layer.out_channels
    if k == 2 * u:
        # generator geometry: one GEMM over all taps, then two block scatters
        g = (layer.flat_matrix() @ np.ascontiguousarray(x)).reshape(k, c_out, t)
        y2 = np.zeros((c_out, t + 1, u), dtype=DTYPE)
        y2[:, :t, :] += g[:u].transpose(1, 2, 0)
        y2[:, 1:, :] += g[u:].transpose(1, 2, 0)
        y = y2.reshape(c_out, full)
    else:
        y = np.zeros((c_out, full), dtype=DTYPE)
        for j in range(k):
            y[:, j : j + (t - 1) * u + 1 : u] += layer.weight[:, :, j] @ x
    y += layer.bias[:, None]
    if p:
        y = np.ascontiguousarray(y[:, p : full - p])
    return y


def leaky_relu(x: np.ndarray, slope: float) -> np.ndarray:
    if slope < 0:
        raise ConfigurationError("leaky slope must be >= 0")
    x = np.asarray(x, dtype=DTYPE)
    return np.where(x >= 0, x, np.float32(slope) * x)


# largest float32 strictly below 1; float32 tanh saturates to 1.0 exactly
_TANH_LIMIT = np.nextafter(DTYPE(1.0), DTYPE(0.0))


def tanh_clamp(x: np.ndarray) -> np.ndarray:
    """Elementwise tanh; squashes the final waveform into the open (-1, 1)."""
    t = np.tanh(np.asarray(x, dtype=DTYPE))
    return np.clip(t, -_TANH_LIMIT, _TANH_LIMIT, out=t)
