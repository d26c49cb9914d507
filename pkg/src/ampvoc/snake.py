"""Snake periodic activation f(x) = x + sin^2(alpha*x)/alpha.

alpha is a per-channel frequency parameter (trainable in the original
model, loaded as-is here). Analytic derivatives are provided so gradient
correctness can be verified against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DTYPE, ConfigurationError


@dataclass(frozen=True)
class SnakeParams:
    """Per-channel positive frequency parameters."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=DTYPE).reshape(-1)
        if a.size == 0 or not np.all(a > 0):
            raise ConfigurationError("snake alpha must be positive per channel")
        object.__setattr__(self, "alpha", a)

    @property
    def channels(self) -> int:
        return self.alpha.size


def _alpha_column(x: np.ndarray, params: SnakeParams) -> np.ndarray:
    if x.ndim != 2 or x.shape[0] != params.channels:
        raise ConfigurationError(
            f"snake alpha has {params.channels} channels, input is {x.shape}"
        )
    return params.alpha[:, None]


def snake(x: np.ndarray, params: SnakeParams) -> np.ndarray:
    """y = x + sin^2(alpha*x)/alpha, applied per channel."""
    x = np.asarray(x, dtype=DTYPE)
    a = _alpha_column(x, params)
    s = np.sin(a * x)
    return x + s * s / a


def snake_dx(x: np.ndarray, params: SnakeParams) -> np.ndarray:
    """df/dx = 1 + sin(2*alpha*x); nonnegative, hence monotone f."""
    x = np.asarray(x, dtype=DTYPE)
    a = _alpha_column(x, params)
    return np.float32(1.0) + np.sin(np.float32(2.0) * a * x)


def snake_dalpha(x: np.ndarray, params: SnakeParams) -> np.ndarray:
    """df/dalpha = -sin^2(alpha*x)/alpha^2 + x*sin(2*alpha*x)/alpha."""
    x = np.asarray(x, dtype=DTYPE)
    a = _alpha_column(x, params)
    s = np.sin(a * x)
    return -(s * s) / (a * a) + x * np.sin(np.float32(2.0) * a * x) / a
