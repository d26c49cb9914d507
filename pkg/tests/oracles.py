"""Independent naive references used by the test suite.

Everything here is written against the operation definitions directly
(nested loops, scatter-add, plain DFT sums) in float64, deliberately
sharing no code with the engine implementations it checks.
"""

import numpy as np


def naive_conv1d(weight, bias, x, dilation=1, stride=1, padding="zero"):
    """Nested-loop correlation; padding is 'zero', 'reflect', or 'none'."""
    w = np.asarray(weight, dtype=np.float64)
    b = np.asarray(bias, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    c_out, c_in, k = w.shape
    span = (k - 1) * dilation
    if padding == "none":
        xp = x
    else:
        pad = span // 2
        mode = "reflect" if padding == "reflect" else "constant"
        if mode == "reflect" and pad > x.shape[1] - 1:
            mode = "constant"
        xp = np.pad(x, ((0, 0), (pad, pad)), mode=mode)
    n_out = (xp.shape[1] - span - 1) // stride + 1
    out = np.zeros((c_out, n_out))
    for o in range(c_out):
        for t in range(n_out):
            acc = b[o]
            for i in range(c_in):
                for j in range(k):
                    acc += w[o, i, j] * xp[i, t * stride + j * dilation]
            out[o, t] = acc
    return out


def naive_transposed_conv1d(weight, bias, x, stride, padding):
    """Scatter-add definition of the transposed convolution."""
    w = np.asarray(weight, dtype=np.float64)
    b = np.asarray(bias, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    c_out, c_in, k = w.shape
    t_in = x.shape[1]
    full = (t_in - 1) * stride + k
    y = np.zeros((c_out, full))
    for o in range(c_out):
        for i in range(c_in):
            for t in range(t_in):
                for j in range(k):
                    y[o, t * stride + j] += w[o, i, j] * x[i, t]
    y += b[:, None]
    return y[:, padding : full - padding]


def tone(freq_hz, n, sample_rate=24000.0, amplitude=1.0, phase=0.0):
    t = np.arange(n) / sample_rate
    return (amplitude * np.sin(2 * np.pi * freq_hz * t + phase)).astype(np.float32)


def band_energy(x, center_bins, n_fft=8192, half_width=2):
    """Energy summed over +-half_width bins around each listed bin."""
    x = np.asarray(x, dtype=np.float64)
    w = np.hanning(x.size)
    power = np.abs(np.fft.rfft(x * w, n_fft)) ** 2
    total = 0.0
    for b in center_bins:
        lo = max(0, b - half_width)
        total += power[lo : b + half_width + 1].sum()
    return total


def fold_frequency(f):
    """Alias of a normalized frequency (cycles/sample) into [0, 0.5]."""
    f = f % 1.0
    return 1.0 - f if f > 0.5 else f


def alias_bins(f0, n_fft=8192, harmonics=(2, 3), guard_bins=6):
    """DFT bins where even snake harmonics above Nyquist fold to, excluding
    any that collide with DC, the fundamental, or legitimate 2*f0 content.

    f0 is in cycles/sample; harmonics are multiples of 2*f0.
    """
    legit = [0, int(round(f0 * n_fft)), int(round(fold_frequency(2 * f0) * n_fft))]
    bins = []
    for h in harmonics:
        f = 2 * h * f0
        if f <= 0.5:
            continue  # representable, not an alias
        b = int(round(fold_frequency(f) * n_fft))
        if all(abs(b - lb) > guard_bins for lb in legit):
            bins.append(b)
    return bins
