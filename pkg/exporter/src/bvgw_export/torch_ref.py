"""Reference PyTorch generator in the HiFi-GAN/BigVGAN training style:
weight-normalized convolutions (explicit weight_g / weight_v parameters),
channel-wise snake activations, 2x filtered nonlinearities, and either
summed or averaged residual-block aggregation.

This is the "source framework" side of the exporter: its state dicts are
what gets converted, and its forward pass is the parity target.
"""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn


def kaiser_lowpass_taps(m: int = 2) -> np.ndarray:
    n = 6 * m
    f_h = 0.6 / m
    atten = 2.285 * (n / 2 - 1) * np.pi * 4.0 * f_h + 7.95
    beta = 0.1102 * (atten - 8.7)
    cutoff = 1.0 / (2 * m)
    i = np.arange(n)
    taps = np.sinc(2.0 * cutoff * (i - (n - 1) / 2.0)) * np.kaiser(n, beta)
    return (taps / taps.sum()).astype(np.float32)


def _weight_norm(v: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
    # dim=0 convention: per-slice norm over all remaining dims
    norm = v.norm(2, dim=tuple(range(1, v.dim())), keepdim=True)
    return g * v / norm


class WNConv1d(nn.Module):
    """Conv1d carrying explicit weight_g/weight_v (training-style keys)."""

    def __init__(self, c_in, c_out, kernel, dilation=1, pad_mode="zero"):
        super().__init__()
        self.dilation = dilation
        self.pad = (kernel - 1) * dilation // 2
        self.pad_mode = pad_mode
        w = torch.empty(c_out, c_in, kernel)
        nn.init.kaiming_uniform_(w, a=math.sqrt(5))
        self.weight_v = nn.Parameter(w)
        self.weight_g = nn.Parameter(
            w.norm(2, dim=(1, 2), keepdim=True).detach().clone()
        )
        self.bias = nn.Parameter(torch.zeros(c_out).uniform_(-0.01, 0.01))

    def forward(self, x):
        w = _weight_norm(self.weight_v, self.weight_g)
        if self.pad == 0:
            return F.conv1d(x, w, self.bias, dilation=self.dilation)
        if self.pad_mode == "reflect" and self.pad <= x.shape[-1] - 1:
            x = F.pad(x, (self.pad, self.pad), mode="reflect")
        else:  # zero padding; also the fallback for too-short maps
            x = F.pad(x, (self.pad, self.pad))
        return F.conv1d(x, w, self.bias, dilation=self.dilation)


class WNConvTranspose1d(nn.Module):
    def __init__(self, c_in, c_out, stride):
        super().__init__()
        self.stride = stride
        kernel = 2 * stride
        w = torch.empty(c_in, c_out, kernel)
        nn.init.kaiming_uniform_(w, a=math.sqrt(5))
        self.weight_v = nn.Parameter(w)
        self.weight_g = nn.Parameter(
            w.norm(2, dim=(1, 2), keepdim=True).detach().clone()
        )
        self.bias = nn.Parameter(torch.zeros(c_out).uniform_(-0.01, 0.01))

    def forward(self, x):
        w = _weight_norm(self.weight_v, self.weight_g)
        return F.conv_transpose1d(x, w, self.bias, stride=self.stride, padding=self.stride // 2)


class FilteredActivation(nn.Module):
    """Upsample 2x (polyphase, reflect boundary), pointwise activation,
    downsample 2x. Matches the inference engine's resampler alignment:
    up phases read reflect-padded (2, 3), down reads (6, 5) split even/odd."""

    def __init__(self, taps: np.ndarray):
        super().__init__()
        t = torch.from_numpy(taps.copy())
        g = 2.0 * t
        self.register_buffer("up_even", g[1::2].reshape(1, 1, -1), persistent=False)
        self.register_buffer("up_odd", g[0::2].reshape(1, 1, -1), persistent=False)
        self.register_buffer("down_even", t[0::2].reshape(1, 1, -1), persistent=False)
        self.register_buffer("down_odd", t[1::2].reshape(1, 1, -1), persistent=False)

    @staticmethod
    def _depthwise(x, kernel):
        c = x.shape[1]
        return F.conv1d(x, kernel.expand(c, 1, -1), groups=c)

    def up(self, x):
        n = self.up_even.shape[-1] * 2
        left = (n // 2 - 1) // 2
        xp = F.pad(x, (left, (n // 2 - 1) - left), mode="reflect")
        even = self._depthwise(xp, self.up_even)
        odd = self._depthwise(xp, self.up_odd)
        b, c, t = even.shape
        return torch.stack([even, odd], dim=-1).reshape(b, c, 2 * t)

    def down(self, x):
        n = self.down_even.shape[-1] * 2
        if x.shape[-1] % 2:
            x = F.pad(x, (0, 1), mode="reflect")
        t_out = x.shape[-1] // 2
        width = t_out + n // 2 - 1  # exact window; the even phase has one spare
        xp = F.pad(x, (n // 2, n // 2 - 1), mode="reflect")
        even = self._depthwise(xp[..., 0::2][..., :width], self.down_even)
        odd = self._depthwise(xp[..., 1::2][..., :width], self.down_odd)
        return even + odd

    def forward(self, x, activation):
        return self.down(activation(self.up(x)))


def snake(x, alpha):
    a = alpha.reshape(1, -1, 1)
    return x + torch.sin(a * x) ** 2 / a


class AmpBlock(nn.Module):
    def __init__(self, channels, kernel, dilations, use_filter, activation, taps):
        super().__init__()
        self.use_filter = use_filter
        self.activation = activation
        self.convs1 = nn.ModuleList(
            [WNConv1d(channels, channels, kernel, d, pad_mode="reflect") for d in dilations]
        )
        self.convs2 = nn.ModuleList(
            [WNConv1d(channels, channels, kernel, 1, pad_mode="reflect") for _ in dilations]
        )
        if activation == "snake":
            self.alphas1 = nn.ParameterList(
                [nn.Parameter(torch.ones(channels)) for _ in dilations]
            )
            self.alphas2 = nn.ParameterList(
                [nn.Parameter(torch.ones(channels)) for _ in dilations]
            )
        self.filter = FilteredActivation(taps)

    def _act(self, x, alpha):
        if self.activation == "snake":
            fn = lambda v: snake(v, alpha)
        else:
            fn = lambda v: F.leaky_relu(v, 0.1)
        if self.use_filter:
            return self.filter(x, fn)
        return fn(x)

    def forward(self, x):
        for l in range(len(self.convs1)):
            a1 = self.alphas1[l] if self.activation == "snake" else None
            a2 = self.alphas2[l] if self.activation == "snake" else None
            t = self._act(x, a1)
            t = self.convs1[l](t)
            t = self._act(t, a2)
            t = self.convs2[l](t)
            x = x + t
        return x


class SourceGenerator(nn.Module):
    """Built from a training-style config dict (HiFi-GAN key names)."""

    def __init__(self, config: dict):
        super().__init__()
        self.config = dict(config)
        h = config["upsample_initial_channel"]
        rates = config["upsample_rates"]
        kernels = config["resblock_kernel_sizes"]
        dilations = config["resblock_dilation_sizes"]
        self.num_kernels = len(kernels)
        self.aggregation = config.get("amp_aggregation", "mean")
        self.use_filter = config.get("use_filter", True)
        self.activation = config.get("activation", "snake")
        taps = kaiser_lowpass_taps(2)

        self.conv_pre = WNConv1d(config["num_mels"], h, 7)
        self.ups = nn.ModuleList()
        self.resblocks = nn.ModuleList()
        for i, u in enumerate(rates):
            self.ups.append(WNConvTranspose1d(h >> i, h >> (i + 1), u))
            for k, d in zip(kernels, dilations):
                self.resblocks.append(
                    AmpBlock(h >> (i + 1), k, d, self.use_filter, self.activation, taps)
                )
        c_last = h >> len(rates)
        if self.activation == "snake":
            self.post_alpha = nn.Parameter(torch.ones(c_last))
        self.conv_post = WNConv1d(c_last, 1, 7)
        self.filter = FilteredActivation(taps)

    def _post_act(self, x):
        if self.activation == "snake":
            fn = lambda v: snake(v, self.post_alpha)
        else:
            fn = lambda v: F.leaky_relu(v, 0.1)
        if self.use_filter:
            return self.filter(x, fn)
        return fn(x)

    @torch.no_grad()
    def forward(self, mel: torch.Tensor) -> torch.Tensor:
        x = mel if mel.dim() == 3 else mel.unsqueeze(0)
        x = self.conv_pre(x)
        for i, up in enumerate(self.ups):
            x = up(x)
            acc = None
            for j in range(self.num_kernels):
                y = self.resblocks[i * self.num_kernels + j](x)
                acc = y if acc is None else acc + y
            x = acc if self.aggregation == "sum" else acc / self.num_kernels
        x = self._post_act(x)
        x = self.conv_post(x)
        return torch.tanh(x).squeeze(0).squeeze(0)
