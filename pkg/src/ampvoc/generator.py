"""Generator forward pass: pre-conv, upsampling stages with residual AMP
blocks, filtered post-activation, output conv, tanh.

Each stage halves the channel count and upsamples frames by its rate; the
product of the rates is 256, matching the mel hop, so the output waveform
has exactly 256 * mel_frames samples. Every stage runs M parallel AMP
blocks (one per kernel size) on the upsampled features and averages their
outputs. An AMP block is L residual units, each
activation -> dilated conv -> activation -> conv(dilation 1), with the
convolutions reflect-padded to preserve frames.

Ablation switches: ``use_filter`` toggles the 2x filtered activation path,
``activation`` selects snake or leaky ReLU. Both only change the pointwise
path, never any shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .antialias import LowPassFilter, design_kaiser_lowpass, filtered_activation, filtered_snake
from .core import (
    DTYPE,
    PAD_SAME_REFLECT,
    PAD_SAME_ZERO,
    AudioBuffer,
    ConfigurationError,
    Conv1dLayer,
    TransposedConv1dLayer,
    conv1d,
    leaky_relu,
    tanh_clamp,
    transposed_conv1d,
)
from .snake import SnakeParams, snake

HOP = 256
PRE_KERNEL = 7
POST_KERNEL = 7
LEAKY_SLOPE = 0.1

ACT_SNAKE = "snake"
ACT_LEAKY = "leaky_relu"

CONFIG_FIELDS = (
    "variant",
    "h",
    "upsample_rates",
    "kernels",
    "dilations",
    "use_filter",
    "activation",
    "n_mels",
    "sample_rate",
)


@dataclass(frozen=True)
class GeneratorConfig:
    variant: str
    h: int
    upsample_rates: tuple
    kernels: tuple
    dilations: tuple  # per block: ((d_a, d_b), ...) for each of the L units
    use_filter: bool = True
    activation: str = ACT_SNAKE
    n_mels: int = 100
    sample_rate: int = 24000

    def __post_init__(self):
        u = tuple(int(v) for v in self.upsample_rates)
        k = tuple(int(v) for v in self.kernels)
        d = tuple(tuple((int(a), int(b)) for a, b in block) for block in self.dilations)
        object.__setattr__(self, "upsample_rates", u)
        object.__setattr__(self, "kernels", k)
        object.__setattr__(self, "dilations", d)
        if math.prod(u) != HOP:
            raise ConfigurationError(
                f"upsample rates {u} must multiply to the hop size {HOP}"
            )
        if any(r % 2 for r in u):
            raise ConfigurationError("upsample rates must be even (k=2u, p=u/2)")
        if self.h % (1 << len(u)):
            raise ConfigurationError("h must be divisible by 2^len(upsample_rates)")
        if len(d) != len(k):
            raise ConfigurationError("need one dilation list per kernel size")
        for kern, block in zip(k, d):
            for pair in block:
                for dil in pair:
                    if ((kern - 1) * dil) % 2:
                        raise ConfigurationError(
                            f"(k-1)*d must be even, got k={kern} d={dil}"
                        )
        if self.activation not in (ACT_SNAKE, ACT_LEAKY):
            raise ConfigurationError(f"unknown activation {self.activation!r}")

    @property
    def num_stages(self) -> int:
        return len(self.upsample_rates)

    def stage_channels(self, i: int) -> int:
        """Output channels of stage i (input is h >> i)."""
        return self.h >> (i + 1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["upsample_rates"] = list(self.upsample_rates)
        d["kernels"] = list(self.kernels)
        d["dilations"] = [[list(p) for p in blk] for blk in self.dilations]
        return {k: d[k] for k in CONFIG_FIELDS}

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        missing = [k for k in CONFIG_FIELDS if k not in d]
        if missing:
            raise ConfigurationError(f"config is missing fields: {missing}")
        return cls(**{k: d[k] for k in CONFIG_FIELDS})


_DIL = (((1, 1), (3, 1), (5, 1)),) * 3

VARIANTS = {
    "bigvgan-base": GeneratorConfig(
        variant="bigvgan-base",
        h=512,
        upsample_rates=(8, 8, 2, 2),
        kernels=(3, 7, 11),
        dilations=_DIL,
    ),
    "bigvgan": GeneratorConfig(
        variant="bigvgan",
        h=1536,
        upsample_rates=(4, 4, 2, 2, 2, 2),
        kernels=(3, 7, 11),
        dilations=_DIL,
    ),
}


def variant_config(
    name: str, use_filter: bool = True, activation: str = ACT_SNAKE
) -> GeneratorConfig:
    if name not in VARIANTS:
        raise ConfigurationError(
            f"unknown variant {name!r}; known: {sorted(VARIANTS)}"
        )
    base = VARIANTS[name]
    if use_filter == base.use_filter and activation == base.activation:
        return base
    return GeneratorConfig(
        variant=name,
        h=base.h,
        upsample_rates=base.upsample_rates,
        kernels=base.kernels,
        dilations=base.dilations,
        use_filter=use_filter,
        activation=activation,
        n_mels=base.n_mels,
        sample_rate=base.sample_rate,
    )


@dataclass(frozen=True)
class AmpUnit:
    act_a: SnakeParams | None
    conv_a: Conv1dLayer
    act_b: SnakeParams | None
    conv_b: Conv1dLayer


@dataclass(frozen=True)
class AmpBlock:
    kernel: int
    units: tuple


@dataclass(frozen=True)
class Stage:
    up: TransposedConv1dLayer
    blocks: tuple


@dataclass(frozen=True)
class Generator:
    config: GeneratorConfig
    pre: Conv1dLayer
    stages: tuple
    post_act: SnakeParams | None
    post_conv: Conv1dLayer
    lowpass: LowPassFilter


def tensor_manifest(cfg: GeneratorConfig) -> list:
    """Canonical (name, shape) pairs covering every generator parameter."""
    names = []
    snake_act = cfg.activation == ACT_SNAKE
    names.append(("pre.w", (cfg.h, cfg.n_mels, PRE_KERNEL)))
    names.append(("pre.b", (cfg.h,)))
    for i, u in enumerate(cfg.upsample_rates):
        cin = cfg.h >> i
        cout = cfg.h >> (i + 1)
        names.append((f"stage{i}.up.w", (cout, cin, 2 * u)))
        names.append((f"stage{i}.up.b", (cout,)))
        for j, k in enumerate(cfg.kernels):
            for l, _pair in enumerate(cfg.dilations[j]):
                base = f"stage{i}.amp{j}.unit{l}"
                if snake_act:
                    names.append((f"{base}.acta.alpha", (cout,)))
                names.append((f"{base}.conva.w", (cout, cout, k)))
                names.append((f"{base}.conva.b", (cout,)))
                if snake_act:
                    names.append((f"{base}.actb.alpha", (cout,)))
                names.append((f"{base}.convb.w", (cout, cout, k)))
                names.append((f"{base}.convb.b", (cout,)))
    c_last = cfg.h >> cfg.num_stages
    if snake_act:
        names.append(("post.act.alpha", (c_last,)))
    names.append(("post.conv.w", (1, c_last, POST_KERNEL)))
    names.append(("post.conv.b", (1,)))
    return names


def _uniform(rng, bound, shape):
    r = rng.random(size=shape, dtype=DTYPE)
    r *= np.float32(2.0 * bound)
    r -= np.float32(bound)
    return r


def _random_tensors(cfg: GeneratorConfig, seed) -> dict:
    rng = np.random.Generator(np.random.SFC64(seed))
    tensors = {}
    bound = 1.0
    for name, shape in tensor_manifest(cfg):
        if name.endswith(".alpha"):
            tensors[name] = np.ones(shape, dtype=DTYPE)
        elif name.endswith(".w"):
            bound = 1.0 / math.sqrt(shape[1] * shape[2])  # fan_in = in_channels * k
            tensors[name] = _uniform(rng, bound, shape)
        else:  # bias, same bound as its weight (declared immediately before)
            tensors[name] = _uniform(rng, bound, shape)
    return tensors


def generator_from_tensors(cfg: GeneratorConfig, tensors: dict) -> Generator:
    """Assemble a Generator from canonical named tensors, shape-checked."""
    manifest = tensor_manifest(cfg)
    expected = dict(manifest)
    for name, shape in manifest:
        if name not in tensors:
            raise ConfigurationError(f"missing tensor {name!r}")
        if tuple(tensors[name].shape) != shape:
            raise ConfigurationError(
                f"tensor {name!r} has shape {tuple(tensors[name].shape)}, expected {shape}"
            )
    extra = sorted(set(tensors) - set(expected))
    if extra:
        raise ConfigurationError(f"unexpected tensors: {extra}")

    snake_act = cfg.activation == ACT_SNAKE

    def t(name):
        return np.asarray(tensors[name], dtype=DTYPE)

    pre = Conv1dLayer(weight=t("pre.w"), bias=t("pre.b"))
    stages = []
    for i, u in enumerate(cfg.upsample_rates):
        up = TransposedConv1dLayer(
            weight=t(f"stage{i}.up.w"),
            bias=t(f"stage{i}.up.b"),
            stride=u,
            padding=u // 2,
        )
        blocks = []
        for j, k in enumerate(cfg.kernels):
            units = []
            for l, (d_a, d_b) in enumerate(cfg.dilations[j]):
                base = f"stage{i}.amp{j}.unit{l}"
                units.append(
                    AmpUnit(
                        act_a=SnakeParams(t(f"{base}.acta.alpha")) if snake_act else None,
                        conv_a=Conv1dLayer(
                            weight=t(f"{base}.conva.w"),
                            bias=t(f"{base}.conva.b"),
                            dilation=d_a,
                        ),
                        act_b=SnakeParams(t(f"{base}.actb.alpha")) if snake_act else None,
                        conv_b=Conv1dLayer(
                            weight=t(f"{base}.convb.w"),
                            bias=t(f"{base}.convb.b"),
                            dilation=d_b,
                        ),
                    )
                )
            blocks.append(AmpBlock(kernel=k, units=tuple(units)))
        stages.append(Stage(up=up, blocks=tuple(blocks)))
    post_act = SnakeParams(t("post.act.alpha")) if snake_act else None
    post_conv = Conv1dLayer(weight=t("post.conv.w"), bias=t("post.conv.b"))
    return Generator(
        config=cfg,
        pre=pre,
        stages=tuple(stages),
        post_act=post_act,
        post_conv=post_conv,
        lowpass=design_kaiser_lowpass(2),
    )


def build_generator(cfg: GeneratorConfig, seed=0) -> Generator:
    """Materialize a generator with seeded uniform(-1/sqrt(fan_in), ..) weights."""
    return generator_from_tensors(cfg, _random_tensors(cfg, seed))


def generator_tensors(gen: Generator) -> dict:
    """Canonical name -> array view of every parameter, manifest order."""
    cfg = gen.config
    out = {}
    out["pre.w"], out["pre.b"] = gen.pre.weight, gen.pre.bias
    for i, stage in enumerate(gen.stages):
        out[f"stage{i}.up.w"] = stage.up.weight
        out[f"stage{i}.up.b"] = stage.up.bias
        for j, block in enumerate(stage.blocks):
            for l, unit in enumerate(block.units):
                base = f"stage{i}.amp{j}.unit{l}"
                if unit.act_a is not None:
                    out[f"{base}.acta.alpha"] = unit.act_a.alpha
                out[f"{base}.conva.w"] = unit.conv_a.weight
                out[f"{base}.conva.b"] = unit.conv_a.bias
                if unit.act_b is not None:
                    out[f"{base}.actb.alpha"] = unit.act_b.alpha
                out[f"{base}.convb.w"] = unit.conv_b.weight
                out[f"{base}.convb.b"] = unit.conv_b.bias
    if gen.post_act is not None:
        out["post.act.alpha"] = gen.post_act.alpha
    out["post.conv.w"] = gen.post_conv.weight
    out["post.conv.b"] = gen.post_conv.bias
    assert [n for n, _ in tensor_manifest(cfg)] == list(out)
    return out


def count_parameters(gen: Generator) -> int:
    return int(sum(v.size for v in generator_tensors(gen).values()))


def _activate(gen: Generator, x: np.ndarray, params: SnakeParams | None) -> np.ndarray:
    cfg = gen.config
    if cfg.activation == ACT_SNAKE:
        if cfg.use_filter:
            return filtered_snake(x, params, gen.lowpass)
        return snake(x, params)
    if cfg.use_filter:
        return filtered_activation(x, lambda v: leaky_relu(v, LEAKY_SLOPE), gen.lowpass)
    return leaky_relu(x, LEAKY_SLOPE)


def _amp_forward(gen: Generator, block: AmpBlock, x: np.ndarray) -> np.ndarray:
    y = x
    for unit in block.units:
        t = _activate(gen, y, unit.act_a)
        t = conv1d(unit.conv_a, t, PAD_SAME_REFLECT)
        t = _activate(gen, t, unit.act_b)
        t = conv1d(unit.conv_b, t, PAD_SAME_REFLECT)
        y = y + t
    return y


def generate(gen: Generator, mel: np.ndarray) -> AudioBuffer:
    """Vocode a (n_mels, frames) log-mel into 256*frames waveform samples."""
    mel = np.asarray(mel, dtype=DTYPE)
    if mel.ndim != 2 or mel.shape[0] != gen.config.n_mels:
        raise ConfigurationError(
            f"mel must be ({gen.config.n_mels}, frames), got {mel.shape}"
        )
    x = conv1d(gen.pre, mel, PAD_SAME_ZERO)
    for stage in gen.stages:
        x = transposed_conv1d(stage.up, x)
        acc = None
        for block in stage.blocks:
            y = _amp_forward(gen, block, x)
            acc = y if acc is None else acc + y
        x = acc / np.float32(len(stage.blocks))
    x = _activate(gen, x, gen.post_act)
    x = conv1d(gen.post_conv, x, PAD_SAME_ZERO)
    return AudioBuffer(gen.config.sample_rate, tanh_clamp(x)[0])
