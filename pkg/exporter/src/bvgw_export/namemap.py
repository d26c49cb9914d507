"""Rule-driven mapping from training-style state-dict names to the
canonical .bvgw tensor scheme, with weight-norm fusion.

Rules are ordered (regex, action) pairs. A fusing rule matches a
``weight_v`` (or an already-fused ``weight``) and consumes the sibling
``weight_g`` when present, emitting w = g * v / ||v|| (dim-0 norm, the
training convention). Transposed-convolution weights are additionally
rearranged from (in, out, k) to the canonical (out, in, k).

The mapping must be total and injective over the source parameters:
anything unmatched is a hard error, and no canonical name may be produced
twice. Non-parameter entries can be declared skippable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np


class MappingError(ValueError):
    pass


def fuse_weight_norm(v: np.ndarray, g: np.ndarray) -> np.ndarray:
    """w = g * v / ||v||, norm over all dims but the first."""
    v64 = v.astype(np.float64)
    axes = tuple(range(1, v64.ndim))
    norm = np.sqrt(np.sum(v64 * v64, axis=axes, keepdims=True))
    return (g.astype(np.float64).reshape(norm.shape) * v64 / norm).astype(np.float32)


@dataclass
class Rule:
    pattern: str
    target: object  # template string or callable(match) -> str
    fuse: bool = False
    transpose: bool = False
    skip: bool = False
    _rx: re.Pattern = field(init=False)

    def __post_init__(self):
        self._rx = re.compile(self.pattern)


@dataclass
class MappedTensor:
    source: str
    canonical: str
    fused: bool


class NameMap:
    def __init__(self, rules):
        self.rules = list(rules)

    def apply(self, state_dict: dict) -> tuple[dict, list, list]:
        """Returns (canonical name -> array, mapping audit, skipped names)."""
        arrays = {
            k: np.asarray(v.detach().cpu().numpy() if hasattr(v, "detach") else v)
            for k, v in state_dict.items()
        }
        consumed = set()
        out = {}
        audit = []
        skipped = []
        for name in arrays:
            if name in consumed:
                continue
            for rule in self.rules:
                m = rule._rx.fullmatch(name)
                if not m:
                    continue
                consumed.add(name)
                if rule.skip:
                    skipped.append(name)
                    break
                canonical = rule.target(m) if callable(rule.target) else rule.target.format(*m.groups())
                fused = False
                if rule.fuse and name.endswith("weight_v"):
                    g_name = name[: -len("weight_v")] + "weight_g"
                    if g_name not in arrays:
                        raise MappingError(f"{name} has no matching {g_name}")
                    consumed.add(g_name)
                    w = fuse_weight_norm(arrays[name], arrays[g_name])
                    fused = True
                else:
                    w = arrays[name].astype(np.float32)
                if rule.transpose:
                    w = np.ascontiguousarray(w.transpose(1, 0, 2))
                if canonical in out:
                    raise MappingError(f"{name} maps to {canonical!r}, already produced")
                out[canonical] = w
                audit.append(MappedTensor(name, canonical, fused))
                break
            else:
                raise MappingError(f"no rule matches source tensor {name!r}")
        leftovers = sorted(set(arrays) - consumed)
        if leftovers:
            raise MappingError(f"unmapped source tensors: {leftovers}")
        return out, audit, skipped


def lineage_rules(num_kernels: int) -> list:
    """Default rules for the HiFi-GAN/BigVGAN naming convention."""
    m = num_kernels

    def block(match, suffix):
        n, l = int(match.group(1)), int(match.group(2))
        return f"stage{n // m}.amp{n % m}.unit{l}.{suffix}"

    return [
        Rule(r"conv_pre\.(?:weight_v|weight)", "pre.w", fuse=True),
        Rule(r"conv_pre\.bias", "pre.b"),
        Rule(r"ups\.(\d+)\.(?:weight_v|weight)", "stage{0}.up.w", fuse=True, transpose=True),
        Rule(r"ups\.(\d+)\.bias", "stage{0}.up.b"),
        Rule(r"resblocks\.(\d+)\.convs1\.(\d+)\.(?:weight_v|weight)",
             lambda mt: block(mt, "conva.w"), fuse=True),
        Rule(r"resblocks\.(\d+)\.convs1\.(\d+)\.bias", lambda mt: block(mt, "conva.b")),
        Rule(r"resblocks\.(\d+)\.convs2\.(\d+)\.(?:weight_v|weight)",
             lambda mt: block(mt, "convb.w"), fuse=True),
        Rule(r"resblocks\.(\d+)\.convs2\.(\d+)\.bias", lambda mt: block(mt, "convb.b")),
        Rule(r"resblocks\.(\d+)\.alphas1\.(\d+)", lambda mt: block(mt, "acta.alpha")),
        Rule(r"resblocks\.(\d+)\.alphas2\.(\d+)", lambda mt: block(mt, "actb.alpha")),
        Rule(r"post_alpha", "post.act.alpha"),
        Rule(r"conv_post\.(?:weight_v|weight)", "post.conv.w", fuse=True),
        Rule(r"conv_post\.bias", "post.conv.b"),
        Rule(r".*\.filter\.(?:up|down)_(?:even|odd)", "", skip=True),
        Rule(r"filter\.(?:up|down)_(?:even|odd)", "", skip=True),
    ]
