"""Bit-exact generator weight container (.bvgw).

Layout, all little-endian: magic "BVGW", u32 version, u32 config JSON
length + UTF-8 bytes, u32 tensor count, then per tensor a u16 name length,
the UTF-8 name, u8 ndim, u32 dims, and raw f32 data. The embedded config
carries the nine generator fields plus a "mel" block describing the
frontend the weights were trained against; a mismatch against this
engine's frontend is warned about, not rejected.

Tensor names follow the canonical scheme of generator.tensor_manifest
("pre.w", "stage{i}.up.w", "stage{i}.amp{j}.unit{l}.conva.w", ...,
"post.conv.b") with 0-based indices. Loading validates the complete
manifest (names and shapes) against the config before any model is built.
"""

from __future__ import annotations

import json
import struct
import warnings

import numpy as np

from .core import DTYPE, FormatError, ValidationError, ConfigurationError
from .generator import Generator, GeneratorConfig, generator_from_tensors, generator_tensors, tensor_manifest
from .mel import MelConfig

MAGIC = b"BVGW"
VERSION = 1


def save(gen: Generator, path, mel_cfg: MelConfig = MelConfig()) -> None:
    """Write generator weights; byte output is deterministic."""
    cfg_dict = gen.config.to_dict()
    cfg_dict["mel"] = mel_cfg.to_dict()
    cfg_blob = json.dumps(cfg_dict, sort_keys=True, separators=(",", ":")).encode("utf-8")
    tensors = generator_tensors(gen)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<I", len(cfg_blob)))
        f.write(cfg_blob)
        f.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors.items():
            name_b = name.encode("utf-8")
            f.write(struct.pack("<H", len(name_b)))
            f.write(name_b)
            f.write(struct.pack("<B", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.off = 0

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.blob):
            raise FormatError("checkpoint truncated")
        out = self.blob[self.off : self.off + n]
        self.off += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]


def read_tensors(path):
    """Parse a checkpoint into (GeneratorConfig, mel dict, name -> array)."""
    with open(path, "rb") as f:
        r = _Reader(f.read())
    if r.take(4) != MAGIC:
        raise FormatError("not a BVGW checkpoint (bad magic)")
    version = r.u32()
    if version != VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")
    cfg_blob = r.take(r.u32())
    try:
        cfg_dict = json.loads(cfg_blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"embedded config is not valid JSON: {e}") from e
    mel_meta = cfg_dict.pop("mel", None)
    try:
        cfg = GeneratorConfig.from_dict(cfg_dict)
    except (ConfigurationError, TypeError) as e:
        raise FormatError(f"embedded config is invalid: {e}") from e
    count = r.u32()
    tensors = {}
    for _ in range(count):
        name = r.take(r.u16()).decode("utf-8")
        ndim = r.u8()
        dims = struct.unpack(f"<{ndim}I", r.take(4 * ndim))
        size = int(np.prod(dims)) if ndim else 1
        data = np.frombuffer(r.take(4 * size), dtype="<f4").reshape(dims)
        if name in tensors:
            raise ValidationError(f"duplicate tensor {name!r}")
        tensors[name] = data.astype(DTYPE)
    if r.off != len(r.blob):
        raise FormatError("trailing bytes after the last tensor")
    return cfg, mel_meta, tensors


def _validate_manifest(cfg: GeneratorConfig, tensors: dict) -> None:
    for name, shape in tensor_manifest(cfg):
        if name not in tensors:
            raise ValidationError(f"checkpoint is missing tensor {name!r}")
        got = tuple(tensors[name].shape)
        if got != shape:
            raise ValidationError(
                f"tensor {name!r} has shape {got}, config requires {shape}"
            )
    extra = sorted(set(tensors) - {n for n, _ in tensor_manifest(cfg)})
    if extra:
        raise ValidationError(f"checkpoint has unexpected tensors: {extra}")


def load(path, mel_cfg: MelConfig = MelConfig()):
    """Load and validate; returns (GeneratorConfig, Generator)."""
    cfg, mel_meta, tensors = read_tensors(path)
    _validate_manifest(cfg, tensors)
    if mel_meta is not None and mel_meta != mel_cfg.to_dict():
        warnings.warn(
            "checkpoint was exported against a different mel frontend; "
            f"stored {mel_meta}, engine uses {mel_cfg.to_dict()}"
        )
    return cfg, generator_from_tensors(cfg, tensors)
