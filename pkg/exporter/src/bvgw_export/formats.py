"""Writers/readers for the interchange formats.

These implement the documented byte layouts directly; the inference engine
is a separate program reached only through these files and its CLI.

.bvgw: magic "BVGW", u32 version=1, u32 config-JSON length + bytes,
u32 tensor count, then per tensor u16 name length, name, u8 ndim,
u32 dims, f32 little-endian data.

.bvgm: magic "BVGM", u32 version=1, u32 bands, u32 frames, f32 data.
"""

from __future__ import annotations

import json
import struct

import numpy as np

BVGW_MAGIC = b"BVGW"
BVGM_MAGIC = b"BVGM"
VERSION = 1


def write_bvgw(path, config: dict, tensors: dict) -> None:
    """Write canonical named tensors; iteration order is preserved."""
    cfg_blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(BVGW_MAGIC)
        f.write(struct.pack("<II", VERSION, len(cfg_blob)))
        f.write(cfg_blob)
        f.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors.items():
            arr = np.ascontiguousarray(arr, dtype="<f4")
            name_b = name.encode("utf-8")
            f.write(struct.pack("<H", len(name_b)))
            f.write(name_b)
            f.write(struct.pack("<B", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(arr.tobytes())


def read_bvgw(path):
    """Parse back into (config dict, name -> float32 array); for audits."""
    blob = open(path, "rb").read()
    if blob[:4] != BVGW_MAGIC:
        raise ValueError("not a BVGW file")
    version, cfg_len = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise ValueError(f"unsupported version {version}")
    off = 12
    config = json.loads(blob[off : off + cfg_len].decode("utf-8"))
    off += cfg_len
    (count,) = struct.unpack_from("<I", blob, off)
    off += 4
    tensors = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", blob, off)
        off += 2
        name = blob[off : off + name_len].decode("utf-8")
        off += name_len
        ndim = blob[off]
        off += 1
        dims = struct.unpack_from(f"<{ndim}I", blob, off)
        off += 4 * ndim
        size = int(np.prod(dims)) if ndim else 1
        tensors[name] = np.frombuffer(blob, "<f4", size, off).reshape(dims).copy()
        off += 4 * size
    return config, tensors


def write_bvgm(path, mel: np.ndarray) -> None:
    mel = np.ascontiguousarray(mel, dtype="<f4")
    with open(path, "wb") as f:
        f.write(BVGM_MAGIC)
        f.write(struct.pack("<III", VERSION, mel.shape[0], mel.shape[1]))
        f.write(mel.tobytes())


def read_bvgm(path) -> np.ndarray:
    blob = open(path, "rb").read()
    if blob[:4] != BVGM_MAGIC:
        raise ValueError("not a BVGM file")
    _version, bands, frames = struct.unpack_from("<III", blob, 4)
    return np.frombuffer(blob, "<f4", bands * frames, 16).reshape(bands, frames).copy()
