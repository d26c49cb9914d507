import json
import struct

import numpy as np
import pytest

from ampvoc import checkpoint
from ampvoc.core import FormatError, ValidationError
from ampvoc.generator import (
    GeneratorConfig,
    build_generator,
    generator_tensors,
)
from ampvoc.mel import MelConfig

_DIL = (((1, 1), (3, 1), (5, 1)),) * 3


def tiny(u=(8, 8, 2, 2), h=16, name="tiny"):
    return GeneratorConfig(variant=name, h=h, upsample_rates=u, kernels=(3, 7, 11), dilations=_DIL)


def rewrite_with_config(src_path, dst_path, cfg_dict):
    """Re-emit a checkpoint byte-for-byte but with a different embedded config."""
    blob = src_path.read_bytes()
    old_len = struct.unpack_from("<I", blob, 8)[0]
    tail = blob[12 + old_len :]
    cfg_blob = json.dumps(cfg_dict, sort_keys=True, separators=(",", ":")).encode()
    dst_path.write_bytes(blob[:8] + struct.pack("<I", len(cfg_blob)) + cfg_blob + tail)


class TestRoundTrip:
    def test_bitwise_round_trip(self, tmp_path):
        gen = build_generator(tiny(), seed=7)
        path = tmp_path / "g.bvgw"
        checkpoint.save(gen, path)
        cfg, loaded = checkpoint.load(path)
        assert cfg == gen.config
        src = generator_tensors(gen)
        dst = generator_tensors(loaded)
        assert list(src) == list(dst)
        for name in src:
            np.testing.assert_array_equal(src[name], dst[name])

    def test_deterministic_bytes(self, tmp_path):
        gen = build_generator(tiny(), seed=7)
        p1, p2 = tmp_path / "a.bvgw", tmp_path / "b.bvgw"
        checkpoint.save(gen, p1)
        checkpoint.save(gen, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_config_embedded_verbatim(self, tmp_path):
        gen = build_generator(tiny(u=(4, 4, 2, 2, 2, 2), h=64, name="tiny6"), seed=1)
        path = tmp_path / "g.bvgw"
        checkpoint.save(gen, path)
        cfg, _, _ = checkpoint.read_tensors(path)
        assert cfg == gen.config


class TestCorruption:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bvgw"
        path.write_bytes(b"XXXX" + b"\x00" * 64)
        with pytest.raises(FormatError):
            checkpoint.load(path)

    def test_bad_version(self, tmp_path):
        gen = build_generator(tiny(), seed=0)
        path = tmp_path / "g.bvgw"
        checkpoint.save(gen, path)
        blob = bytearray(path.read_bytes())
        struct.pack_into("<I", blob, 4, 99)
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError):
            checkpoint.load(path)

    def test_truncation_leaves_no_partial_model(self, tmp_path):
        gen = build_generator(tiny(), seed=0)
        path = tmp_path / "g.bvgw"
        checkpoint.save(gen, path)
        blob = path.read_bytes()
        for cut in (10, len(blob) // 2, len(blob) - 3):
            path.write_bytes(blob[:cut])
            with pytest.raises(FormatError):
                checkpoint.load(path)

    def test_trailing_garbage_rejected(self, tmp_path):
        gen = build_generator(tiny(), seed=0)
        path = tmp_path / "g.bvgw"
        checkpoint.save(gen, path)
        path.write_bytes(path.read_bytes() + b"\x00\x00")
        with pytest.raises(FormatError):
            checkpoint.load(path)


class TestValidation:
    def test_config_tensor_mismatch_names_first_upsample(self, tmp_path):
        # weights from the 6-stage geometry, config claiming the 4-stage one
        gen = build_generator(tiny(u=(4, 4, 2, 2, 2, 2), h=64, name="six"), seed=2)
        src = tmp_path / "six.bvgw"
        checkpoint.save(gen, src)
        wrong = tiny(u=(8, 8, 2, 2), h=64, name="four").to_dict()
        wrong["mel"] = MelConfig().to_dict()
        dst = tmp_path / "wrong.bvgw"
        rewrite_with_config(src, dst, wrong)
        with pytest.raises(ValidationError, match="stage0.up"):
            checkpoint.load(dst)

    def test_missing_tensor_detected(self, tmp_path):
        gen = build_generator(tiny(), seed=3)
        path = tmp_path / "g.bvgw"
        checkpoint.save(gen, path)
        cfg, mel_meta, tensors = checkpoint.read_tensors(path)
        del tensors["post.conv.b"]
        with pytest.raises(ValidationError, match="post.conv.b"):
            checkpoint._validate_manifest(cfg, tensors)

    def test_extra_tensor_detected(self, tmp_path):
        gen = build_generator(tiny(), seed=3)
        path = tmp_path / "g.bvgw"
        checkpoint.save(gen, path)
        cfg, mel_meta, tensors = checkpoint.read_tensors(path)
        tensors["stowaway"] = np.zeros(2, dtype=np.float32)
        with pytest.raises(ValidationError, match="stowaway"):
            checkpoint._validate_manifest(cfg, tensors)

    def test_mel_metadata_mismatch_warns(self, tmp_path):
        gen = build_generator(tiny(), seed=4)
        path = tmp_path / "g.bvgw"
        checkpoint.save(gen, path, mel_cfg=MelConfig(fmax=8000.0))
        with pytest.warns(UserWarning, match="mel frontend"):
            checkpoint.load(path)
