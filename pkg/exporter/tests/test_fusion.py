import numpy as np
import torch
import pytest

from bvgw_export.namemap import MappingError, NameMap, fuse_weight_norm, lineage_rules
from bvgw_export.torch_ref import WNConv1d, WNConvTranspose1d, _weight_norm


class TestFusion:
    def test_matches_torch_weight_norm(self):
        torch.manual_seed(0)
        for shape in [(8, 4, 7), (16, 16, 3), (3, 2, 16)]:
            v = torch.randn(*shape)
            g = torch.rand(shape[0], 1, 1) + 0.5
            want = _weight_norm(v, g).numpy()
            got = fuse_weight_norm(v.numpy(), g.numpy())
            assert np.abs(got - want).max() <= 1e-5 * max(1.0, np.abs(want).max())

    def test_module_forward_uses_fused_weight(self):
        torch.manual_seed(1)
        conv = WNConv1d(3, 5, 7)
        x = torch.randn(1, 3, 40)
        with torch.no_grad():
            out = conv(x)
        w = fuse_weight_norm(conv.weight_v.detach().numpy(), conv.weight_g.detach().numpy())
        ref = torch.nn.functional.conv1d(
            torch.nn.functional.pad(x, (3, 3)), torch.from_numpy(w), conv.bias
        )
        assert (out - ref).abs().max().item() <= 1e-5

    def test_transpose_convention(self):
        torch.manual_seed(2)
        up = WNConvTranspose1d(4, 2, 2)
        w = fuse_weight_norm(up.weight_v.detach().numpy(), up.weight_g.detach().numpy())
        assert w.shape == (4, 2, 4)  # (in, out, k) before the canonical transpose
        assert np.ascontiguousarray(w.transpose(1, 0, 2)).shape == (2, 4, 4)

    def test_idempotent_on_fused_weights(self):
        # a plain .weight key passes through unchanged (no weight_g sibling)
        rules = NameMap(lineage_rules(3))
        w = np.random.default_rng(0).normal(size=(8, 100, 7)).astype(np.float32)
        b = np.zeros(8, dtype=np.float32)
        out, audit, _ = rules.apply({"conv_pre.weight": w, "conv_pre.bias": b})
        np.testing.assert_array_equal(out["pre.w"], w)
        assert audit[0].fused is False


class TestNameMap:
    def test_block_indexing_stage_major(self):
        rules = NameMap(lineage_rules(3))
        alphas = {
            f"resblocks.{n}.alphas1.{l}": np.ones(4, dtype=np.float32)
            for n in range(6)
            for l in range(3)
        }
        out, _, _ = rules.apply(alphas)
        assert "stage0.amp2.unit1.acta.alpha" in out
        assert "stage1.amp0.unit2.acta.alpha" in out
        assert len(out) == 18

    def test_unmapped_tensor_is_hard_error(self):
        rules = NameMap(lineage_rules(3))
        with pytest.raises(MappingError, match="rogue"):
            rules.apply({"rogue.weight_q": np.zeros(2, dtype=np.float32)})

    def test_missing_weight_g_is_error(self):
        rules = NameMap(lineage_rules(3))
        with pytest.raises(MappingError, match="weight_g"):
            rules.apply({"conv_pre.weight_v": np.zeros((4, 2, 7), dtype=np.float32)})

    def test_filter_buffers_skipped(self):
        rules = NameMap(lineage_rules(3))
        out, _, skipped = rules.apply(
            {"resblocks.0.filter.up_even": np.zeros((1, 1, 6), dtype=np.float32)}
        )
        assert out == {} and skipped == ["resblocks.0.filter.up_even"]
