import json
import subprocess
import sys

import numpy as np
import torch

from bvgw_export.formats import write_bvgm
from bvgw_export.torch_ref import SourceGenerator

from test_export import TINY_CONFIG


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "bvgw_export.cli", *args], capture_output=True, text=True
    )


def test_cli_export_with_probe(tmp_path):
    torch.manual_seed(31)
    model = SourceGenerator(TINY_CONFIG)
    src = tmp_path / "src.pt"
    torch.save(model.state_dict(), src)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(TINY_CONFIG))
    mel_path = tmp_path / "probe.bvgm"
    write_bvgm(mel_path, np.random.default_rng(1).uniform(-11.5, 2, (100, 12)).astype(np.float32))
    out = tmp_path / "out.bvgw"

    proc = run_cli(
        "--in", str(src), "--config", str(cfg_path), "--out", str(out),
        "--probe", str(mel_path),
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    assert report["probe"]["pass"] is True
    assert report["probe"]["max_abs"] <= 1e-3
    assert report["tensors_mapped"] == len(report["mapping"])
    assert out.exists()


def test_cli_mapping_failure_exit_1(tmp_path):
    src = tmp_path / "src.pt"
    torch.save({"mystery.weight": torch.zeros(3)}, src)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(TINY_CONFIG))
    proc = run_cli("--in", str(src), "--config", str(cfg_path), "--out", str(tmp_path / "o.bvgw"))
    assert proc.returncode == 1
    assert "mystery" in proc.stderr
