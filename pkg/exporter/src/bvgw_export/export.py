"""Checkpoint conversion: map names, fuse weight norms, emit .bvgw, and
optionally verify the result with a forward-pass parity probe through the
inference engine's CLI.

If the source model aggregates its residual blocks by summation instead of
averaging, the weights admit an exact correction: scale every non-first
upsampling weight, the post-activation alphas, and the output convolution
weight by the block count. The correction is applied when the source
config declares sum aggregation, or automatically when an unspecified
source fails the probe with the averaging assumption but passes with the
correction.
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .formats import write_bvgm, write_bvgw
from .namemap import MappingError, NameMap, lineage_rules

PROBE_TOLERANCE = 1e-3

KNOWN_VARIANTS = {
    (512, (8, 8, 2, 2)): "bigvgan-base",
    (1536, (4, 4, 2, 2, 2, 2)): "bigvgan",
}


def engine_config(source_config: dict) -> dict:
    """Translate a training-style config into the engine's config JSON."""
    h = source_config["upsample_initial_channel"]
    rates = tuple(source_config["upsample_rates"])
    kernels = list(source_config["resblock_kernel_sizes"])
    ksizes = source_config.get("upsample_kernel_sizes", [2 * u for u in rates])
    for u, k in zip(rates, ksizes):
        if k != 2 * u:
            raise MappingError(
                f"upsample kernel {k} != 2*rate {2 * u}; geometry not representable"
            )
    dil = [
        [[d, 1] for d in block] for block in source_config["resblock_dilation_sizes"]
    ]
    cfg = {
        "variant": KNOWN_VARIANTS.get((h, rates), f"custom-{h}"),
        "h": h,
        "upsample_rates": list(rates),
        "kernels": kernels,
        "dilations": dil,
        "use_filter": bool(source_config.get("use_filter", True)),
        "activation": source_config.get("activation", "snake"),
        "n_mels": source_config.get("num_mels", 100),
        "sample_rate": source_config.get("sampling_rate", 24000),
    }
    cfg["mel"] = {
        "sample_rate": cfg["sample_rate"],
        "n_fft": source_config.get("n_fft", 1024),
        "win_length": source_config.get("win_size", 1024),
        "hop": source_config.get("hop_size", 256),
        "n_mels": cfg["n_mels"],
        "fmin": float(source_config.get("fmin", 0.0)),
        "fmax": float(source_config.get("fmax", cfg["sample_rate"] / 2)),
        "log_clamp_floor": 1e-5,
    }
    return cfg


def canonical_order(cfg: dict) -> list:
    names = ["pre.w", "pre.b"]
    snake_act = cfg["activation"] == "snake"
    for i in range(len(cfg["upsample_rates"])):
        names += [f"stage{i}.up.w", f"stage{i}.up.b"]
        for j in range(len(cfg["kernels"])):
            for l in range(len(cfg["dilations"][j])):
                base = f"stage{i}.amp{j}.unit{l}"
                if snake_act:
                    names.append(f"{base}.acta.alpha")
                names += [f"{base}.conva.w", f"{base}.conva.b"]
                if snake_act:
                    names.append(f"{base}.actb.alpha")
                names += [f"{base}.convb.w", f"{base}.convb.b"]
    if snake_act:
        names.append("post.act.alpha")
    names += ["post.conv.w", "post.conv.b"]
    return names


def fix_sum_aggregation(tensors: dict, cfg: dict) -> list:
    """Exact sum -> mean conversion; returns log lines of what was scaled."""
    m = float(len(cfg["kernels"]))
    log = []
    for i in range(1, len(cfg["upsample_rates"])):
        tensors[f"stage{i}.up.w"] = tensors[f"stage{i}.up.w"] * np.float32(m)
        log.append(f"stage{i}.up.w *= {m:g}")
    if cfg["activation"] == "snake":
        tensors["post.act.alpha"] = tensors["post.act.alpha"] * np.float32(m)
        log.append(f"post.act.alpha *= {m:g}")
    tensors["post.conv.w"] = tensors["post.conv.w"] * np.float32(m)
    log.append(f"post.conv.w *= {m:g}")
    return log


def default_engine_command() -> list:
    return [sys.executable, "-m", "ampvoc.cli"]


def run_probe(out_path, probe_mel: np.ndarray, forward_fn, engine_cmd=None) -> dict:
    """Engine-vs-source forward comparison on one mel; max-abs criterion."""
    from scipy.io import wavfile

    engine_cmd = engine_cmd or default_engine_command()
    with tempfile.TemporaryDirectory() as td:
        mel_path = Path(td) / "probe.bvgm"
        wav_path = Path(td) / "probe.wav"
        write_bvgm(mel_path, probe_mel)
        proc = subprocess.run(
            [*engine_cmd, "vocode", str(out_path), str(mel_path), str(wav_path)],
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            return {
                "pass": False,
                "max_abs": None,
                "error": f"engine vocode failed (exit {proc.returncode}): {proc.stderr.strip()}",
            }
        _rate, engine_out = wavfile.read(wav_path)
    source_out = np.asarray(forward_fn(probe_mel), dtype=np.float32)
    if engine_out.shape != source_out.shape:
        return {
            "pass": False,
            "max_abs": None,
            "error": f"length mismatch: engine {engine_out.shape} vs source {source_out.shape}",
        }
    max_abs = float(np.max(np.abs(engine_out.astype(np.float64) - source_out.astype(np.float64))))
    return {"pass": max_abs <= PROBE_TOLERANCE, "max_abs": max_abs, "error": None}


@dataclass
class ExportReport:
    variant: str
    output: str
    params: int
    tensors_mapped: int
    fused: int
    skipped: list
    corrections: list
    mapping: list
    probe: dict | None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def export(
    state_dict: dict,
    source_config: dict,
    out_path,
    probe_mel: np.ndarray | None = None,
    forward_fn=None,
    engine_cmd=None,
) -> ExportReport:
    cfg = engine_config(source_config)
    rules = NameMap(lineage_rules(len(cfg["kernels"])))
    tensors, audit, skipped = rules.apply(state_dict)

    order = canonical_order(cfg)
    missing = [n for n in order if n not in tensors]
    if missing:
        raise MappingError(f"source is missing tensors for: {missing}")
    extra = sorted(set(tensors) - set(order))
    if extra:
        raise MappingError(f"mapped tensors have no place in the config: {extra}")
    tensors = {n: tensors[n] for n in order}

    corrections = []
    declared = source_config.get("amp_aggregation")
    if declared == "sum":
        corrections += fix_sum_aggregation(tensors, cfg)
    write_bvgw(out_path, cfg, tensors)

    probe = None
    if probe_mel is not None and forward_fn is not None:
        probe = run_probe(out_path, probe_mel, forward_fn, engine_cmd)
        if not probe["pass"] and declared is None and probe["max_abs"] is not None:
            trial = dict(tensors)
            trial_log = fix_sum_aggregation(trial, cfg)
            write_bvgw(out_path, cfg, trial)
            retry = run_probe(out_path, probe_mel, forward_fn, engine_cmd)
            if retry["pass"]:
                tensors = trial
                corrections += trial_log + ["detected sum aggregation via probe"]
                probe = retry
            else:  # keep the uncorrected export, report the original probe
                write_bvgw(out_path, cfg, tensors)

    params = int(sum(v.size for v in tensors.values()))
    return ExportReport(
        variant=cfg["variant"],
        output=str(out_path),
        params=params,
        tensors_mapped=len(audit),
        fused=sum(1 for a in audit if a.fused),
        skipped=skipped,
        corrections=corrections,
        mapping=[{"src": a.source, "dst": a.canonical, "fused": a.fused} for a in audit],
        probe=probe,
    )
