"""Command-line surface.

Subcommands: mel, vocode, copysyn, metrics, bench, spec-dump, filter,
init-random. Exit codes: 0 ok, 2 input rejection (wrong rate/channels,
bad arguments), 3 format error (malformed WAV/mel/checkpoint), 4
config/validation error.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import checkpoint, wavio
from .antialias import design_kaiser_lowpass
from .core import AudioBuffer, ConfigurationError, FormatError, ValidationError
from .generator import (
    GeneratorConfig,
    VARIANTS,
    build_generator,
    count_parameters,
    generate,
    variant_config,
)
from .mel import MelConfig, mel_spectrogram, read_mel, stft_magnitude, write_mel
from .metrics import metric_report

MEL_CFG = MelConfig()


class InputRejected(Exception):
    """User input that the tool refuses (exit code 2)."""


def _load_mono(path, expect_rate=MEL_CFG.sample_rate) -> AudioBuffer:
    rate, data = wavio.read_wav(path)
    if data.ndim != 1:
        raise InputRejected(
            f"{path}: {data.shape[1]}-channel audio; only mono is supported"
        )
    if rate != expect_rate:
        raise InputRejected(f"{path}: {rate} Hz; expected {expect_rate} Hz (resample first)")
    return AudioBuffer(rate, data)


def cmd_mel(args) -> int:
    audio = _load_mono(args.input)
    write_mel(args.output, mel_spectrogram(audio, MEL_CFG))
    return 0


def cmd_vocode(args) -> int:
    _cfg, gen = checkpoint.load(args.checkpoint)
    mel = read_mel(args.input)
    audio = generate(gen, mel)
    wavio.write_wav(args.output, audio, pcm16=args.pcm16, dither_seed=args.seed)
    return 0


def cmd_copysyn(args) -> int:
    _cfg, gen = checkpoint.load(args.checkpoint)
    audio = _load_mono(args.input)
    usable = (audio.samples.size // MEL_CFG.hop) * MEL_CFG.hop
    if usable == 0:
        raise InputRejected(f"{args.input}: shorter than one hop ({MEL_CFG.hop} samples)")
    trimmed = AudioBuffer(audio.sample_rate, audio.samples[:usable])
    out = generate(gen, mel_spectrogram(trimmed, MEL_CFG))
    wavio.write_wav(args.output, out, pcm16=args.pcm16, dither_seed=args.seed)
    return 0


def _pair_report(ref_path, deg_path) -> dict:
    ref = _load_mono(ref_path)
    deg = _load_mono(deg_path)
    return metric_report(ref, deg).to_dict()


def cmd_metrics(args) -> int:
    if args.manifest:
        pairs = []
        with open(args.manifest) as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise InputRejected(
                        f"manifest line needs two paths, got: {line!r}"
                    )
                pairs.append(tuple(parts))
        with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
            reports = list(pool.map(lambda p: _pair_report(*p), pairs))
        keys = ["m_stft", "mcd", "periodicity_rmse", "vuv_f1", "mae"]
        out = {
            "pairs": [
                {"ref": r, "deg": d, **rep}
                for (r, d), rep in zip(pairs, reports)
            ],
            "mean": {k: statistics.fmean(rep[k] for rep in reports) for k in keys},
        }
    else:
        if not (args.ref and args.deg):
            raise InputRejected("metrics needs ref.wav and deg.wav, or --manifest")
        out = _pair_report(args.ref, args.deg)
    print(json.dumps(out, indent=2))
    return 0


def cmd_bench(args) -> int:
    if args.runs < 3:
        raise InputRejected("bench needs at least 3 measured runs")
    cfg, gen = checkpoint.load(args.checkpoint)
    frames = max(1, int(round(args.seconds * cfg.sample_rate / MEL_CFG.hop)))
    rng = np.random.default_rng(args.seed)
    mel = rng.normal(size=(cfg.n_mels, frames)).astype(np.float32)
    for _ in range(args.warmup):
        generate(gen, mel)
    times = []
    for _ in range(args.runs):
        t0 = time.perf_counter()
        audio = generate(gen, mel)
        times.append(time.perf_counter() - t0)
    seconds_audio = audio.samples.size / cfg.sample_rate
    params = count_parameters(gen)
    report = {
        "variant": cfg.variant,
        "params": params,
        "params_million": round(params / 1e6, 2),
        "frames": frames,
        "samples": int(audio.samples.size),
        "seconds_audio": seconds_audio,
        "warmup_runs": args.warmup,
        "measured_runs": args.runs,
        "times_s": times,
        "rtf_median": seconds_audio / statistics.median(times),
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_spec_dump(args) -> int:
    audio = _load_mono(args.input)
    spec = stft_magnitude(audio.samples, MEL_CFG.n_fft, MEL_CFG.hop, MEL_CFG.win_length)
    with open(args.output, "w") as f:
        for row in spec:
            f.write(",".join(f"{v:.6g}" for v in row))
            f.write("\n")
    return 0


def cmd_filter(args) -> int:
    lp = design_kaiser_lowpass(args.m)
    mags = np.abs(np.fft.rfft(lp.taps.astype(np.float64), 8192))
    db = 20.0 * np.log10(np.maximum(mags, 1e-12))
    freqs = np.fft.rfftfreq(8192)
    with open(args.output, "w") as f:
        f.write("index,tap\n")
        for i, t in enumerate(lp.taps):
            f.write(f"{i},{t:.9g}\n")
        f.write("\n")
        f.write("freq_normalized,mag_db\n")
        for nu, d in zip(freqs, db):
            f.write(f"{nu:.6f},{d:.4f}\n")
    return 0


def cmd_init_random(args) -> int:
    if args.config:
        with open(args.config) as f:
            cfg = GeneratorConfig.from_dict(json.load(f))
    else:
        if args.variant not in VARIANTS:
            raise InputRejected(
                f"unknown variant {args.variant!r}; known: {sorted(VARIANTS)}"
            )
        cfg = variant_config(args.variant)
    checkpoint.save(build_generator(cfg, seed=args.seed), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ampvoc", description=__doc__)
    p.add_argument("--seed", type=int, default=0, help="RNG seed for dither/init/bench inputs")
    p.add_argument("--threads", type=int, default=1, help="worker threads for batch metrics")
    p.add_argument("--pcm16", action="store_true", help="write PCM16 WAVs with dither")
    p.add_argument("--config", default=None, help="generator config JSON (init-random)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mel", help="extract a log-mel spectrogram to a .bvgm file")
    s.add_argument("input"), s.add_argument("output")
    s.set_defaults(func=cmd_mel)

    s = sub.add_parser("vocode", help="synthesize a waveform from a .bvgm mel")
    s.add_argument("checkpoint"), s.add_argument("input"), s.add_argument("output")
    s.set_defaults(func=cmd_vocode)

    s = sub.add_parser("copysyn", help="mel-extract then re-synthesize a WAV")
    s.add_argument("checkpoint"), s.add_argument("input"), s.add_argument("output")
    s.set_defaults(func=cmd_copysyn)

    s = sub.add_parser("metrics", help="objective metrics between two WAVs")
    s.add_argument("ref", nargs="?"), s.add_argument("deg", nargs="?")
    s.add_argument("--manifest", default=None, help="two-column file of ref deg paths")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("bench", help="synthesis speed (real-time factor)")
    s.add_argument("checkpoint")
    s.add_argument("--seconds", type=float, default=1.0)
    s.add_argument("--runs", type=int, default=3)
    s.add_argument("--warmup", type=int, default=2)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("spec-dump", help="dump an STFT magnitude CSV (bins x frames)")
    s.add_argument("input"), s.add_argument("output")
    s.set_defaults(func=cmd_spec_dump)

    s = sub.add_parser("filter", help="dump low-pass taps and DFT response as CSV")
    s.add_argument("--m", type=int, default=2)
    s.add_argument("output")
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("init-random", help="write a random-weight checkpoint")
    s.add_argument("variant", nargs="?", default="bigvgan-base")
    s.add_argument("output")
    s.set_defaults(func=cmd_init_random)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputRejected as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FormatError as e:
        print(f"format error: {e}", file=sys.stderr)
        return 3
    except (ConfigurationError, ValidationError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
