"""Export command line.

    bvgw-export --in source.pt --config source.json --out model.bvgw \
                [--probe mel.bvgm] [--engine-cmd "..."]

The source checkpoint is a PyTorch state dict (weight-normalized or
already fused); the config is the training-style JSON. The report is
printed as JSON to stdout. Exit codes: 0 ok (probe passed or not
requested), 1 mapping/config failure, 5 probe failure.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys

import torch

from .export import export
from .formats import read_bvgm
from .namemap import MappingError
from .torch_ref import SourceGenerator


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="bvgw-export", description=__doc__)
    p.add_argument("--in", dest="src", required=True, help="source state-dict .pt")
    p.add_argument("--config", required=True, help="training-style config JSON")
    p.add_argument("--out", required=True, help="output .bvgw path")
    p.add_argument("--probe", default=None, help="mel .bvgm for the parity probe")
    p.add_argument(
        "--engine-cmd",
        default=None,
        help="inference engine command (default: 'python -m ampvoc.cli')",
    )
    args = p.parse_args(argv)

    with open(args.config) as f:
        source_config = json.load(f)
    state_dict = torch.load(args.src, map_location="cpu", weights_only=True)

    probe_mel = None
    forward_fn = None
    if args.probe:
        probe_mel = read_bvgm(args.probe)
        model = SourceGenerator(source_config)
        model.load_state_dict(state_dict)
        model.eval()

        def forward_fn(mel):
            return model(torch.from_numpy(mel)).numpy()

    engine_cmd = shlex.split(args.engine_cmd) if args.engine_cmd else None
    try:
        report = export(
            state_dict, source_config, args.out,
            probe_mel=probe_mel, forward_fn=forward_fn, engine_cmd=engine_cmd,
        )
    except (MappingError, KeyError) as e:
        print(f"export failed: {e}", file=sys.stderr)
        return 1
    print(report.to_json())
    if report.probe is not None and not report.probe["pass"]:
        print("parity probe failed", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
