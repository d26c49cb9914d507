"""Converter from weight-normalized PyTorch vocoder checkpoints to the
.bvgw inference container, with parity probing against the engine."""

from .export import ExportReport, engine_config, export, fix_sum_aggregation, run_probe
from .formats import read_bvgm, read_bvgw, write_bvgm, write_bvgw
from .namemap import MappingError, NameMap, fuse_weight_norm, lineage_rules
from .torch_ref import SourceGenerator

__version__ = "0.1.0"
