"""Experiment orchestration: config, training, evaluation, benchmarking and plots."""

from .bench import BenchConfig, BenchRow, bench
from .config import ConfigError, RunConfig, dump_config, load_config, parse_config
from .evaluate import DEFAULT_EVAL_SEEDS, ArchitectureMismatch, evaluate
from .training import METRICS_HEADER, RunResult, read_metrics, train

__all__ = [
    "ArchitectureMismatch", "BenchConfig", "BenchRow", "ConfigError", "DEFAULT_EVAL_SEEDS", "METRICS_HEADER",
    "RunConfig", "RunResult", "bench", "dump_config", "evaluate", "load_config", "parse_config", "read_metrics",
    "train",
]
