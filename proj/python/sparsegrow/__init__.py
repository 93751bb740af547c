"""Sparse training with prune-grow rewiring."""

from ._sparsegrow import (
    Config,
    ConfigError,
    DatasetError,
    InfeasibleSparsity,
    NumericFailure,
    ParseError,
    ceil_count,
    cosine_decay,
    dense_weight_gradient,
    erdos_renyi_counts,
    flops_report,
    load_config,
    parse_config,
    prune_grow,
    train,
)

__all__ = [
    "Config",
    "ConfigError",
    "DatasetError",
    "InfeasibleSparsity",
    "NumericFailure",
    "ParseError",
    "ceil_count",
    "cosine_decay",
    "dense_weight_gradient",
    "erdos_renyi_counts",
    "flops_report",
    "load_config",
    "parse_config",
    "prune_grow",
    "train",
]
