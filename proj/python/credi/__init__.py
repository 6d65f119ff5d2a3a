"""Character relationship extraction from dialogue."""

from ._credi import (
    BackendFailure,
    ConfigError,
    HashEmbedder,
    IoError,
    ValidationError,
    corpus_stats,
    edge_color,
    network,
    node_size,
    parse_response,
    render_answer,
    run_cli,
    split_sizes,
    topk,
    weighted_f1,
)

__all__ = [
    "BackendFailure",
    "ConfigError",
    "HashEmbedder",
    "IoError",
    "ValidationError",
    "corpus_stats",
    "edge_color",
    "network",
    "node_size",
    "parse_response",
    "render_answer",
    "run_cli",
    "split_sizes",
    "topk",
    "weighted_f1",
]
