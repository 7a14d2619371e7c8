"""Security hardening for retrieval-augmented code generation."""

from codeguard._core import (
    CodeguardError,
    ConfigError,
    Finding,
    HashingEmbedder,
    IoError,
    KnowledgeBase,
    ParseError,
    ValidationError,
    VectorIndex,
    WeightTable,
    compute_diff,
    cosine,
    detect,
    harden,
    representative_count,
    run_cli,
    security_rate,
    select_representatives,
    similarity,
)

__all__ = [
    "CodeguardError",
    "ConfigError",
    "Finding",
    "HashingEmbedder",
    "IoError",
    "KnowledgeBase",
    "ParseError",
    "ValidationError",
    "VectorIndex",
    "WeightTable",
    "compute_diff",
    "cosine",
    "detect",
    "harden",
    "representative_count",
    "run_cli",
    "security_rate",
    "select_representatives",
    "similarity",
]
