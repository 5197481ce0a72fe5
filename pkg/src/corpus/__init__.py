"""Datasets of logic problems: JSONL io, statistics, size filters and generators."""

from .dataset import (  # noqa: F401
    Dataset,
    DatasetStats,
    DuplicateId,
    EmptyDataset,
    IoError,
    SchemaError,
    filter_dataset,
    load,
    stats,
    write,
)
from .generate import GenKind, GenSpec, OracleUndecided, QueryKind, generate  # noqa: F401
