"""Syntax-error injection for robustness runs."""

from .engine import (  # noqa: F401
    MutationKind,
    MutationRecord,
    NoMutationSite,
    mutate,
    mutate_dataset,
    original_id,
    verify_broken,
)
