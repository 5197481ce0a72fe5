"""Metrics, robustness deltas, the error taxonomy and report emission."""

from .emit import CSV_HEADER, ReportFormat, emit_report, load_summaries, plot_data  # noqa: F401
from .metrics import (  # noqa: F401
    EQ_TOLERANCE,
    EmptyRecords,
    LineageMismatch,
    MetricsSummary,
    MalformedRow,
    MixedCell,
    RobustnessDelta,
    RowCheck,
    guess_adjusted_accuracy,
    pair_deltas,
    pct,
    robustness_delta,
    summarize,
    summarize_cells,
    validate_cells,
    validate_rows,
)
from .taxonomy import (  # noqa: F401
    ErrorCategory,
    ErrorTag,
    TagOnCorrect,
    TaxonomyRow,
    UnknownProblem,
    load_tags,
    load_taxonomy,
    tag_errors,
)
