"""Shared verdict, problem and assignment types."""

from .core import (  # noqa: F401
    Answer,
    Assignment,
    Dialect,
    InconsistentPremises,
    Problem,
    TaskKind,
    TernaryAnswer,
    UnsatCore,
    Verdict,
    dual_hypothesis_combine,
    negate_answer,
    verdict_to_binary,
)
