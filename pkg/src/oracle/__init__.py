"""Embedded ground-truth oracle: DPLL, bounded enumeration and UNSAT cores."""

from .core import NotUnsat, extract_core  # noqa: F401
from .evaluate import UnboundVariable, evaluate  # noqa: F401
from .solver import OracleConfig, OracleResult, entailment, solve  # noqa: F401
