from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import HarnessError
from ..logic.core import (
    Assignment,
    TernaryAnswer,
    UnsatCore,
    Value,
    Verdict,
    dual_hypothesis_combine,
)
from ..settings import ORACLE, SOLVER_TIMEOUT_ENV
from ..smtlib.ast import Script, Sort, SortKind, free_vars, mk_not
from .bounds import fourier_motzkin, propagate_bounds, top_level_atoms
from .cnf import CnfTooLarge, VarTable, to_cnf
from .dpll import dpll
from .enumerate import Domain, box_size, domain_values, needs_object_dtype, search
from .external import run_external


LOGGER = logging.getLogger(__name__)


class OracleConfigError(HarnessError):
    code = 303
    exit_status = 1


class NoConclusion(HarnessError):
    code = 305

    def __init__(self) -> None:
        super().__init__("an entailment problem needs at least one assertion (the conclusion)")


@dataclass(frozen=True)
class OracleConfig:
    int_domain: Tuple[int, int] = ORACLE.int_domain
    max_bool_vars: int = ORACLE.max_bool_vars
    max_enum_states: int = ORACLE.max_enum_states
    max_cnf_clauses: int = ORACLE.max_cnf_clauses
    enum_chunk: int = ORACLE.enum_chunk
    external_solver_cmd: Optional[str] = None
    external_timeout: float = ORACLE.external_timeout
    cross_check: bool = False

    def __post_init__(self) -> None:
        low, high = self.int_domain
        if low > high:
            raise OracleConfigError(f"int_domain is empty: {low}..{high}")
        for name in ("max_bool_vars", "max_enum_states", "max_cnf_clauses", "enum_chunk"):
            if getattr(self, name) < 1:
                raise OracleConfigError(f"{name} must be positive")
        if self.external_timeout <= 0:
            raise OracleConfigError("external_timeout must be positive")

    @classmethod
    def from_env(cls, **overrides) -> "OracleConfig":
        raw = os.environ.get(SOLVER_TIMEOUT_ENV)
        if raw and "external_timeout" not in overrides:
            try:
                overrides["external_timeout"] = float(raw)
            except ValueError as exc:
                raise OracleConfigError(f"{SOLVER_TIMEOUT_ENV} is not a number: {raw!r}") from exc
        return cls(**overrides)


@dataclass(frozen=True)
class OracleResult:
    """Witness is set exactly when an embedded engine says SAT.

    Verdicts with ``method == "external"`` come from the solver's first output
    token alone and never carry a witness or core.
    """

    verdict: Verdict
    witness: Optional[Assignment] = None
    core: Optional[UnsatCore] = None
    exhausted: bool = False
    method: str = ""


DEFAULT_CONFIG = OracleConfig()


# ------------------------------------------------------------------ helpers
def _used_vars(script: Script) -> Dict[str, Sort]:
    used: Dict[str, Sort] = {}
    for term in script.assertions:
        for var in free_vars(term):
            used[var.name] = var.sort
    return used


def _default_value(sort: Sort, cfg: OracleConfig) -> Optional[Value]:
    if sort.kind is SortKind.BOOL:
        return False
    if sort.kind is SortKind.INT:
        low, high = cfg.int_domain
        return min(max(0, low), high)
    if sort.kind is SortKind.BITVEC:
        return 0
    return None


def _witness(script: Script, found: Dict[str, Value], cfg: OracleConfig) -> Assignment:
    bindings: Dict[str, Value] = {}
    for name, sort in script.variables():
        if name in found:
            bindings[name] = found[name]
        else:
            default = _default_value(sort, cfg)
            if default is not None:
                bindings[name] = default
    return Assignment(bindings)


def _sat(script: Script, found: Dict[str, Value], cfg: OracleConfig, method: str) -> OracleResult:
    return OracleResult(Verdict.SAT, witness=_witness(script, found, cfg), method=method)


def _unknown(method: str, exhausted: bool = True) -> OracleResult:
    return OracleResult(Verdict.UNKNOWN, exhausted=exhausted, method=method)


# ------------------------------------------------------------------ engines
def _solve_propositional(script: Script, cfg: OracleConfig) -> OracleResult:
    used = _used_vars(script)
    if len(used) > cfg.max_bool_vars:
        LOGGER.debug("Propositional script has %d variables (limit %d)", len(used), cfg.max_bool_vars)
        return _unknown("dpll")
    table = VarTable()
    for name in sorted(used):
        table.literal(name)
    try:
        clauses = to_cnf(script.assertions, table, cfg.max_cnf_clauses)
    except CnfTooLarge:
        LOGGER.debug("CNF exceeded %d clauses; enumerating instead", cfg.max_cnf_clauses)
        return _solve_by_enumeration(script, cfg)
    model = dpll(clauses, len(table.names))
    if model is None:
        return OracleResult(Verdict.UNSAT, method="dpll")
    found = {name: model[table.index[name]] for name in table.names}
    return _sat(script, found, cfg, "dpll")


def _solve_by_enumeration(script: Script, cfg: OracleConfig) -> OracleResult:
    atoms = top_level_atoms(script.assertions)
    if atoms and fourier_motzkin(atoms):
        return OracleResult(Verdict.UNSAT, method="fourier-motzkin")

    used = _used_vars(script)
    int_names = sorted(n for n, s in used.items() if s.kind is SortKind.INT)
    bounds = propagate_bounds(atoms, int_names)
    if bounds is None:
        return OracleResult(Verdict.UNSAT, method="bounds")

    dlow, dhigh = cfg.int_domain
    complete = all(bounds[n][0] is not None and bounds[n][1] is not None for n in int_names)

    def int_range(name: str, clip: bool) -> Tuple[int, int]:
        low, high = bounds.get(name, (None, None))
        if clip or low is None:
            low = dlow if low is None else max(low, dlow)
        if clip or high is None:
            high = dhigh if high is None else min(high, dhigh)
        return low, high

    def states(clip: bool) -> int:
        total = 1
        for name, sort in sorted(used.items()):
            if sort.kind is SortKind.INT:
                low, high = int_range(name, clip)
                total *= max(0, high - low + 1)
            elif sort.kind is SortKind.BOOL:
                total *= 2
            else:
                total *= 1 << (sort.width or 1)
        return total

    # An unclipped box covers every model, so exhausting it proves UNSAT.
    attempts = [False, True] if complete else [True]
    for clip in attempts:
        if states(clip) > cfg.max_enum_states:
            continue
        domains: List[Domain] = []
        for name, sort in sorted(used.items()):
            if sort.kind is SortKind.INT:
                domains.append((name, sort, domain_values(sort, *int_range(name, clip))))
            else:
                domains.append((name, sort, domain_values(sort)))
        dtype = object if needs_object_dtype(script.assertions, domains) else np.int64
        if dtype is object:
            domains = [(n, s, v.astype(object) if s.kind is not SortKind.BOOL else v) for n, s, v in domains]
        LOGGER.debug("Enumerating %d states (clipped=%s)", box_size(domains), clip)
        found = search(script.assertions, domains, chunk=cfg.enum_chunk, dtype=dtype)
        if found is not None:
            return _sat(script, found, cfg, "enumeration")
        if not clip:
            return OracleResult(Verdict.UNSAT, method="enumeration")
        return _unknown("enumeration")
    return _unknown("enumeration")


def decide(script: Script, cfg: OracleConfig) -> OracleResult:
    if script.is_quantified or script.is_opaque:
        if cfg.external_solver_cmd:
            verdict = run_external(script, cfg.external_solver_cmd, cfg.external_timeout)
            return OracleResult(verdict, method="external")
        return _unknown("unsupported", exhausted=False)
    if not script.assertions:
        return _sat(script, {}, cfg, "trivial")
    if script.is_propositional:
        result = _solve_propositional(script, cfg)
    else:
        result = _solve_by_enumeration(script, cfg)
    if cfg.cross_check and cfg.external_solver_cmd:
        other = run_external(script, cfg.external_solver_cmd, cfg.external_timeout)
        if Verdict.UNKNOWN not in (other, result.verdict) and other is not result.verdict:
            LOGGER.warning(
                "External solver disagrees: embedded=%s external=%s", result.verdict.value, other.value
            )
    return result


# ------------------------------------------------------------------ public
def solve(script: Script, cfg: Optional[OracleConfig] = None, *, with_core: bool = False) -> OracleResult:
    """Decide a parsed script.

    Propositional scripts go through CNF + DPLL; Int/BitVec scripts through
    linear refutation, interval propagation and bounded enumeration. UNSAT over
    Int is only reported when every model is provably inside the enumerated
    box; otherwise the result is UNKNOWN with ``exhausted`` set.
    """
    cfg = cfg or DEFAULT_CONFIG
    result = decide(script, cfg)
    if with_core and result.verdict is Verdict.UNSAT and result.method != "external":
        from .core import extract_core

        result = replace(result, core=extract_core(script, cfg))
    return result


def entailment(script: Script, cfg: Optional[OracleConfig] = None, *, literal_uncertain: bool = False) -> TernaryAnswer:
    """The last assertion is the conclusion; the others are premises."""
    cfg = cfg or DEFAULT_CONFIG
    if not script.assertions:
        raise NoConclusion()
    premises, conclusion = script.assertions[:-1], script.assertions[-1]
    affirm = decide(script.with_assertions(premises + (conclusion,)), cfg).verdict
    negate = decide(script.with_assertions(premises + (mk_not(conclusion),)), cfg).verdict
    return dual_hypothesis_combine(affirm, negate, literal_uncertain=literal_uncertain)
