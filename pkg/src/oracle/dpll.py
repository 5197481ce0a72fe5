from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Set

from .cnf import Clause


def unit_propagate(clauses: List[Set[int]], model: Dict[int, bool]) -> Optional[List[Set[int]]]:
    """Apply unit clauses until none remain; None on a conflict."""
    while True:
        unit = next((next(iter(c)) for c in clauses if len(c) == 1), None)
        if unit is None:
            return clauses
        model[abs(unit)] = unit > 0
        reduced: List[Set[int]] = []
        for clause in clauses:
            if unit in clause:
                continue
            if -unit in clause:
                clause = clause - {-unit}
                if not clause:
                    return None
            reduced.append(clause)
        clauses = reduced


def pure_literals(clauses: List[Set[int]], model: Dict[int, bool]) -> List[Set[int]]:
    while True:
        literals = {lit for clause in clauses for lit in clause}
        pure = {lit for lit in literals if -lit not in literals}
        if not pure:
            return clauses
        for lit in pure:
            model[abs(lit)] = lit > 0
        clauses = [c for c in clauses if not (c & pure)]


def _choose(clauses: List[Set[int]]) -> int:
    # Shortest clause first, smallest variable within it; keeps runs reproducible.
    shortest = min(clauses, key=len)
    return min(shortest, key=lambda lit: (abs(lit), lit < 0))


def _dpll(clauses: List[Set[int]], model: Dict[int, bool]) -> Optional[Dict[int, bool]]:
    model = dict(model)
    propagated = unit_propagate(clauses, model)
    if propagated is None:
        return None
    propagated = pure_literals(propagated, model)
    if not propagated:
        return model
    lit = _choose(propagated)
    for branch in (lit, -lit):
        found = _dpll(propagated + [{branch}], model)
        if found is not None:
            return found
    return None


def dpll(clauses: Sequence[Clause], num_vars: int) -> Optional[Dict[int, bool]]:
    """Return a model (variable index -> value) or None when the clause set is unsatisfiable.

    Variables not fixed by the search are set to False.
    """
    working = [set(c) for c in clauses]
    if any(not c for c in working):
        return None
    model = _dpll(working, {})
    if model is None:
        return None
    return {v: model.get(v, False) for v in range(1, num_vars + 1)}
