from __future__ import annotations

from math import prod
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..logic.core import Value
from ..smtlib.ast import App, Const, Op, Sort, SortKind, Term, iter_nodes
from .evaluate import evaluate_columns

Domain = Tuple[str, Sort, np.ndarray]

_INT64_CONST_LIMIT = 2**24
_INT64_DOMAIN_LIMIT = 2**15
_INT64_BV_WIDTH = 31


def needs_object_dtype(assertions: Sequence[Term], domains: Sequence[Domain]) -> bool:
    """True when int64 columns could overflow; enumeration then runs on Python ints."""
    for _, sort, values in domains:
        if sort.kind is SortKind.BITVEC and (sort.width or 0) > _INT64_BV_WIDTH:
            return True
        if sort.kind is SortKind.INT and len(values) and max(abs(int(values[0])), abs(int(values[-1]))) > _INT64_DOMAIN_LIMIT:
            return True
    for term in assertions:
        for node in iter_nodes(term):
            if isinstance(node, Const) and node.sort.kind is SortKind.INT and abs(int(node.value)) > _INT64_CONST_LIMIT:
                return True
            if isinstance(node, App) and node.op is Op.MUL:
                if len(node.args) > 2 or any(isinstance(a, App) and a.op is Op.MUL for a in node.args):
                    return True
    return False


def domain_values(sort: Sort, low: Optional[int] = None, high: Optional[int] = None, dtype=np.int64) -> np.ndarray:
    if sort.kind is SortKind.BOOL:
        return np.array([False, True], dtype=bool)
    if sort.kind is SortKind.BITVEC:
        return np.arange(0, 1 << (sort.width or 1), dtype=np.int64).astype(dtype)
    assert low is not None and high is not None
    if high < low:
        return np.array([], dtype=dtype)
    if dtype is object:
        return np.array(list(range(low, high + 1)), dtype=object)
    return np.arange(low, high + 1, dtype=np.int64)


def box_size(domains: Sequence[Domain]) -> int:
    return prod(len(values) for _, _, values in domains)


def _to_python(value, sort: Sort) -> Value:
    if sort.kind is SortKind.BOOL:
        return bool(value)
    return int(value)


def search(
    assertions: Sequence[Term],
    domains: List[Domain],
    *,
    chunk: int,
    dtype=np.int64,
) -> Optional[Dict[str, Value]]:
    """Scan the box in mixed-radix order (last variable fastest); first model found or None."""
    total = box_size(domains)
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        size = stop - start
        remaining = np.arange(start, stop, dtype=np.int64)
        columns: Dict[str, np.ndarray] = {}
        for name, _, values in reversed(domains):
            radix = len(values)
            columns[name] = values[remaining % radix]
            remaining = remaining // radix
        ok = np.ones(size, dtype=bool)
        for term in assertions:
            ok &= evaluate_columns(term, columns, size, dtype).astype(bool)
            if not ok.any():
                break
        if ok.any():
            row = int(np.argmax(ok))
            return {name: _to_python(columns[name][row], sort) for name, sort, _ in domains}
    return None
