from __future__ import annotations

from functools import reduce
from typing import Callable, Dict, Mapping, Sequence, Union

import numpy as np

from ..errors import HarnessError
from ..logic.core import Assignment, Value
from ..smtlib.ast import App, Const, Op, Quantifier, SortKind, Term, Uninterpreted, Var


class UnboundVariable(HarnessError):
    code = 301

    def __init__(self, name: str) -> None:
        super().__init__(f"variable '{name}' has no value in the assignment")
        self.name = name


class UnsupportedTerm(HarnessError):
    code = 302

    def __init__(self, what: str) -> None:
        super().__init__(f"cannot evaluate {what}")


def _mask(width: int) -> int:
    return (1 << width) - 1


def _chain(values: Sequence, pred: Callable) -> bool:
    return all(pred(a, b) for a, b in zip(values, values[1:]))


_COMPARE = {
    Op.LT: lambda a, b: a < b,
    Op.LE: lambda a, b: a <= b,
    Op.GT: lambda a, b: a > b,
    Op.GE: lambda a, b: a >= b,
    Op.BVULT: lambda a, b: a < b,
    Op.BVULE: lambda a, b: a <= b,
    Op.BVUGT: lambda a, b: a > b,
    Op.BVUGE: lambda a, b: a >= b,
}


def evaluate(term: Term, assignment: Union[Assignment, Mapping[str, Value]]) -> Value:
    """Evaluate a quantifier-free term; bit-vector results are reduced modulo 2**width."""
    env = assignment.bindings if isinstance(assignment, Assignment) else assignment
    return _eval(term, env)


def _eval(term: Term, env: Mapping[str, Value]) -> Value:
    if isinstance(term, Const):
        return term.value
    if isinstance(term, Var):
        if term.name not in env:
            raise UnboundVariable(term.name)
        return env[term.name]
    if isinstance(term, Quantifier):
        raise UnsupportedTerm(f"quantified term ({term.kind})")
    if isinstance(term, Uninterpreted):
        raise UnsupportedTerm(f"opaque term '{term.name}'")

    op = term.op
    if op is Op.ITE:
        cond = _eval(term.args[0], env)
        return _eval(term.args[1] if cond else term.args[2], env)
    if op is Op.AND:
        return all(_eval(a, env) for a in term.args)
    if op is Op.OR:
        return any(_eval(a, env) for a in term.args)
    if op is Op.IMPLIES:
        result = bool(_eval(term.args[-1], env))
        for arg in reversed(term.args[:-1]):
            result = (not _eval(arg, env)) or result
        return result

    args = [_eval(a, env) for a in term.args]
    if op is Op.NOT:
        return not args[0]
    if op is Op.XOR:
        return reduce(lambda a, b: bool(a) != bool(b), args)
    if op in (Op.IFF, Op.EQ):
        return _chain(args, lambda a, b: a == b)
    if op is Op.DISTINCT:
        return len(set(args)) == len(args)
    if op in _COMPARE:
        return _chain(args, _COMPARE[op])
    if op is Op.ADD:
        return sum(args)
    if op is Op.SUB:
        return -args[0] if len(args) == 1 else reduce(lambda a, b: a - b, args)
    if op is Op.MUL:
        return reduce(lambda a, b: a * b, args)

    width = term.sort.width or 1
    mask = _mask(width)
    if op is Op.BVNOT:
        return ~args[0] & mask
    if op is Op.BVNEG:
        return -args[0] & mask
    if op is Op.BVAND:
        return reduce(lambda a, b: a & b, args)
    if op is Op.BVOR:
        return reduce(lambda a, b: a | b, args)
    if op is Op.BVXOR:
        return reduce(lambda a, b: a ^ b, args)
    if op is Op.BVADD:
        return sum(args) & mask
    if op is Op.BVSUB:
        return (args[0] - args[1]) & mask
    if op is Op.BVMUL:
        return reduce(lambda a, b: (a * b) & mask, args)
    if op is Op.BVSHL:
        return (args[0] << args[1]) & mask if args[1] < width else 0
    if op is Op.BVLSHR:
        return args[0] >> args[1] if args[1] < width else 0
    raise UnsupportedTerm(f"operator {op.symbol}")


# ------------------------------------------------------------------ vectorised
def evaluate_columns(term: Term, columns: Dict[str, np.ndarray], size: int, dtype=np.int64) -> np.ndarray:
    """Evaluate ``term`` over ``size`` candidate assignments held column-wise."""
    if isinstance(term, Const):
        if term.sort.kind is SortKind.BOOL:
            return np.full(size, bool(term.value), dtype=bool)
        return np.full(size, int(term.value), dtype=dtype)
    if isinstance(term, Var):
        if term.name not in columns:
            raise UnboundVariable(term.name)
        return columns[term.name]
    if isinstance(term, (Quantifier, Uninterpreted)):
        raise UnsupportedTerm("opaque or quantified term")

    op = term.op
    args = [evaluate_columns(a, columns, size, dtype) for a in term.args]
    if op is Op.ITE:
        return np.where(args[0].astype(bool), args[1], args[2])
    if op is Op.NOT:
        return ~args[0].astype(bool)
    if op is Op.AND:
        return np.logical_and.reduce([a.astype(bool) for a in args])
    if op is Op.OR:
        return np.logical_or.reduce([a.astype(bool) for a in args])
    if op is Op.XOR:
        return np.logical_xor.reduce([a.astype(bool) for a in args])
    if op is Op.IMPLIES:
        result = args[-1].astype(bool)
        for arg in reversed(args[:-1]):
            result = ~arg.astype(bool) | result
        return result
    if op in (Op.IFF, Op.EQ):
        return np.logical_and.reduce([(a == b) for a, b in zip(args, args[1:])]).astype(bool)
    if op is Op.DISTINCT:
        pairs = [args[i] != args[j] for i in range(len(args)) for j in range(i + 1, len(args))]
        return np.logical_and.reduce(pairs).astype(bool)
    if op in _COMPARE:
        cmp = _COMPARE[op]
        return np.logical_and.reduce([cmp(a, b) for a, b in zip(args, args[1:])]).astype(bool)
    if op is Op.ADD:
        return reduce(np.add, args)
    if op is Op.SUB:
        return -args[0] if len(args) == 1 else reduce(np.subtract, args)
    if op is Op.MUL:
        return reduce(np.multiply, args)

    mask = _mask(term.sort.width or 1)
    width = term.sort.width or 1
    if op is Op.BVNOT:
        return ~args[0] & mask
    if op is Op.BVNEG:
        return -args[0] & mask
    if op is Op.BVAND:
        return reduce(np.bitwise_and, args)
    if op is Op.BVOR:
        return reduce(np.bitwise_or, args)
    if op is Op.BVXOR:
        return reduce(np.bitwise_xor, args)
    if op is Op.BVADD:
        return reduce(np.add, args) & mask
    if op is Op.BVSUB:
        return (args[0] - args[1]) & mask
    if op is Op.BVMUL:
        return reduce(lambda a, b: (a * b) & mask, args)
    if op in (Op.BVSHL, Op.BVLSHR):
        in_range = (args[1] < width).astype(bool)
        shift = np.where(in_range, args[1], 0)
        shifted = (args[0] << shift) & mask if op is Op.BVSHL else args[0] >> shift
        return np.where(in_range, shifted, 0)
    raise UnsupportedTerm(f"operator {op.symbol}")
