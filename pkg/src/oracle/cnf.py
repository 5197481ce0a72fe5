"""Naive CNF conversion for propositional scripts.

Negations are pushed inward while converting (no Tseitin variables), so the
clause set is equivalent to the input over the same variables. Distribution
can blow up; callers pass ``max_clauses`` and handle ``CnfTooLarge``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Set

from ..smtlib.ast import App, Const, Op, Term, Var

Clause = FrozenSet[int]


class CnfTooLarge(Exception):
    pass


@dataclass
class VarTable:
    index: Dict[str, int] = field(default_factory=dict)
    names: List[str] = field(default_factory=list)

    def literal(self, name: str) -> int:
        if name not in self.index:
            self.names.append(name)
            self.index[name] = len(self.names)
        return self.index[name]


def _conj(parts: Iterable[Set[Clause]]) -> Set[Clause]:
    out: Set[Clause] = set()
    for part in parts:
        out |= part
    return out


class _Converter:
    def __init__(self, table: VarTable, max_clauses: int) -> None:
        self.table = table
        self.max_clauses = max_clauses

    def disj(self, parts: Iterable[Set[Clause]]) -> Set[Clause]:
        acc: Set[Clause] = {frozenset()}
        for part in parts:
            if not part:  # a true disjunct
                return set()
            nxt: Set[Clause] = set()
            for left in acc:
                for right in part:
                    merged = left | right
                    if any(-lit in merged for lit in merged):
                        continue
                    nxt.add(merged)
                    if len(nxt) > self.max_clauses:
                        raise CnfTooLarge()
            acc = nxt
            if not acc:
                return set()
        return acc

    def convert(self, term: Term, positive: bool) -> Set[Clause]:
        if isinstance(term, Const):
            return set() if bool(term.value) == positive else {frozenset()}
        if isinstance(term, Var):
            lit = self.table.literal(term.name)
            return {frozenset([lit if positive else -lit])}
        if not isinstance(term, App):
            raise TypeError(f"not propositional: {term!r}")

        op, args = term.op, term.args
        if op is Op.NOT:
            return self.convert(args[0], not positive)
        if op is Op.AND:
            parts = [self.convert(a, positive) for a in args]
            return _conj(parts) if positive else self.disj(parts)
        if op is Op.OR:
            parts = [self.convert(a, positive) for a in args]
            return self.disj(parts) if positive else _conj(parts)
        if op is Op.IMPLIES:
            parts = [self.convert(a, not positive) for a in args[:-1]] + [self.convert(args[-1], positive)]
            return self.disj(parts) if positive else _conj(parts)
        if op in (Op.IFF, Op.EQ):
            pairs = [self._iff(a, b, positive) for a, b in zip(args, args[1:])]
            return _conj(pairs) if positive else self.disj(pairs)
        if op is Op.XOR:
            left = args[0]
            for right in args[1:-1]:
                left = App(Op.XOR, (left, right), term.sort)
            return self._iff(left, args[-1], not positive)
        if op is Op.DISTINCT:
            if len(args) > 2:
                # Only two truth values exist.
                return {frozenset()} if positive else set()
            return self._iff(args[0], args[1], not positive)
        if op is Op.ITE:
            cond, then, other = args
            return _conj(
                [
                    self.disj([self.convert(cond, False), self.convert(then, positive)]),
                    self.disj([self.convert(cond, True), self.convert(other, positive)]),
                ]
            )
        raise TypeError(f"not propositional: {op.symbol}")

    def _iff(self, a: Term, b: Term, positive: bool) -> Set[Clause]:
        if positive:
            return _conj(
                [
                    self.disj([self.convert(a, False), self.convert(b, True)]),
                    self.disj([self.convert(a, True), self.convert(b, False)]),
                ]
            )
        return _conj(
            [
                self.disj([self.convert(a, True), self.convert(b, True)]),
                self.disj([self.convert(a, False), self.convert(b, False)]),
            ]
        )


def to_cnf(assertions: Iterable[Term], table: VarTable, max_clauses: int) -> List[Clause]:
    converter = _Converter(table, max_clauses)
    clauses: Set[Clause] = set()
    for term in assertions:
        clauses |= converter.convert(term, True)
        if len(clauses) > max_clauses:
            raise CnfTooLarge()
    return sorted(clauses, key=lambda c: (len(c), sorted(c)))
