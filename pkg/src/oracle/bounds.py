"""Linear reasoning over top-level integer atoms.

Only conjuncts that hold in every model are collected, so both the
Fourier–Motzkin refutation and the propagated intervals are sound for
UNSAT claims and for bounding enumeration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import gcd
from typing import Dict, Iterable, List, Optional, Tuple

from ..smtlib.ast import App, Const, Op, SortKind, Term, Var


LOGGER = logging.getLogger(__name__)

Interval = Tuple[Optional[int], Optional[int]]


@dataclass(frozen=True)
class LinearAtom:
    """sum(coef * var) + const <= 0"""

    coeffs: Tuple[Tuple[str, int], ...]
    const: int

    @classmethod
    def build(cls, coeffs: Dict[str, int], const: int) -> "LinearAtom":
        items = {name: c for name, c in coeffs.items() if c != 0}
        g = 0
        for c in items.values():
            g = gcd(g, abs(c))
        if g > 1:
            items = {name: c // g for name, c in items.items()}
            const = -((-const) // g)  # ceil(const / g)
        return cls(tuple(sorted(items.items())), const)

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.coeffs]

    def coef(self, name: str) -> int:
        return dict(self.coeffs).get(name, 0)


def linearize(term: Term) -> Optional[Tuple[Dict[str, int], int]]:
    if isinstance(term, Const) and term.sort.kind is SortKind.INT:
        return {}, int(term.value)
    if isinstance(term, Var) and term.sort.kind is SortKind.INT:
        return {term.name: 1}, 0
    if not isinstance(term, App):
        return None
    parts = [linearize(a) for a in term.args]
    if any(p is None for p in parts):
        return None
    if term.op is Op.ADD:
        return _combine(parts, [1] * len(parts))
    if term.op is Op.SUB:
        if len(parts) == 1:
            return _combine(parts, [-1])
        return _combine(parts, [1] + [-1] * (len(parts) - 1))
    if term.op is Op.MUL:
        scale = 1
        variable: Optional[Tuple[Dict[str, int], int]] = None
        for coeffs, const in parts:
            if coeffs:
                if variable is not None:
                    return None
                variable = (coeffs, const)
            else:
                scale *= const
        if variable is None:
            return {}, scale
        return {k: v * scale for k, v in variable[0].items()}, variable[1] * scale
    return None


def _combine(parts, signs) -> Tuple[Dict[str, int], int]:
    coeffs: Dict[str, int] = {}
    const = 0
    for (cs, k), sign in zip(parts, signs):
        for name, c in cs.items():
            coeffs[name] = coeffs.get(name, 0) + sign * c
        const += sign * k
    return coeffs, const


def _le(a: Term, b: Term, strict: bool) -> Optional[LinearAtom]:
    left, right = linearize(a), linearize(b)
    if left is None or right is None:
        return None
    coeffs, const = _combine([left, right], [1, -1])
    return LinearAtom.build(coeffs, const + (1 if strict else 0))


_FLIP = {Op.LT: Op.GE, Op.LE: Op.GT, Op.GT: Op.LE, Op.GE: Op.LT}


def _atoms_of(term: Term, positive: bool, out: List[LinearAtom]) -> None:
    if not isinstance(term, App):
        return
    op, args = term.op, term.args
    if op is Op.NOT:
        _atoms_of(args[0], not positive, out)
        return
    if (op is Op.AND and positive) or (op is Op.OR and not positive):
        for arg in args:
            _atoms_of(arg, positive, out)
        return
    if op in _FLIP:
        if not positive:
            if len(args) != 2:
                return
            op = _FLIP[op]
        for a, b in zip(args, args[1:]):
            if op in (Op.LT, Op.LE):
                atom = _le(a, b, strict=op is Op.LT)
            else:
                atom = _le(b, a, strict=op is Op.GT)
            if atom is not None:
                out.append(atom)
        return
    if op is Op.EQ and positive and args[0].sort.kind is SortKind.INT:
        for a, b in zip(args, args[1:]):
            for atom in (_le(a, b, False), _le(b, a, False)):
                if atom is not None:
                    out.append(atom)


def top_level_atoms(assertions: Iterable[Term]) -> List[LinearAtom]:
    out: List[LinearAtom] = []
    for term in assertions:
        _atoms_of(term, True, out)
    return out


# ------------------------------------------------------------------ refutation
def fourier_motzkin(atoms: Iterable[LinearAtom], max_constraints: int = 5000) -> bool:
    """True when the atoms have no integer solution (proof found); False means undecided."""
    constraints = set(atoms)
    while True:
        live = set()
        for atom in constraints:
            if not atom.coeffs:
                if atom.const > 0:
                    return True
                continue
            live.add(atom)
        if not live:
            return False
        names = sorted({name for atom in live for name in atom.names})

        def cost(name: str) -> Tuple[int, str]:
            pos = sum(1 for a in live if a.coef(name) > 0)
            neg = sum(1 for a in live if a.coef(name) < 0)
            return pos * neg - pos - neg, name

        pivot = min(names, key=cost)
        upper = [a for a in live if a.coef(pivot) > 0]
        lower = [a for a in live if a.coef(pivot) < 0]
        nxt = {a for a in live if a.coef(pivot) == 0}
        for up in upper:
            for low in lower:
                a, b = up.coef(pivot), -low.coef(pivot)
                coeffs: Dict[str, int] = {}
                for name, c in up.coeffs:
                    coeffs[name] = coeffs.get(name, 0) + b * c
                for name, c in low.coeffs:
                    coeffs[name] = coeffs.get(name, 0) + a * c
                nxt.add(LinearAtom.build(coeffs, b * up.const + a * low.const))
                if len(nxt) > max_constraints:
                    LOGGER.debug("Fourier-Motzkin gave up after %d constraints", len(nxt))
                    return False
        constraints = nxt


def propagate_bounds(atoms: List[LinearAtom], names: Iterable[str], rounds: int = 64) -> Optional[Dict[str, Interval]]:
    """Interval bounds implied by the atoms; None when some interval becomes empty."""
    lo: Dict[str, Optional[int]] = {n: None for n in names}
    hi: Dict[str, Optional[int]] = {n: None for n in names}
    for atom in atoms:
        for name in atom.names:
            lo.setdefault(name, None)
            hi.setdefault(name, None)

    for _ in range(rounds):
        changed = False
        for atom in atoms:
            for name, c in atom.coeffs:
                rest_min = 0
                for other, d in atom.coeffs:
                    if other == name:
                        continue
                    bound = lo[other] if d > 0 else hi[other]
                    if bound is None:
                        rest_min = None
                        break
                    rest_min += d * bound
                if rest_min is None:
                    continue
                limit = -atom.const - rest_min  # c * x <= limit
                if c > 0:
                    new_hi = limit // c
                    if hi[name] is None or new_hi < hi[name]:
                        hi[name] = new_hi
                        changed = True
                else:
                    new_lo = -(limit // -c)  # ceil(limit / c)
                    if lo[name] is None or new_lo > lo[name]:
                        lo[name] = new_lo
                        changed = True
                if lo[name] is not None and hi[name] is not None and lo[name] > hi[name]:
                    return None
        if not changed:
            break
    return {name: (lo[name], hi[name]) for name in lo}
