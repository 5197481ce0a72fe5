from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple, Union


class SortKind(enum.Enum):
    BOOL = "bool"
    INT = "int"
    BITVEC = "bitvec"
    OPAQUE = "opaque"


@dataclass(frozen=True)
class Sort:
    kind: SortKind
    width: Optional[int] = None
    name: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind is SortKind.BITVEC and (self.width is None or self.width < 1):
            raise ValueError(f"bit-vector width must be >= 1, got {self.width}")

    @property
    def is_opaque(self) -> bool:
        return self.kind is SortKind.OPAQUE

    def __str__(self) -> str:
        if self.kind is SortKind.BOOL:
            return "Bool"
        if self.kind is SortKind.INT:
            return "Int"
        if self.kind is SortKind.BITVEC:
            return f"(_ BitVec {self.width})"
        return self.name or "?"


BOOL = Sort(SortKind.BOOL)
INT = Sort(SortKind.INT)
# Sort of terms the frontend does not interpret (unknown function applications).
ANY = Sort(SortKind.OPAQUE, name="?")


def bitvec(width: int) -> Sort:
    return Sort(SortKind.BITVEC, width=width)


def opaque(name: str) -> Sort:
    return Sort(SortKind.OPAQUE, name=name)


def compatible(a: Sort, b: Sort) -> bool:
    return a == b or a.is_opaque or b.is_opaque


class Op(enum.Enum):
    NOT = "not"
    AND = "and"
    OR = "or"
    XOR = "xor"
    IMPLIES = "=>"
    IFF = "iff"
    EQ = "="
    DISTINCT = "distinct"
    ITE = "ite"
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    ADD = "+"
    SUB = "-"
    MUL = "*"
    BVAND = "bvand"
    BVOR = "bvor"
    BVXOR = "bvxor"
    BVNOT = "bvnot"
    BVNEG = "bvneg"
    BVSHL = "bvshl"
    BVLSHR = "bvlshr"
    BVADD = "bvadd"
    BVSUB = "bvsub"
    BVMUL = "bvmul"
    BVULT = "bvult"
    BVULE = "bvule"
    BVUGT = "bvugt"
    BVUGE = "bvuge"

    @property
    def symbol(self) -> str:
        # Boolean equivalence is written with "=" in SMT-LIB.
        return "=" if self is Op.IFF else self.value


BOOL_CONNECTIVES = {Op.NOT, Op.AND, Op.OR, Op.XOR, Op.IMPLIES, Op.IFF}
ARITH_COMPARISONS = {Op.LT, Op.LE, Op.GT, Op.GE}
ARITH_OPS = {Op.ADD, Op.SUB, Op.MUL}
BV_COMPARISONS = {Op.BVULT, Op.BVULE, Op.BVUGT, Op.BVUGE}
BV_OPS = {
    Op.BVAND,
    Op.BVOR,
    Op.BVXOR,
    Op.BVNOT,
    Op.BVNEG,
    Op.BVSHL,
    Op.BVLSHR,
    Op.BVADD,
    Op.BVSUB,
    Op.BVMUL,
}


@dataclass(frozen=True)
class Const:
    value: Union[bool, int]
    sort: Sort


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort


@dataclass(frozen=True)
class App:
    op: Op
    args: Tuple["Term", ...]
    sort: Sort


@dataclass(frozen=True)
class Quantifier:
    kind: str  # "forall" | "exists"
    bound: Tuple[Tuple[str, Sort], ...]
    body: "Term"

    @property
    def sort(self) -> Sort:
        return BOOL


@dataclass(frozen=True)
class Uninterpreted:
    """Application (or constant) the oracle cannot interpret; kept for printing and prompting."""

    name: str
    args: Tuple["Term", ...]
    sort: Sort
    opaque: bool = True


Term = Union[Const, Var, App, Quantifier, Uninterpreted]

TRUE = Const(True, BOOL)
FALSE = Const(False, BOOL)


@dataclass(frozen=True)
class Declaration:
    name: str
    sort: Sort
    arg_sorts: Tuple[Sort, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass(frozen=True)
class Script:
    logic: Optional[str] = None
    declarations: Tuple[Declaration, ...] = ()
    assertions: Tuple[Term, ...] = ()
    has_check_sat: bool = False

    def variables(self) -> List[Tuple[str, Sort]]:
        return [(d.name, d.sort) for d in self.declarations if d.arity == 0]

    def functions(self) -> List[Declaration]:
        return [d for d in self.declarations if d.arity > 0]

    def with_assertions(self, assertions: Iterable[Term]) -> "Script":
        return replace(self, assertions=tuple(assertions))

    def subscript(self, indices: Iterable[int]) -> "Script":
        return self.with_assertions(self.assertions[i] for i in sorted(set(indices)))

    @property
    def is_quantified(self) -> bool:
        return any(isinstance(node, Quantifier) for t in self.assertions for node in iter_nodes(t))

    @property
    def is_opaque(self) -> bool:
        return any(is_opaque_node(node) for t in self.assertions for node in iter_nodes(t))

    @property
    def is_propositional(self) -> bool:
        if self.is_quantified or self.is_opaque:
            return False
        for term in self.assertions:
            for node in iter_nodes(term):
                if node.sort.kind is not SortKind.BOOL:
                    return False
        return True


def children(term: Term) -> Tuple[Term, ...]:
    if isinstance(term, (App, Uninterpreted)):
        return term.args
    if isinstance(term, Quantifier):
        return (term.body,)
    return ()


def iter_nodes(term: Term) -> Iterator[Term]:
    stack: List[Term] = [term]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def is_opaque_node(term: Term) -> bool:
    if isinstance(term, Uninterpreted):
        return True
    return term.sort.is_opaque


def free_vars(term: Term) -> Set[Var]:
    found: Set[Var] = set()

    def walk(node: Term, bound: frozenset) -> None:
        if isinstance(node, Var):
            if node.name not in bound:
                found.add(node)
        elif isinstance(node, Quantifier):
            walk(node.body, bound | {name for name, _ in node.bound})
        else:
            for child in children(node):
                walk(child, bound)

    walk(term, frozenset())
    return found


def substitute(term: Term, mapping: Dict[str, Term]) -> Term:
    """Replace free variables by name; quantifier-bound names shadow the mapping."""
    if not mapping:
        return term
    if isinstance(term, Var):
        return mapping.get(term.name, term)
    if isinstance(term, App):
        return replace(term, args=tuple(substitute(a, mapping) for a in term.args))
    if isinstance(term, Uninterpreted):
        return replace(term, args=tuple(substitute(a, mapping) for a in term.args))
    if isinstance(term, Quantifier):
        inner = {k: v for k, v in mapping.items() if k not in {name for name, _ in term.bound}}
        return replace(term, body=substitute(term.body, inner))
    return term


def mk_not(term: Term) -> Term:
    return App(Op.NOT, (term,), BOOL)


def mk_and(terms: Iterable[Term]) -> Term:
    items = tuple(terms)
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return App(Op.AND, items, BOOL)
