from __future__ import annotations

from typing import List

from .ast import App, Const, Quantifier, Script, Sort, SortKind, Term, Uninterpreted, Var
from .lexer import is_simple_symbol


def print_symbol(name: str) -> str:
    return name if is_simple_symbol(name) else f"|{name}|"


def print_sort(sort: Sort) -> str:
    if sort.is_opaque and sort.name and not sort.name.startswith("("):
        return print_symbol(sort.name)
    return str(sort)


def print_const(const: Const) -> str:
    sort = const.sort
    if sort.kind is SortKind.BOOL:
        return "true" if const.value else "false"
    if sort.kind is SortKind.BITVEC:
        width = sort.width or 1
        if width % 4 == 0:
            return "#x" + format(int(const.value), f"0{width // 4}x")
        return "#b" + format(int(const.value), f"0{width}b")
    value = int(const.value)
    return str(value) if value >= 0 else f"(- {-value})"


def print_term(term: Term) -> str:
    if isinstance(term, Const):
        return print_const(term)
    if isinstance(term, Var):
        return print_symbol(term.name)
    if isinstance(term, App):
        return "(" + " ".join([term.op.symbol] + [print_term(a) for a in term.args]) + ")"
    if isinstance(term, Quantifier):
        bound = " ".join(f"({print_symbol(n)} {print_sort(s)})" for n, s in term.bound)
        return f"({term.kind} ({bound}) {print_term(term.body)})"
    if isinstance(term, Uninterpreted):
        # Names of opaque nodes are kept as source text (indexed heads, literals).
        head = term.name if not is_simple_symbol(term.name) and _is_verbatim(term.name) else print_symbol(term.name)
        if not term.args:
            return head
        return "(" + " ".join([head] + [print_term(a) for a in term.args]) + ")"
    raise TypeError(f"not a term: {term!r}")


def _is_verbatim(name: str) -> bool:
    return name.startswith(("(", '"', "|")) or name[:1].isdigit()


def print_script(script: Script) -> str:
    """Canonical text: one command per line, lowercase keywords, hex bit-vectors where the width allows."""
    lines: List[str] = []
    if script.logic is not None:
        lines.append(f"(set-logic {print_symbol(script.logic)})")
    for decl in script.declarations:
        name = print_symbol(decl.name)
        if decl.arity:
            params = " ".join(print_sort(s) for s in decl.arg_sorts)
            lines.append(f"(declare-fun {name} ({params}) {print_sort(decl.sort)})")
        else:
            lines.append(f"(declare-const {name} {print_sort(decl.sort)})")
    for assertion in script.assertions:
        lines.append(f"(assert {print_term(assertion)})")
    if script.has_check_sat:
        lines.append("(check-sat)")
    return "".join(line + "\n" for line in lines)
