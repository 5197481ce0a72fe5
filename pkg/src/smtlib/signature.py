from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from .ast import Declaration, Script, Sort
from .printer import print_sort, print_term


@dataclass(frozen=True)
class Signature:
    """Variables and constraints of a script, as handed to the DCoL extraction stage."""

    variables: Tuple[Tuple[str, Sort], ...]
    functions: Tuple[Declaration, ...]
    constraint_texts: Tuple[str, ...]

    @property
    def constraint_count(self) -> int:
        return len(self.constraint_texts)

    def render_variables(self) -> str:
        lines: List[str] = [f"- {name}: {print_sort(sort)}" for name, sort in self.variables]
        for decl in self.functions:
            params = ", ".join(print_sort(s) for s in decl.arg_sorts)
            lines.append(f"- {decl.name}: ({params}) -> {print_sort(decl.sort)}")
        return "\n".join(lines) if lines else "(none)"

    def render_constraints(self) -> str:
        if not self.constraint_texts:
            return "(none)"
        return "\n".join(f"C{i + 1}: {text}" for i, text in enumerate(self.constraint_texts))


def extract_signature(script: Script) -> Signature:
    return Signature(
        variables=tuple(script.variables()),
        functions=tuple(script.functions()),
        constraint_texts=tuple(print_term(t) for t in script.assertions),
    )
