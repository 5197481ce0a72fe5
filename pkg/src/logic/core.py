from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

from ..errors import HarnessError


class Verdict(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


class TernaryAnswer(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNCERTAIN = "uncertain"


class TaskKind(enum.Enum):
    BINARY_SATNESS = "binary_satness"
    TERNARY_ENTAILMENT = "ternary_entailment"


class Dialect(enum.Enum):
    SMTLIB = "smtlib"
    Z3PY_TEXT = "z3py_text"
    NL = "nl"


Answer = Union[Verdict, TernaryAnswer]
Value = Union[bool, int]


class InconsistentPremises(HarnessError):
    code = 110

    def __init__(self) -> None:
        super().__init__("both hypotheses are unsatisfiable: the premises are inconsistent")


def parse_answer(text: str) -> Answer:
    """Map a closed-vocabulary label ("sat", "true", ...) to its answer value."""
    label = text.strip().lower()
    for enum_type in (Verdict, TernaryAnswer):
        for member in enum_type:
            if member.value == label:
                return member
    raise ValueError(f"unknown answer label: {text!r}")


def answer_kind(answer: Answer) -> TaskKind:
    if isinstance(answer, TernaryAnswer):
        return TaskKind.TERNARY_ENTAILMENT
    return TaskKind.BINARY_SATNESS


def is_undecided(answer: Answer) -> bool:
    return answer in (Verdict.UNKNOWN, TernaryAnswer.UNCERTAIN)


def count_lines(code: str) -> int:
    return len(code.splitlines())


def estimate_tokens(text: str, chars_per_token: int = 4) -> int:
    return (len(text) + chars_per_token - 1) // chars_per_token


@dataclass(frozen=True)
class Problem:
    id: str
    dialect: Dialect
    code: str
    ground_truth: Answer
    source: str = ""
    nl_context: Optional[str] = None
    category: Optional[str] = None

    @property
    def loc(self) -> int:
        return count_lines(self.code)

    @property
    def task_kind(self) -> TaskKind:
        return answer_kind(self.ground_truth)

    def to_record(self) -> Dict[str, object]:
        record: Dict[str, object] = {
            "id": self.id,
            "dialect": self.dialect.value,
            "code": self.code,
            "nl_context": self.nl_context,
            "ground_truth": self.ground_truth.value,
            "source": self.source,
            "loc": self.loc,
        }
        if self.category is not None:
            record["category"] = self.category
        return record


@dataclass(frozen=True)
class Assignment:
    bindings: Mapping[str, Value] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Value:
        return self.bindings[name]

    def __contains__(self, name: object) -> bool:
        return name in self.bindings

    def as_dict(self) -> Dict[str, Value]:
        return dict(self.bindings)

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.bindings.items())))


@dataclass(frozen=True)
class UnsatCore:
    assertion_indices: FrozenSet[int]

    @classmethod
    def of(cls, indices: Iterable[int]) -> "UnsatCore":
        return cls(frozenset(indices))

    def sorted(self) -> Tuple[int, ...]:
        return tuple(sorted(self.assertion_indices))

    def __len__(self) -> int:
        return len(self.assertion_indices)


_BINARY_MAP = {
    Verdict.SAT: TernaryAnswer.TRUE,
    Verdict.UNSAT: TernaryAnswer.FALSE,
    Verdict.UNKNOWN: TernaryAnswer.UNCERTAIN,
}


def verdict_to_binary(v: Verdict) -> TernaryAnswer:
    return _BINARY_MAP[v]


def negate_answer(answer: TernaryAnswer) -> TernaryAnswer:
    if answer is TernaryAnswer.TRUE:
        return TernaryAnswer.FALSE
    if answer is TernaryAnswer.FALSE:
        return TernaryAnswer.TRUE
    return TernaryAnswer.UNCERTAIN


def dual_hypothesis_combine(
    affirm: Verdict,
    negate: Verdict,
    *,
    literal_uncertain: bool = False,
) -> TernaryAnswer:
    """Combine the verdicts of premises∧conclusion and premises∧¬conclusion.

    ``literal_uncertain`` reads both-UNSAT as UNCERTAIN instead of raising, for
    compatibility with datasets labelled that way.
    """
    if Verdict.UNKNOWN in (affirm, negate):
        return TernaryAnswer.UNCERTAIN
    if affirm is Verdict.SAT and negate is Verdict.UNSAT:
        return TernaryAnswer.TRUE
    if affirm is Verdict.UNSAT and negate is Verdict.SAT:
        return TernaryAnswer.FALSE
    if affirm is Verdict.SAT and negate is Verdict.SAT:
        return TernaryAnswer.UNCERTAIN
    if literal_uncertain:
        return TernaryAnswer.UNCERTAIN
    raise InconsistentPremises()
