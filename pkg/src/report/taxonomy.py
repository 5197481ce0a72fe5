from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ..corpus.dataset import IoError
from ..errors import HarnessError
from ..eval.runner import RunRecord
from ..settings import TAXONOMY_FILE


class ErrorCategory(enum.Enum):
    INFERRING = "inferring"
    MISUNDERSTANDING_SAT = "misunderstanding_sat"
    PARTIAL_UNSAT = "partial_unsat"
    BITVEC_ARITH = "bitvec_arith"
    REAL_ARITH = "real_arith"
    COMMONSENSE = "commonsense"


class UnknownProblem(HarnessError):
    code = 904

    def __init__(self, problem_id: str) -> None:
        super().__init__(f"tagged problem '{problem_id}' is not in the records")


class TagOnCorrect(HarnessError):
    code = 905

    def __init__(self, problem_id: str) -> None:
        super().__init__(f"problem '{problem_id}' was answered correctly and cannot carry an error tag")


@dataclass(frozen=True)
class TaxonomyEntry:
    category: ErrorCategory
    name: str
    description: str
    color: Tuple[int, int, int]

    @property
    def hex_color(self) -> str:
        return "#{:02x}{:02x}{:02x}".format(*self.color)


def _parse_color(value: str) -> Tuple[int, int, int]:
    value = value.lstrip("#")
    if len(value) != 6:
        raise ValueError(f"Unsupported color format: {value}")
    return (int(value[0:2], 16), int(value[2:4], 16), int(value[4:6], 16))


@lru_cache(maxsize=1)
def load_taxonomy() -> Tuple[TaxonomyEntry, ...]:
    if not TAXONOMY_FILE.exists():
        raise FileNotFoundError(f"Taxonomy file not found at {TAXONOMY_FILE}")
    with TAXONOMY_FILE.open("r", encoding="utf-8") as f:
        raw = json.load(f)
    entries = [
        TaxonomyEntry(
            category=ErrorCategory(code),
            name=data["name"],
            description=data["description"],
            color=_parse_color(data["color"]),
        )
        for code, data in raw.items()
    ]
    order = list(ErrorCategory)
    return tuple(sorted(entries, key=lambda e: order.index(e.category)))


@dataclass(frozen=True)
class ErrorTag:
    tag: ErrorCategory
    problem_id: str
    note: str = ""
    # restricts the tag to one strategy's records when a file covers several
    strategy: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "ErrorTag":
        return cls(
            tag=ErrorCategory(str(data["tag"]).lower()),
            problem_id=str(data["problem_id"]),
            note=str(data.get("note", "")),
            strategy=data.get("strategy"),  # type: ignore[arg-type]
        )


def load_tags(path: Union[str, Path]) -> List[ErrorTag]:
    """JSONL sidecar of ``{"tag", "problem_id", "note"?, "strategy"?}``."""
    source = Path(path)
    try:
        with source.open("r", encoding="utf-8") as fh:
            return [ErrorTag.from_dict(json.loads(line)) for line in fh if line.strip()]
    except OSError as exc:
        raise IoError(f"cannot read tags {source}: {exc}") from exc
    except (ValueError, KeyError) as exc:
        raise IoError(f"malformed tag in {source}: {exc}") from exc


@dataclass(frozen=True)
class TaxonomyRow:
    strategy: str
    counts: Tuple[Tuple[ErrorCategory, int], ...]

    @property
    def total(self) -> int:
        return sum(c for _, c in self.counts)

    def proportion(self, category: ErrorCategory) -> Fraction:
        count = dict(self.counts)[category]
        return Fraction(count, self.total) if self.total else Fraction(0)

    def to_dict(self) -> Dict[str, object]:
        return {
            "strategy": self.strategy,
            "counts": {c.value: n for c, n in self.counts},
            "total": self.total,
        }


def tag_errors(records: Sequence[RunRecord], tags: Iterable[ErrorTag]) -> List[TaxonomyRow]:
    """Per-strategy counts of human-assigned error categories.

    Each tag counts once per strategy whose records got that problem wrong.
    """
    strategies = sorted({r.strategy for r in records})
    tallies: Dict[str, Dict[ErrorCategory, int]] = {s: {c: 0 for c in ErrorCategory} for s in strategies}
    for tag in tags:
        matches = [r for r in records if r.problem_id == tag.problem_id and tag.strategy in (None, r.strategy)]
        if not matches:
            raise UnknownProblem(tag.problem_id)
        wrong = {r.strategy for r in matches if not r.correct}
        if not wrong:
            raise TagOnCorrect(tag.problem_id)
        for strategy in wrong:
            tallies[strategy][tag.tag] += 1
    return [TaxonomyRow(s, tuple((c, tallies[s][c]) for c in ErrorCategory)) for s in strategies]
