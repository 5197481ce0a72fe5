from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..errors import HarnessError
from ..eval.runner import RunRecord
from ..logic.core import TaskKind, is_undecided

# |exe_acc * (1 - unk) - acc| allowed on published rows, as fractions of 1
EQ_TOLERANCE = Fraction(5, 100_000)


class EmptyRecords(HarnessError):
    code = 901

    def __init__(self) -> None:
        super().__init__("no records to summarize")


class MixedCell(HarnessError):
    code = 902


class LineageMismatch(HarnessError):
    code = 903

    def __init__(self, base: str, mutated: str, derived_from: Optional[str]) -> None:
        super().__init__(f"'{mutated}' derives from {derived_from or 'nothing'}, not from '{base}'")


class MalformedRow(HarnessError):
    code = 904
    exit_status = 1


def pct(value: Optional[Fraction]) -> str:
    """Percentage with two decimals, rounded half up; ``N/A`` for None."""
    if value is None:
        return "N/A"
    hundredths = math.floor(value * 10_000 + Fraction(1, 2))
    sign = "-" if hundredths < 0 else ""
    hundredths = abs(hundredths)
    return f"{sign}{hundredths // 100}.{hundredths % 100:02d}"


@dataclass(frozen=True)
class MetricsSummary:
    dataset: str
    strategy: str
    backend: str
    repeat: Optional[int]
    n: int
    correct: int
    unknown: int
    task_kind: TaskKind = TaskKind.BINARY_SATNESS
    derived_from: Optional[str] = None
    # (ground truth, final) -> count
    confusion: Tuple[Tuple[str, str, int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise EmptyRecords()
        if self.correct + self.unknown > self.n:
            raise HarnessError("correct and unknown answers exceed the record count")

    @property
    def acc(self) -> Fraction:
        return Fraction(self.correct, self.n)

    @property
    def unk(self) -> Fraction:
        return Fraction(self.unknown, self.n)

    @property
    def exe_acc(self) -> Optional[Fraction]:
        if self.unknown == self.n:
            return None
        return self.acc / (1 - self.unk)

    @property
    def repeat_label(self) -> str:
        return "all" if self.repeat is None else str(self.repeat)

    @property
    def cell(self) -> Tuple[str, str, str, str]:
        return (self.dataset, self.strategy, self.backend, self.repeat_label)

    def to_dict(self) -> Dict[str, object]:
        return {
            "dataset": self.dataset,
            "strategy": self.strategy,
            "backend": self.backend,
            "repeat": self.repeat,
            "n": self.n,
            "correct": self.correct,
            "unknown": self.unknown,
            "task_kind": self.task_kind.value,
            "derived_from": self.derived_from,
            "confusion": [list(row) for row in self.confusion],
            "accuracy": pct(self.acc),
            "unknown_rate": pct(self.unk),
            "exe_acc": pct(self.exe_acc),
            "guess_adjusted": pct(guess_adjusted_accuracy(self)),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "MetricsSummary":
        return cls(
            dataset=str(data["dataset"]),
            strategy=str(data["strategy"]),
            backend=str(data["backend"]),
            repeat=data.get("repeat"),  # type: ignore[arg-type]
            n=int(data["n"]),
            correct=int(data["correct"]),
            unknown=int(data["unknown"]),
            task_kind=TaskKind(data.get("task_kind", TaskKind.BINARY_SATNESS.value)),
            derived_from=data.get("derived_from"),  # type: ignore[arg-type]
            confusion=tuple((str(t), str(f), int(c)) for t, f, c in data.get("confusion") or []),  # type: ignore[union-attr]
        )


def summarize(records: Sequence[RunRecord], *, pool_repeats: bool = False) -> MetricsSummary:
    """Accuracy, unknown rate and execution accuracy for one cell.

    With ``pool_repeats`` the records may come from several repeats of the same
    (dataset, strategy, backend); the summary is their pooled mean.
    """
    if not records:
        raise EmptyRecords()
    keys = {(r.dataset, r.strategy, r.backend) if pool_repeats else r.cell for r in records}
    if len(keys) > 1:
        shown = ", ".join("/".join(str(p) for p in key) for key in sorted(keys, key=str))
        raise MixedCell(f"records span several configurations: {shown}")
    first = records[0]
    confusion = Counter((r.ground_truth.value, r.final.value) for r in records)
    return MetricsSummary(
        dataset=first.dataset,
        strategy=first.strategy,
        backend=first.backend,
        repeat=None if pool_repeats else first.repeat,
        n=len(records),
        correct=sum(1 for r in records if r.correct),
        unknown=sum(1 for r in records if is_undecided(r.final)),
        task_kind=first.task_kind,
        derived_from=first.derived_from,
        confusion=tuple(sorted((t, f, c) for (t, f), c in confusion.items())),
    )


def summarize_cells(records: Iterable[RunRecord]) -> List[MetricsSummary]:
    """One summary per (dataset, strategy, backend, repeat), plus a pooled one when repeats differ."""
    by_cell: Dict[Tuple[str, str, str, int], List[RunRecord]] = {}
    for record in records:
        by_cell.setdefault(record.cell, []).append(record)
    cells = [summarize(group) for _, group in sorted(by_cell.items())]

    by_config: Dict[Tuple[str, str, str], List[RunRecord]] = {}
    for (dataset, strategy, backend, _), group in sorted(by_cell.items()):
        by_config.setdefault((dataset, strategy, backend), []).extend(group)
    for key, group in sorted(by_config.items()):
        if len({r.repeat for r in group}) > 1:
            cells.append(summarize(group, pool_repeats=True))
    return cells


def guess_adjusted_accuracy(summary: MetricsSummary) -> Fraction:
    """Accuracy if every undecided answer were replaced by a uniform guess."""
    answers = 3 if summary.task_kind is TaskKind.TERNARY_ENTAILMENT else 2
    return summary.acc + summary.unk / answers


# ------------------------------------------------------------------ robustness
@dataclass(frozen=True)
class RobustnessDelta:
    dataset: str
    mutated: str
    strategy: str
    backend: str
    acc_drop: Fraction
    unk_shift: Fraction
    exe_drop: Optional[Fraction]

    def to_dict(self) -> Dict[str, object]:
        return {
            "dataset": self.dataset,
            "mutated": self.mutated,
            "strategy": self.strategy,
            "backend": self.backend,
            "acc_drop": pct(self.acc_drop / 100),
            "unk_shift": pct(self.unk_shift / 100),
            "exe_drop": pct(self.exe_drop / 100) if self.exe_drop is not None else "N/A",
        }


def robustness_delta(base: MetricsSummary, mutated: MetricsSummary) -> RobustnessDelta:
    """Signed percentage-point differences; positive drops mean the mutation hurt."""
    if mutated.derived_from != base.dataset:
        raise LineageMismatch(base.dataset, mutated.dataset, mutated.derived_from)
    exe_drop = None
    if base.exe_acc is not None and mutated.exe_acc is not None:
        exe_drop = (base.exe_acc - mutated.exe_acc) * 100
    return RobustnessDelta(
        dataset=base.dataset,
        mutated=mutated.dataset,
        strategy=mutated.strategy,
        backend=mutated.backend,
        acc_drop=(base.acc - mutated.acc) * 100,
        unk_shift=(mutated.unk - base.unk) * 100,
        exe_drop=exe_drop,
    )


def pair_deltas(baseline: Sequence[MetricsSummary], mutated: Sequence[MetricsSummary]) -> List[RobustnessDelta]:
    """Match mutated cells to baseline cells by strategy, backend and repeat."""
    index = {(c.strategy, c.backend, c.repeat): c for c in baseline}
    deltas = []
    for cell in mutated:
        base = index.get((cell.strategy, cell.backend, cell.repeat))
        if base is None:
            raise MixedCell(f"no baseline cell for {cell.strategy}/{cell.backend}/{cell.repeat_label}")
        deltas.append(robustness_delta(base, cell))
    return deltas


# ------------------------------------------------------------------ validation
@dataclass(frozen=True)
class RowCheck:
    label: str
    acc: Fraction
    unk: Fraction
    exe_acc: Optional[Fraction]
    implied: Optional[Fraction]
    ok: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "label": self.label,
            "accuracy": pct(self.acc),
            "unknown": pct(self.unk),
            "exe_acc": pct(self.exe_acc),
            "implied_exe_acc": pct(self.implied),
            "ok": self.ok,
        }


def _as_fraction(row: Dict[str, object], key: str, label: str) -> Fraction:
    try:
        return Fraction(str(row[key]).strip()) / 100
    except KeyError as exc:
        raise MalformedRow(f"{label}: missing column '{key}'") from exc
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedRow(f"{label}: '{key}' is not a percentage: {row[key]!r}") from exc


def validate_rows(rows: Iterable[Dict[str, object]], tolerance: Fraction = EQ_TOLERANCE) -> List[RowCheck]:
    """Flag (accuracy, unknown, exe_acc) percentage rows that break exe_acc = acc / (1 - unk).

    ``N/A`` is accepted for exe_acc only, and only holds on rows that are entirely unknown.
    """
    checks = []
    for i, row in enumerate(rows):
        label = str(row.get("label") or f"row {i + 1}")
        acc, unk = (_as_fraction(row, key, label) for key in ("accuracy", "unknown"))
        implied = acc / (1 - unk) if unk < 1 else None
        if str(row.get("exe_acc", "")).strip().upper() == "N/A":
            checks.append(RowCheck(label, acc, unk, None, implied, unk == 1 and acc == 0))
            continue
        exe = _as_fraction(row, "exe_acc", label)
        ok = abs(exe * (1 - unk) - acc) <= tolerance
        checks.append(RowCheck(label, acc, unk, exe, implied, ok))
    return checks


def validate_cells(cells: Iterable[MetricsSummary], tolerance: Fraction = EQ_TOLERANCE) -> List[RowCheck]:
    checks = []
    for cell in cells:
        exe = cell.exe_acc
        if exe is None:
            continue
        ok = abs(exe * (1 - cell.unk) - cell.acc) <= tolerance
        checks.append(RowCheck("/".join(cell.cell), cell.acc, cell.unk, exe, exe, ok))
    return checks
