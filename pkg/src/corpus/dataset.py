from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

from ..errors import HarnessError
from ..logic.core import Answer, Dialect, Problem, TaskKind, count_lines, estimate_tokens, parse_answer


LOGGER = logging.getLogger(__name__)

FORMAT_VERSION = 1


class IoError(HarnessError):
    code = 400


class SchemaError(HarnessError):
    code = 401

    def __init__(self, line: int, field_name: str, detail: str = "") -> None:
        message = f"line {line}: invalid field '{field_name}'"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)
        self.line = line
        self.field = field_name


class DuplicateId(HarnessError):
    code = 402

    def __init__(self, problem_id: str) -> None:
        super().__init__(f"duplicate problem id '{problem_id}'")
        self.problem_id = problem_id


class EmptyDataset(HarnessError):
    code = 403

    def __init__(self, name: str) -> None:
        super().__init__(f"dataset '{name}' has no problems")


@dataclass(frozen=True)
class Dataset:
    name: str
    task_kind: TaskKind
    problems: Tuple[Problem, ...] = ()
    version: int = FORMAT_VERSION
    derived_from: Optional[str] = None

    def __post_init__(self) -> None:
        seen = set()
        for problem in self.problems:
            if problem.id in seen:
                raise DuplicateId(problem.id)
            seen.add(problem.id)
            if problem.task_kind is not self.task_kind:
                raise HarnessError(
                    f"problem '{problem.id}' is {problem.task_kind.value}, dataset is {self.task_kind.value}"
                )

    def __len__(self) -> int:
        return len(self.problems)

    def __iter__(self) -> Iterator[Problem]:
        return iter(self.problems)

    def by_id(self) -> Dict[str, Problem]:
        return {p.id: p for p in self.problems}

    def with_problems(self, problems, **changes) -> "Dataset":
        return replace(self, problems=tuple(problems), **changes)

    def header(self) -> Dict[str, object]:
        header: Dict[str, object] = {
            "name": self.name,
            "task_kind": self.task_kind.value,
            "version": self.version,
        }
        if self.derived_from is not None:
            header["derived_from"] = self.derived_from
        return header


@dataclass(frozen=True)
class DatasetStats:
    name: str
    count: int
    mean_loc: Fraction
    by_truth: Dict[str, int] = field(default_factory=dict)
    by_dialect: Dict[str, int] = field(default_factory=dict)
    max_loc: int = 0
    min_loc: int = 0

    @property
    def mean_loc_display(self) -> str:
        return f"{float(self.mean_loc):.2f}"

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "count": self.count,
            "mean_loc": self.mean_loc_display,
            "by_truth": dict(sorted(self.by_truth.items())),
            "by_dialect": dict(sorted(self.by_dialect.items())),
            "max_loc": self.max_loc,
            "min_loc": self.min_loc,
        }


# ------------------------------------------------------------------ reading
def _is_header(obj: Dict[str, object]) -> bool:
    return "task_kind" in obj and "id" not in obj and "code" not in obj


def _require_str(obj: Dict[str, object], key: str, line: int, *, allow_empty: bool = False) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or (not allow_empty and not value):
        raise SchemaError(line, key, "expected a non-empty string" if not allow_empty else "expected a string")
    return value


def _parse_record(obj: Dict[str, object], line: int) -> Problem:
    problem_id = _require_str(obj, "id", line)
    try:
        dialect = Dialect(obj.get("dialect"))
    except ValueError as exc:
        raise SchemaError(line, "dialect", f"unknown dialect {obj.get('dialect')!r}") from exc
    code = _require_str(obj, "code", line, allow_empty=True)

    label = obj.get("ground_truth")
    if not isinstance(label, str):
        raise SchemaError(line, "ground_truth", "expected a label string")
    try:
        truth: Answer = parse_answer(label)
    except ValueError as exc:
        raise SchemaError(line, "ground_truth", f"unknown label {label!r}") from exc

    nl_context = obj.get("nl_context")
    if nl_context is not None and not isinstance(nl_context, str):
        raise SchemaError(line, "nl_context", "expected a string or null")
    source = obj.get("source", "")
    if not isinstance(source, str):
        raise SchemaError(line, "source", "expected a string")
    category = obj.get("category")
    if category is not None and not isinstance(category, str):
        raise SchemaError(line, "category", "expected a string")

    problem = Problem(
        id=problem_id,
        dialect=dialect,
        code=code,
        ground_truth=truth,
        source=source,
        nl_context=nl_context,
        category=category,
    )
    stored_loc = obj.get("loc")
    if stored_loc is not None and stored_loc != problem.loc:
        LOGGER.warning("line %d: stored loc %s for '%s' recomputed as %d", line, stored_loc, problem_id, problem.loc)
    return problem


def loads(text: str, name: str = "dataset") -> Dataset:
    header: Optional[Dict[str, object]] = None
    problems: List[Problem] = []
    seen: Dict[str, int] = {}
    kind: Optional[TaskKind] = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaError(line_no, "json", exc.msg) from exc
        if not isinstance(obj, dict):
            raise SchemaError(line_no, "record", "expected a JSON object")

        if header is None and not problems and _is_header(obj):
            try:
                kind = TaskKind(obj["task_kind"])
            except ValueError as exc:
                raise SchemaError(line_no, "task_kind", f"unknown task kind {obj['task_kind']!r}") from exc
            version = obj.get("version", FORMAT_VERSION)
            if not isinstance(version, int) or isinstance(version, bool):
                raise SchemaError(line_no, "version", "expected an integer")
            header = obj
            continue

        problem = _parse_record(obj, line_no)
        if kind is None:
            kind = problem.task_kind
        elif problem.task_kind is not kind:
            raise SchemaError(
                line_no,
                "ground_truth",
                f"'{problem.ground_truth.value}' is not a {kind.value} label",
            )
        if problem.id in seen:
            raise DuplicateId(problem.id)
        seen[problem.id] = line_no
        problems.append(problem)

    header = header or {}
    derived_from = header.get("derived_from")
    return Dataset(
        name=str(header.get("name") or name),
        task_kind=kind or TaskKind.BINARY_SATNESS,
        problems=tuple(problems),
        version=int(header.get("version", FORMAT_VERSION)),
        derived_from=str(derived_from) if derived_from is not None else None,
    )


def load(path: Union[str, Path]) -> Dataset:
    """Read a JSONL dataset; the optional first line is a header object."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read dataset {path}: {exc}") from exc
    dataset = loads(text, name=path.stem)
    LOGGER.info("Loaded dataset '%s' with %d problems from %s", dataset.name, len(dataset), path)
    return dataset


# ------------------------------------------------------------------ writing
def dumps(dataset: Dataset) -> str:
    lines = [json.dumps(dataset.header(), ensure_ascii=False)]
    lines.extend(json.dumps(p.to_record(), ensure_ascii=False) for p in dataset.problems)
    return "\n".join(lines) + "\n"


def write(dataset: Dataset, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(dataset), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write dataset {path}: {exc}") from exc
    LOGGER.info("Wrote %d problems to %s", len(dataset), path)
    return path


# ------------------------------------------------------------------ stats / filter
def stats(dataset: Dataset) -> DatasetStats:
    if not dataset.problems:
        raise EmptyDataset(dataset.name)
    locs = [p.loc for p in dataset.problems]
    return DatasetStats(
        name=dataset.name,
        count=len(locs),
        mean_loc=Fraction(sum(locs), len(locs)),
        by_truth=dict(Counter(p.ground_truth.value for p in dataset.problems)),
        by_dialect=dict(Counter(p.dialect.value for p in dataset.problems)),
        max_loc=max(locs),
        min_loc=min(locs),
    )


def _max_line_tokens(code: str) -> int:
    return max((estimate_tokens(line) for line in code.splitlines()), default=0)


def filter_dataset(
    dataset: Dataset,
    *,
    max_loc: Optional[int] = None,
    max_tokens_per_line: Optional[int] = None,
    max_tokens: Optional[int] = None,
) -> Dataset:
    """Drop problems over any given size threshold, keeping order."""
    kept: List[Problem] = []
    for problem in dataset.problems:
        if max_loc is not None and count_lines(problem.code) > max_loc:
            continue
        if max_tokens_per_line is not None and _max_line_tokens(problem.code) > max_tokens_per_line:
            continue
        if max_tokens is not None and estimate_tokens(problem.code) > max_tokens:
            continue
        kept.append(problem)
    dropped = len(dataset) - len(kept)
    if dropped:
        LOGGER.info("Filter dropped %d of %d problems from '%s'", dropped, len(dataset), dataset.name)
    return dataset.with_problems(kept)
