from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..constants import PYTHON_KEYWORDS, SMT_RESERVED
from ..corpus.dataset import Dataset, IoError
from ..errors import HarnessError
from ..logic.core import Dialect, Problem
from ..rng import make_rng
from ..smtlib import LexError, ParseError, SortError, parse
from ..smtlib.lexer import is_simple_symbol_char


LOGGER = logging.getLogger(__name__)

MUTANT_SUFFIX = "~mut"


class MutationKind(enum.Enum):
    MISMATCHED_PARENS = "mismatched_parens"
    MISSPELLED_IDENT = "misspelled_ident"
    MIX_SMTLIB_GRAMMAR = "mix_smtlib_grammar"
    MIX_FOL_GRAMMAR = "mix_fol_grammar"


class NoMutationSite(HarnessError):
    code = 501

    def __init__(self, kind: MutationKind, problem_id: str = "") -> None:
        where = f" in '{problem_id}'" if problem_id else ""
        super().__init__(f"no site for {kind.value}{where}")
        self.kind = kind


class MutationMismatch(HarnessError):
    code = 502


@dataclass(frozen=True)
class MutationRecord:
    original_id: str
    kind: MutationKind
    site: Tuple[int, int]
    offset: int
    original_fragment: str
    mutated_fragment: str
    seed: int

    def apply(self, code: str) -> str:
        end = self.offset + len(self.original_fragment)
        if code[self.offset : end] != self.original_fragment:
            raise MutationMismatch(
                f"'{self.original_id}': expected {self.original_fragment!r} at offset {self.offset}"
            )
        return code[: self.offset] + self.mutated_fragment + code[end:]

    def to_dict(self) -> Dict[str, object]:
        return {
            "original_id": self.original_id,
            "kind": self.kind.value,
            "site": list(self.site),
            "offset": self.offset,
            "original_fragment": self.original_fragment,
            "mutated_fragment": self.mutated_fragment,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "MutationRecord":
        line, column = data["site"]
        return cls(
            original_id=str(data["original_id"]),
            kind=MutationKind(data["kind"]),
            site=(int(line), int(column)),
            offset=int(data["offset"]),
            original_fragment=str(data["original_fragment"]),
            mutated_fragment=str(data["mutated_fragment"]),
            seed=int(data["seed"]),
        )


# ------------------------------------------------------------------ scanning
def code_mask(code: str, dialect: Dialect) -> List[bool]:
    """True for characters outside comments, string literals and quoted symbols."""
    mask = [True] * len(code)
    if dialect is Dialect.NL:
        return mask
    i = 0
    n = len(code)
    while i < n:
        ch = code[i]
        if dialect is Dialect.SMTLIB:
            if ch == ";":
                end = code.find("\n", i)
                end = n if end < 0 else end
            elif ch == '"':
                end = i + 1
                while end < n:
                    if code[end] == '"':
                        if end + 1 < n and code[end + 1] == '"':
                            end += 2
                            continue
                        break
                    end += 1
                end = min(end + 1, n)
            elif ch == "|":
                end = code.find("|", i + 1)
                end = n if end < 0 else end + 1
            else:
                i += 1
                continue
        else:
            if ch == "#":
                end = code.find("\n", i)
                end = n if end < 0 else end
            elif ch in "'\"":
                quote = code[i : i + 3] if code[i : i + 3] in ("'''", '"""') else ch
                end = i + len(quote)
                while end < n and code[end : end + len(quote)] != quote:
                    end += 2 if code[end] == "\\" else 1
                end = min(end + len(quote), n)
            else:
                i += 1
                continue
        for j in range(i, end):
            mask[j] = False
        i = end
    return mask


_PY_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_DECLARING = {"declare-const", "declare-fun", "define-fun"}
_NO_PARAMS = re.compile(r"\(\s*\)")


@dataclass(frozen=True)
class _Ident:
    offset: int
    text: str


def _smt_symbols(code: str, mask: Sequence[bool]) -> List[_Ident]:
    found: List[_Ident] = []
    i = 0
    while i < len(code):
        if not (mask[i] and is_simple_symbol_char(code[i])):
            i += 1
            continue
        start = i
        while i < len(code) and mask[i] and is_simple_symbol_char(code[i]):
            i += 1
        text = code[start:i]
        prev = code[start - 1] if start else ""
        if prev not in (":", "#") and not text[0].isdigit():
            found.append(_Ident(start, text))
    return found


def _py_identifiers(code: str, mask: Sequence[bool]) -> List[_Ident]:
    found: List[_Ident] = []
    for match in _PY_IDENT.finditer(code):
        start = match.start()
        prev = code[start - 1] if start else ""
        if not mask[start] or prev.isalnum() or prev in "_.":
            continue
        if match.group() in PYTHON_KEYWORDS:
            continue
        found.append(_Ident(start, match.group()))
    return found


def _declared(code: str, symbols: Sequence[_Ident]) -> Tuple[Dict[str, str], set]:
    """Nullary declared names with the first sort word after them, and the offsets of the declaring occurrences."""
    sorts: Dict[str, str] = {}
    declaring_offsets = set()
    for k, sym in enumerate(symbols[:-1]):
        if sym.text in _DECLARING:
            name = symbols[k + 1]
            declaring_offsets.add(name.offset)
            rest = code[name.offset + len(name.text) :].lstrip()
            if sym.text != "declare-const" and not _NO_PARAMS.match(rest):
                continue
            sort = symbols[k + 2].text if k + 2 < len(symbols) else "Int"
            sorts[name.text] = sort if sort in ("Bool", "Int") else "Int"
    return sorts, declaring_offsets


_BINDER = re.compile(r"(?:\(\s*\(|\)\s*\()\s*([^\s()]+)\s+\S")


def _bound_names(code: str, mask: Sequence[bool]) -> set:
    """Names that some let, quantifier or parameter list rebinds."""
    return {m.group(1) for m in _BINDER.finditer(code) if mask[m.start(1)]}


def _line_starts(code: str, mask: Sequence[bool]) -> List[int]:
    starts = [0] + [m.end() for m in re.finditer("\n", code) if m.end() < len(code)]
    return [s for s in starts if s < len(code) and mask[s]]


def _position(code: str, offset: int) -> Tuple[int, int]:
    line = code.count("\n", 0, offset) + 1
    column = offset - (code.rfind("\n", 0, offset) + 1) + 1
    return line, column


def _pick(rng: np.random.Generator, items: Sequence):
    return items[int(rng.integers(len(items)))]


# ------------------------------------------------------------------ misspelling
_CONFUSABLE = {
    "1": "l", "l": "1", "0": "o", "o": "0", "O": "0", "I": "l", "i": "l",
    "5": "s", "s": "5", "2": "z", "z": "2", "8": "b", "b": "8",
    "e": "c", "c": "e", "m": "n", "n": "m", "u": "v", "v": "u",
}


def _shift(ch: str) -> str:
    if ch.isdigit():
        return str((int(ch) + 1) % 10)
    base = ord("a") if ch.islower() else ord("A")
    return chr(base + (ord(ch) - base + 1) % 26)


def _replacements(ch: str, leading: bool) -> List[str]:
    """Confusable look-alike first, then the following characters of the same class."""
    options = [_CONFUSABLE[ch]] if ch in _CONFUSABLE else []
    shifted = ch
    for _ in range(25):
        shifted = _shift(shifted)
        if shifted != ch:
            options.append(shifted)
    return [c for c in options if not (leading and c.isdigit())]


def _misspell(rng: np.random.Generator, name: str, taken: set) -> Optional[str]:
    positions = [i for i, c in enumerate(name) if c.isascii() and c.isalnum()]
    preferred = [i for i in positions if name[i] in _CONFUSABLE]
    if not positions:
        return None
    head = preferred or positions
    start = int(rng.integers(len(head)))
    ordered = head[start:] + head[:start] + [i for i in positions if i not in head]
    for index in ordered:
        for new in _replacements(name[index], index == 0):
            candidate = name[:index] + new + name[index + 1 :]
            if candidate not in taken:
                return candidate
    return None


# ------------------------------------------------------------------ edits
@dataclass(frozen=True)
class _Edit:
    offset: int
    original: str
    mutated: str


def _paren_edit(code: str, mask: Sequence[bool], rng: np.random.Generator) -> Optional[_Edit]:
    sites = [i for i, ch in enumerate(code) if ch in "()" and mask[i]]
    if not sites:
        return None
    offset = _pick(rng, sites)
    paren = code[offset]
    if rng.integers(2):
        return _Edit(offset, paren, paren + paren)
    return _Edit(offset, paren, "")


def _identifiers(code: str, mask: Sequence[bool], dialect: Dialect) -> Tuple[List[_Ident], List[_Ident], Dict[str, str]]:
    """(all names, mutable use sites, declared sorts) for the dialect."""
    if dialect is Dialect.SMTLIB:
        symbols = _smt_symbols(code, mask)
        sorts, declaring = _declared(code, symbols)
        rebound = _bound_names(code, mask)
        uses = [s for s in symbols if s.text in sorts and s.text not in rebound and s.offset not in declaring]
        return symbols, uses, sorts
    names = _py_identifiers(code, mask)
    return names, names, {}


def _misspell_edit(code: str, mask: Sequence[bool], dialect: Dialect, rng: np.random.Generator) -> Optional[_Edit]:
    names, sites, _ = _identifiers(code, mask, dialect)
    if not sites:
        return None
    taken = {n.text for n in names} | SMT_RESERVED | PYTHON_KEYWORDS
    start = int(rng.integers(len(sites)))
    for site in sites[start:] + sites[:start]:
        candidate = _misspell(rng, site.text, taken)
        if candidate is not None:
            return _Edit(site.offset, site.text, candidate)
    return None


def _grammar_edit(code: str, mask: Sequence[bool], dialect: Dialect, rng: np.random.Generator) -> Optional[_Edit]:
    starts = _line_starts(code, mask)
    if not starts:
        return None
    offset = _pick(rng, starts)
    names, _, sorts = _identifiers(code, mask, dialect)
    if dialect is Dialect.SMTLIB:
        if sorts:
            name = _pick(rng, sorted(sorts))
            fragment = f"{name} = {sorts[name]}('{name}')\n"
        else:
            fragment = "x = Int('x')\n"
    else:
        name = _pick(rng, sorted({n.text for n in names})) if names else "f"
        fragment = f"(declare-fun {name} () Bool)\n"
    return _Edit(offset, "", fragment)


def _quantifier_edit(code: str, mask: Sequence[bool], dialect: Dialect, rng: np.random.Generator) -> Optional[_Edit]:
    sites = [i + 1 for i, ch in enumerate(code) if ch == "(" and mask[i]]
    sites = sites or _line_starts(code, mask)
    if not sites:
        return None
    offset = _pick(rng, sites)
    _, uses, _ = _identifiers(code, mask, dialect)
    variable = _pick(rng, [u.text for u in uses]) if uses else "x"
    symbol = "∀" if rng.integers(2) else "∃"
    return _Edit(offset, "", f"{symbol}{variable}. ")


# ------------------------------------------------------------------ public
def mutate(problem: Problem, kind: MutationKind, seed: int) -> Tuple[Problem, MutationRecord]:
    """Inject one syntax error of ``kind``; the label is carried over unchanged."""
    code = problem.code
    if not code:
        raise NoMutationSite(kind, problem.id)
    mask = code_mask(code, problem.dialect)
    rng = make_rng("mutate", kind.value, seed, problem.id)
    if kind is MutationKind.MISMATCHED_PARENS:
        edit = _paren_edit(code, mask, rng)
    elif kind is MutationKind.MISSPELLED_IDENT:
        edit = _misspell_edit(code, mask, problem.dialect, rng)
    elif kind is MutationKind.MIX_SMTLIB_GRAMMAR:
        edit = _grammar_edit(code, mask, problem.dialect, rng)
    else:
        edit = _quantifier_edit(code, mask, problem.dialect, rng)
    if edit is None:
        raise NoMutationSite(kind, problem.id)

    record = MutationRecord(
        original_id=problem.id,
        kind=kind,
        site=_position(code, edit.offset),
        offset=edit.offset,
        original_fragment=edit.original,
        mutated_fragment=edit.mutated,
        seed=seed,
    )
    mutant = replace(problem, id=problem.id + MUTANT_SUFFIX, code=record.apply(code))
    return mutant, record


def original_id(problem_id: str) -> str:
    if problem_id.endswith(MUTANT_SUFFIX):
        return problem_id[: -len(MUTANT_SUFFIX)]
    return problem_id


def verify_broken(problem: Problem) -> bool:
    if problem.dialect is not Dialect.SMTLIB:
        LOGGER.warning(
            "Cannot check '%s' (%s): no parser for this dialect, assuming the mutation breaks it",
            problem.id,
            problem.dialect.value,
        )
        return True
    try:
        parse(problem.code)
    except (LexError, ParseError, SortError):
        return True
    return False


def mutate_dataset(
    dataset: Dataset,
    kind: MutationKind,
    seed: int,
    sample: Optional[int] = None,
) -> Tuple[Dataset, List[MutationRecord]]:
    """Mutate a seeded sample of problems (all when ``sample`` is None), skipping those without a site."""
    rng = make_rng("mutate-sample", kind.value, seed, dataset.name)
    order = [int(i) for i in rng.permutation(len(dataset))]
    target = len(dataset) if sample is None else min(sample, len(dataset))
    chosen: Dict[int, Tuple[Problem, MutationRecord]] = {}
    for index in order:
        if len(chosen) >= target:
            break
        try:
            chosen[index] = mutate(dataset.problems[index], kind, seed)
        except NoMutationSite as exc:
            LOGGER.debug("Skipping: %s", exc.message)
    if len(chosen) < target:
        LOGGER.warning("Only %d of %d requested problems had a %s site", len(chosen), target, kind.value)
    picked = [chosen[i] for i in sorted(chosen)]
    derived = Dataset(
        name=f"{dataset.name}~{kind.value}",
        task_kind=dataset.task_kind,
        problems=tuple(p for p, _ in picked),
        version=dataset.version,
        derived_from=dataset.name,
    )
    return derived, [r for _, r in picked]


def sidecar_path(dataset_path: Union[str, Path]) -> Path:
    return Path(dataset_path).with_suffix(".mutations.jsonl")


def write_records(records: Sequence[MutationRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(json.dumps(r.to_dict(), ensure_ascii=False) + "\n" for r in records), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write mutation records {path}: {exc}") from exc
    return path


def load_records(path: Union[str, Path]) -> List[MutationRecord]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read mutation records {path}: {exc}") from exc
    return [MutationRecord.from_dict(json.loads(line)) for line in lines if line.strip()]
