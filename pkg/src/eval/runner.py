"""Batch evaluation of one (dataset, strategy, backend) cell.

Every problem is prompted once, or ``samples_per_order`` times per DCoL
ordering under self-consistency, on a bounded thread pool. Records come back
in dataset order whatever order the calls finish in, and are written by a
single writer once the pool drains. A failing sample becomes an UNKNOWN vote
with its error kept on the record; only dataset or probe failures abort a run.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..corpus.dataset import Dataset, IoError, load
from ..errors import HarnessError
from ..llm.agents import ChatClient
from ..llm.backend import complete, probe
from ..llm.cache import TranscriptCache
from ..logic.core import Answer, Dialect, Problem, TaskKind, TernaryAnswer, Verdict, parse_answer
from ..prompts.builder import build
from ..prompts.strategy import NotDCoL, Strategy, StrategyTag
from ..rng import seed_value
from ..smtlib import LexError, ParseError, SortError, extract_signature, parse
from .config import RunConfig, with_bidirectional_sc
from .verdict import ConfidenceSource, ParsedVerdict, parse_response
from .vote import vote


LOGGER = logging.getLogger(__name__)

RECORDS_FILE = "records.jsonl"
META_FILE = "run_meta.json"


@dataclass(frozen=True)
class Sample:
    order: Optional[str]
    index: int
    seed: int
    plan_hash: str
    text: str
    parsed: ParsedVerdict
    latency: float = 0.0
    cache_hit: bool = False
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "order": self.order,
            "index": self.index,
            "seed": self.seed,
            "plan_hash": self.plan_hash,
            "text": self.text,
            "parsed": self.parsed.to_dict(),
            "latency": self.latency,
            "cache_hit": self.cache_hit,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "Sample":
        return cls(
            order=data.get("order"),  # type: ignore[arg-type]
            index=int(data["index"]),
            seed=int(data["seed"]),
            plan_hash=str(data.get("plan_hash", "")),
            text=str(data.get("text", "")),
            parsed=ParsedVerdict.from_dict(data["parsed"]),  # type: ignore[arg-type]
            latency=float(data.get("latency", 0.0)),
            cache_hit=bool(data.get("cache_hit", False)),
            error=data.get("error"),  # type: ignore[arg-type]
        )


@dataclass(frozen=True)
class RunRecord:
    problem_id: str
    dataset: str
    derived_from: Optional[str]
    strategy: str
    backend: str
    backend_fingerprint: str
    repeat: int
    samples: Tuple[Sample, ...]
    votes: Optional[Tuple[Answer, ...]]
    sub_verdicts: Optional[Dict[str, Answer]]
    final: Answer
    ground_truth: Answer
    correct: bool
    template_hash: str = ""
    error: Optional[str] = None

    @property
    def text(self) -> str:
        return self.samples[0].text if self.samples else ""

    @property
    def parsed(self) -> Optional[ParsedVerdict]:
        return self.samples[0].parsed if self.samples else None

    @property
    def plan_hash(self) -> str:
        return self.samples[0].plan_hash if self.samples else ""

    @property
    def latency(self) -> float:
        return sum(s.latency for s in self.samples)

    @property
    def cache_hit(self) -> bool:
        return bool(self.samples) and all(s.cache_hit for s in self.samples)

    @property
    def task_kind(self) -> TaskKind:
        return TaskKind.TERNARY_ENTAILMENT if isinstance(self.ground_truth, TernaryAnswer) else TaskKind.BINARY_SATNESS

    @property
    def cell(self) -> Tuple[str, str, str, int]:
        return (self.dataset, self.strategy, self.backend, self.repeat)

    def to_dict(self) -> Dict[str, object]:
        return {
            "problem_id": self.problem_id,
            "dataset": self.dataset,
            "derived_from": self.derived_from,
            "strategy": self.strategy,
            "backend": self.backend,
            "backend_fingerprint": self.backend_fingerprint,
            "repeat": self.repeat,
            "final": self.final.value,
            "ground_truth": self.ground_truth.value,
            "correct": self.correct,
            "votes": [v.value for v in self.votes] if self.votes is not None else None,
            "sub_verdicts": {k: v.value for k, v in self.sub_verdicts.items()} if self.sub_verdicts is not None else None,
            "template_hash": self.template_hash,
            "error": self.error,
            "samples": [s.to_dict() for s in self.samples],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "RunRecord":
        votes = data.get("votes")
        subs = data.get("sub_verdicts")
        return cls(
            problem_id=str(data["problem_id"]),
            dataset=str(data["dataset"]),
            derived_from=data.get("derived_from"),  # type: ignore[arg-type]
            strategy=str(data["strategy"]),
            backend=str(data["backend"]),
            backend_fingerprint=str(data.get("backend_fingerprint", "")),
            repeat=int(data.get("repeat", 0)),
            samples=tuple(Sample.from_dict(s) for s in data.get("samples") or []),  # type: ignore[union-attr]
            votes=tuple(parse_answer(v) for v in votes) if isinstance(votes, list) else None,
            sub_verdicts={k: parse_answer(v) for k, v in subs.items()} if isinstance(subs, dict) else None,
            final=parse_answer(str(data["final"])),
            ground_truth=parse_answer(str(data["ground_truth"])),
            correct=bool(data["correct"]),
            template_hash=str(data.get("template_hash", "")),
            error=data.get("error"),  # type: ignore[arg-type]
        )


# ------------------------------------------------------------------ records io
def write_records(records: Iterable[RunRecord], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
    return path


def load_records(path: Path) -> List[RunRecord]:
    """Read a records.jsonl file (or the one inside a run directory)."""
    source = Path(path)
    if source.is_dir():
        source = source / RECORDS_FILE
    try:
        with source.open("r", encoding="utf-8") as fh:
            return [RunRecord.from_dict(json.loads(line)) for line in fh if line.strip()]
    except OSError as exc:
        raise IoError(f"cannot read records {source}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise IoError(f"malformed records file {source}: {exc}") from exc


# ------------------------------------------------------------------ evaluation
def _undecided(problem: Problem) -> Answer:
    return TernaryAnswer.UNCERTAIN if problem.task_kind is TaskKind.TERNARY_ENTAILMENT else Verdict.UNKNOWN


def _signature(problem: Problem):
    if problem.dialect is not Dialect.SMTLIB:
        return None
    try:
        return extract_signature(parse(problem.code))
    except (LexError, ParseError, SortError):
        return None


class Runner:
    """Holds the shared client, cache and pool settings for one run."""

    def __init__(
        self,
        cfg: RunConfig,
        *,
        client: Optional[ChatClient] = None,
        cache: Optional[TranscriptCache] = None,
    ) -> None:
        self.cfg = cfg
        if cfg.backend.is_double:
            self.client = None
            self.cache = None
        else:
            self.client = client or ChatClient(cfg.backend)
            self.cache = cache if cache is not None else TranscriptCache.from_env()

    def _strategies(self) -> List[Tuple[Optional[str], Strategy, int]]:
        sc = self.cfg.sc
        if sc is None:
            return [(None, self.cfg.strategy, 1)]
        if not sc.orders:
            return [(None, self.cfg.strategy, sc.samples_per_order)]
        return [
            (order.value, replace(self.cfg.strategy, dcol_order=order), sc.samples_per_order)
            for order in sc.orders
        ]

    def _sample(self, problem: Problem, strategy: Strategy, order: Optional[str], index: int, repeat: int, sig) -> Tuple[Sample, str]:
        seed = seed_value(self.cfg.seed, problem.id, order or "-", index, repeat)
        plan = build(problem, strategy, sig)
        try:
            completion = complete(self.cfg.backend, plan, seed, client=self.client, cache=self.cache)
        except Exception as exc:
            detail = exc.one_line() if isinstance(exc, HarnessError) else f"{type(exc).__name__}: {exc}"
            LOGGER.warning("Sample %s/%s/%d failed, scored %s: %s", problem.id, order or "-", index, _undecided(problem).value, detail)
            parsed = ParsedVerdict(_undecided(problem), ConfidenceSource.NONE)
            return Sample(order, index, seed, plan.plan_hash, "", parsed, error=detail), plan.template_hash
        parsed = parse_response(completion.text, problem.task_kind)
        sample = Sample(order, index, seed, plan.plan_hash, completion.text, parsed, completion.latency, completion.cache_hit)
        return sample, plan.template_hash

    def evaluate(self, dataset: Dataset, problem: Problem, repeat: int) -> RunRecord:
        cfg = self.cfg
        base = dict(
            problem_id=problem.id,
            dataset=dataset.name,
            derived_from=dataset.derived_from,
            strategy=cfg.strategy_label,
            backend=cfg.backend.label,
            backend_fingerprint=cfg.backend.fingerprint,
            repeat=repeat,
            ground_truth=problem.ground_truth,
        )
        sig = _signature(problem) if cfg.prefill_signature and cfg.strategy.tag is StrategyTag.DCOL else None
        samples: List[Sample] = []
        template = ""
        try:
            for order, strategy, count in self._strategies():
                for index in range(count):
                    sample, template = self._sample(problem, strategy, order, index, repeat, sig)
                    samples.append(sample)
        except HarnessError as exc:
            # prompt construction failed: no request was made for this problem
            LOGGER.warning("Problem %s skipped: %s", problem.id, exc.one_line())
            final = _undecided(problem)
            return RunRecord(samples=(), votes=None, sub_verdicts=None, final=final, correct=False, error=exc.one_line(), **base)

        errors = [s.error for s in samples if s.error]
        if cfg.sc is None:
            votes = None
            subs = None
            final = samples[0].parsed.verdict
        else:
            votes = tuple(s.parsed.verdict for s in samples)
            final = vote(votes)
            subs = None
            if cfg.sc.orders:
                subs = {o.value: vote([s.parsed.verdict for s in samples if s.order == o.value]) for o in cfg.sc.orders}
        return RunRecord(
            samples=tuple(samples),
            votes=votes,
            sub_verdicts=subs,
            final=final,
            correct=final == problem.ground_truth,
            template_hash=template,
            error=errors[0] if errors else None,
            **base,
        )


def run(cfg: RunConfig, *, client: Optional[ChatClient] = None, cache: Optional[TranscriptCache] = None) -> List[RunRecord]:
    """Evaluate every problem (times ``repeats``) and persist records plus run metadata."""
    started = time.monotonic()
    dataset = load(cfg.dataset)
    LOGGER.info("Loaded %s: %d problems", dataset.name, len(dataset))
    runner = Runner(cfg, client=client, cache=cache)
    probe(cfg.backend, client=runner.client)

    jobs: Sequence[Tuple[Problem, int]] = [(p, r) for r in range(cfg.repeats) for p in dataset]
    with ThreadPoolExecutor(max_workers=cfg.parallelism, thread_name_prefix="eval") as pool:
        records = list(pool.map(lambda job: runner.evaluate(dataset, *job), jobs))

    out = Path(cfg.output_dir)
    write_records(records, out / RECORDS_FILE)
    correct = sum(1 for r in records if r.correct)
    meta = {
        "config": cfg.to_dict(),
        "dataset": dataset.header(),
        "template_hashes": sorted({r.template_hash for r in records if r.template_hash}),
        "backend_fingerprint": cfg.backend.fingerprint,
        "records": len(records),
        "correct": correct,
        "errors": sum(1 for r in records if r.error),
        "wall_time": round(time.monotonic() - started, 3),
    }
    with (out / META_FILE).open("w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, ensure_ascii=False)
    LOGGER.info("Run finished: %d/%d correct, records in %s", correct, len(records), out / RECORDS_FILE)
    return records


def bisc_run(
    cfg: RunConfig,
    *,
    samples_per_order: Optional[int] = None,
    client: Optional[ChatClient] = None,
    cache: Optional[TranscriptCache] = None,
) -> List[RunRecord]:
    """Self-consistency pooled over SAT-first and UNSAT-first DCoL samples."""
    if cfg.strategy.tag is not StrategyTag.DCOL:
        raise NotDCoL(cfg.strategy.tag)
    return run(with_bidirectional_sc(cfg, samples_per_order), client=client, cache=cache)
