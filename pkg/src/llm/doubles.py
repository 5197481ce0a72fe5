"""Deterministic stand-in backends.

The perfect double answers from the embedded oracle, the adversarial double
inverts it, and the mock either replays scripted texts by problem id or
answers correctly with a fixed probability. None of them touch the network,
and their output depends only on (spec, plan, seed).
"""

from __future__ import annotations

import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import HarnessError
from ..logic.core import Answer, Dialect, InconsistentPremises, TaskKind, TernaryAnswer, Verdict, negate_answer
from ..oracle.solver import OracleConfig, entailment, solve
from ..prompts.builder import PromptPlan, Role
from ..rng import make_rng, sha256_text
from ..smtlib import LexError, ParseError, SortError, parse
from .spec import BackendConfigError, BackendKind, BackendSpec, Completion, MalformedResponse


LOGGER = logging.getLogger(__name__)

_INTERMEDIATE = (
    "Variables and constraints extracted; see the list above.",
    "Both hypotheses examined step by step.",
)


def _undecided(plan: PromptPlan) -> Answer:
    return TernaryAnswer.UNCERTAIN if plan.task_kind is TaskKind.TERNARY_ENTAILMENT else Verdict.UNKNOWN


def invert(answer: Answer, rng: np.random.Generator) -> Answer:
    """A wrong answer; UNCERTAIN turns into TRUE or FALSE at random."""
    if answer is TernaryAnswer.UNCERTAIN:
        return (TernaryAnswer.TRUE, TernaryAnswer.FALSE)[int(rng.integers(2))]
    if isinstance(answer, TernaryAnswer):
        return negate_answer(answer)
    if answer is Verdict.SAT:
        return Verdict.UNSAT
    if answer is Verdict.UNSAT:
        return Verdict.SAT
    return answer


def oracle_answer(plan: PromptPlan, cfg: Optional[OracleConfig] = None) -> Tuple[Answer, str]:
    """The oracle's answer for the plan's code and a one-line justification."""
    code = plan.code()
    if code is None or plan.dialect is not Dialect.SMTLIB:
        return _undecided(plan), "The code is not SMT-LIB, so it cannot be checked directly."
    try:
        script = parse(code)
    except (LexError, ParseError, SortError) as exc:
        return _undecided(plan), f"The code does not parse ({exc.one_line()})."
    if plan.task_kind is TaskKind.TERNARY_ENTAILMENT:
        try:
            answer = entailment(script, cfg)
        except InconsistentPremises:
            return TernaryAnswer.UNCERTAIN, "The premises contradict each other."
        except HarnessError as exc:
            return TernaryAnswer.UNCERTAIN, f"The check failed ({exc.one_line()})."
        return answer, "Both the conclusion and its negation were checked against the premises."
    try:
        result = solve(script, cfg)
    except HarnessError as exc:
        return Verdict.UNKNOWN, f"The check failed ({exc.one_line()})."
    if result.verdict is Verdict.SAT and result.witness is not None:
        shown = ", ".join(f"{k} = {v}" for k, v in sorted(result.witness.bindings.items()))
        return Verdict.SAT, f"A satisfying assignment is {shown or 'the empty one'}."
    if result.verdict is Verdict.SAT:
        return Verdict.SAT, "The external solver reported the constraints satisfiable."
    if result.verdict is Verdict.UNSAT:
        return Verdict.UNSAT, "The constraints contradict each other."
    return Verdict.UNKNOWN, "The search could not settle the question."


def render(answer: Answer, detail: str) -> str:
    return f"I checked the constraints one by one.\n{detail}\nFINAL: {answer.value.upper()}"


@lru_cache(maxsize=16)
def load_mock_script(path: str) -> Dict[Tuple[str, Optional[str]], Tuple[str, ...]]:
    """JSONL lines ``{"id", "response" | "responses", "strategy"?}`` keyed by (id, strategy)."""
    source = Path(path)
    if not source.exists():
        raise BackendConfigError(f"mock script not found at {source}")
    script: Dict[Tuple[str, Optional[str]], Tuple[str, ...]] = {}
    with source.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
                responses = entry.get("responses") or [entry["response"]]
                script[(str(entry["id"]), entry.get("strategy"))] = tuple(str(r) for r in responses)
            except (ValueError, KeyError, TypeError, AttributeError) as exc:
                raise BackendConfigError(f"{source}:{line_no}: bad mock entry ({exc})") from exc
    return script


def _scripted(spec: BackendSpec, plan: PromptPlan) -> List[str]:
    script = load_mock_script(str(spec.mock_script))
    responses = script.get((plan.problem_id, plan.strategy)) or script.get((plan.problem_id, None))
    if responses is None:
        raise MalformedResponse(f"mock script has no response for '{plan.problem_id}'")
    missing = plan.expects_stages - len(responses)
    if missing > 0:
        return list(_INTERMEDIATE[:missing]) + list(responses)
    # extra scripted turns are dropped from the front; the last one is the answer
    return list(responses[-plan.expects_stages :])


def _answer_for(spec: BackendSpec, plan: PromptPlan, seed: int, cfg: Optional[OracleConfig]) -> str:
    answer, detail = oracle_answer(plan, cfg)
    if spec.kind is BackendKind.ADVERSARIAL:
        answer = invert(answer, make_rng("adversarial", spec.fingerprint, plan.problem_id, seed))
    elif spec.kind is BackendKind.MOCK:
        rng = make_rng("mock", spec.fingerprint, plan.problem_id, seed)
        if rng.random() >= float(spec.mock_accuracy):
            answer = invert(answer, rng)
    return render(answer, detail)


def complete_double(
    spec: BackendSpec,
    plan: PromptPlan,
    seed: int,
    cfg: Optional[OracleConfig] = None,
) -> Completion:
    if spec.kind is BackendKind.MOCK and spec.mock_script is not None:
        replies = _scripted(spec, plan)
    else:
        final = _answer_for(spec, plan, seed, cfg)
        replies = list(_INTERMEDIATE[: plan.expects_stages - 1]) + [final]

    transcript: List[Dict[str, str]] = [m.to_dict() for m in plan.messages]
    transcript.append({"role": Role.ASSISTANT.value, "content": replies[0]})
    for followup, reply in zip(plan.followups, replies[1:]):
        transcript.append({"role": Role.USER.value, "content": followup})
        transcript.append({"role": Role.ASSISTANT.value, "content": reply})
    return Completion(
        text=replies[-1],
        latency=0.0,
        attempt=1,
        request_id=sha256_text(f"{spec.fingerprint}:{plan.plan_hash}:{seed}")[:16],
        transcript=tuple(transcript),
    )
