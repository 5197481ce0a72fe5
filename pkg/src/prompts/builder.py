from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from ..errors import HarnessError
from ..logic.core import Dialect, Problem, TaskKind, estimate_tokens
from ..rng import sha256_text
from ..settings import PROMPT, TEMPLATE_DIR
from ..smtlib.signature import Signature
from .strategy import DColMode, DColOrder, Strategy, StrategyTag


class ContextBudgetExceeded(HarnessError):
    code = 601

    def __init__(self, token_estimate: int, budget: int) -> None:
        super().__init__(f"prompt needs about {token_estimate} tokens, budget is {budget}")
        self.token_estimate = token_estimate
        self.budget = budget


class MissingContext(HarnessError):
    code = 604

    def __init__(self, problem_id: str) -> None:
        super().__init__(f"problem '{problem_id}' has no natural-language context")


class Role(enum.Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class Message:
    role: Role
    content: str

    def to_dict(self) -> Dict[str, str]:
        return {"role": self.role.value, "content": self.content}


@dataclass(frozen=True)
class PromptPlan:
    """Messages for the first turn plus, when staged, the user turns that follow each reply."""

    problem_id: str
    task_kind: TaskKind
    dialect: Dialect
    strategy: str
    messages: Tuple[Message, ...]
    followups: Tuple[str, ...] = ()
    template_hash: str = ""

    @property
    def expects_stages(self) -> int:
        return 1 + len(self.followups)

    @property
    def user_texts(self) -> Tuple[str, ...]:
        return tuple(m.content for m in self.messages if m.role is Role.USER) + self.followups

    @property
    def plan_hash(self) -> str:
        payload = {
            "messages": [m.to_dict() for m in self.messages],
            "followups": list(self.followups),
        }
        return sha256_text(json.dumps(payload, sort_keys=True, ensure_ascii=False))

    def token_estimate(self, chars_per_token: int = PROMPT.chars_per_token) -> int:
        text = "".join(m.content for m in self.messages) + "".join(self.followups)
        return estimate_tokens(text, chars_per_token)

    def code(self) -> Optional[str]:
        """The fenced code block of the first user turn."""
        for message in self.messages:
            if message.role is Role.USER:
                match = _FENCE.search(message.content)
                if match:
                    return match.group(1)
        return None


_FENCE = re.compile(r"```[A-Za-z0-9_-]*\n(.*?)\n```", re.S)

_FENCE_LANG = {Dialect.SMTLIB: "smt2", Dialect.Z3PY_TEXT: "python", Dialect.NL: "text"}
_PREMISE_UNIT = {Dialect.SMTLIB: "assertion", Dialect.Z3PY_TEXT: "constraint", Dialect.NL: "statement"}

_SINGLE_TEMPLATES = {
    StrategyTag.SD: "sd.j2",
    StrategyTag.COT: "cot.j2",
    StrategyTag.PS: "ps.j2",
    StrategyTag.COSM: "cosm.j2",
    StrategyTag.DCOL: "dcol.j2",
}
_STAGED_TEMPLATES = ("dcol_extract.j2", "dcol_chains.j2", "dcol_combine.j2")
_SHARED_TEMPLATES = ("_blocks.j2", "system.j2")


@lru_cache(maxsize=1)
def environment() -> Environment:
    return Environment(
        loader=FileSystemLoader(str(TEMPLATE_DIR)),
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=False,
        autoescape=False,
    )


def template_hash(names: Sequence[str]) -> str:
    env = environment()
    parts: List[str] = []
    for name in sorted(set(names) | set(_SHARED_TEMPLATES)):
        source, _, _ = env.loader.get_source(env, name)
        parts.append(f"{name}\n{source}")
    return sha256_text("\x1e".join(parts))


def _context(problem: Problem, strategy: Strategy, sig: Optional[Signature]) -> Dict[str, object]:
    ternary = problem.task_kind is TaskKind.TERNARY_ENTAILMENT
    if ternary:
        hypotheses = ["TRUE", "FALSE"]
        answers = ["TRUE", "FALSE", "UNCERTAIN"]
    else:
        hypotheses = ["SAT", "UNSAT"]
        answers = ["SAT", "UNSAT", "UNKNOWN"]
    if strategy.dcol_order is DColOrder.UNSAT_FIRST:
        hypotheses.reverse()
    return {
        "code": problem.code.rstrip(),
        "fence": _FENCE_LANG[problem.dialect],
        "premise_unit": _PREMISE_UNIT[problem.dialect],
        "nl": problem.nl_context if strategy.include_nl_context else None,
        "ternary": ternary,
        "answers": answers,
        "undecided": answers[-1],
        "hypotheses": hypotheses,
        "variables": sig.render_variables() if sig is not None else None,
        "constraints": sig.render_constraints() if sig is not None else None,
    }


def build(
    problem: Problem,
    strategy: Strategy,
    sig: Optional[Signature] = None,
    *,
    budget: int = PROMPT.context_budget,
) -> PromptPlan:
    """Render the message sequence for one problem under one strategy."""
    if strategy.include_nl_context and not problem.nl_context:
        raise MissingContext(problem.id)
    env = environment()
    ctx = _context(problem, strategy, sig)
    system = Message(Role.SYSTEM, env.get_template("system.j2").render(**ctx).strip())

    staged = strategy.tag is StrategyTag.DCOL and strategy.dcol_mode is DColMode.STAGED
    if staged:
        first, *rest = [env.get_template(name).render(**ctx).strip() for name in _STAGED_TEMPLATES]
        names: Sequence[str] = _STAGED_TEMPLATES
        followups = tuple(rest)
    else:
        name = _SINGLE_TEMPLATES[strategy.tag]
        first = env.get_template(name).render(**ctx).strip()
        names = (name,) + (_STAGED_TEMPLATES if strategy.tag is StrategyTag.DCOL else ())
        followups = ()

    plan = PromptPlan(
        problem_id=problem.id,
        task_kind=problem.task_kind,
        dialect=problem.dialect,
        strategy=strategy.label,
        messages=(system, Message(Role.USER, first)),
        followups=followups,
        template_hash=template_hash(names),
    )
    estimate = plan.token_estimate()
    if estimate > budget:
        raise ContextBudgetExceeded(estimate, budget)
    return plan
