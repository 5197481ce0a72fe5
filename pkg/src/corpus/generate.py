"""Synthetic problem generators with oracle-checked labels.

Two families are produced. K-hop chains emulate the ProntoQA style: a fact,
an implication chain over fictional concepts, distractor rules and a query
about one concept. Random k-CNF scripts are labelled by the oracle alone.
Every instance is drawn from its own seeded stream, so a spec always yields
the same dataset byte for byte.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import HarnessError
from ..logic.core import (
    Answer,
    Dialect,
    InconsistentPremises,
    Problem,
    TaskKind,
    TernaryAnswer,
    Verdict,
    dual_hypothesis_combine,
    negate_answer,
)
from ..oracle.solver import OracleConfig, solve
from ..rng import make_rng
from ..smtlib.ast import BOOL, App, Declaration, Op, Script, Term, Var, mk_not
from ..smtlib.printer import print_script
from .dataset import Dataset
from .vocab import load_vocabulary


LOGGER = logging.getLogger(__name__)


class GenKind(enum.Enum):
    KHOP_CHAIN = "khop_chain"
    RANDOM_CNF = "random_cnf"


class QueryKind(enum.Enum):
    POSITIVE = "positive"  # the last chain concept
    NEGATED = "negated"  # its negation
    BLOCKED = "blocked"  # a concept ruled out by a negative rule
    DISTRACTOR = "distractor"  # a concept no rule derives
    MIXED = "mixed"


_CONCRETE_QUERIES = (QueryKind.POSITIVE, QueryKind.NEGATED, QueryKind.BLOCKED, QueryKind.DISTRACTOR)


class InvalidGenSpec(HarnessError):
    code = 405
    exit_status = 1


class OracleUndecided(HarnessError):
    code = 404

    def __init__(self, problem_id: str, attempts: int) -> None:
        super().__init__(f"oracle could not label '{problem_id}' after {attempts} attempts")
        self.problem_id = problem_id


class GeneratorDisagreement(HarnessError):
    code = 406


@dataclass(frozen=True)
class GenSpec:
    kind: GenKind
    count: int
    hops: int = 5
    vars: int = 3
    clause_ratio: Fraction = Fraction(43, 10)
    clause_width: int = 3
    seed: int = 0
    task_kind: TaskKind = TaskKind.BINARY_SATNESS
    query: QueryKind = QueryKind.MIXED
    distractors: int = 2
    name: Optional[str] = None
    max_retries: int = 8
    oracle: Optional[OracleConfig] = None

    def __post_init__(self) -> None:
        if not isinstance(self.clause_ratio, Fraction):
            try:
                ratio = Fraction(str(self.clause_ratio))
            except (ValueError, ZeroDivisionError) as exc:
                raise InvalidGenSpec(f"clause_ratio must be a number, got {self.clause_ratio!r}") from exc
            object.__setattr__(self, "clause_ratio", ratio)
        if self.count < 1:
            raise InvalidGenSpec("count must be at least 1")
        if self.hops < 1:
            raise InvalidGenSpec("hops must be at least 1")
        if self.vars < 1:
            raise InvalidGenSpec("vars must be at least 1")
        if self.clause_ratio <= 0:
            raise InvalidGenSpec("clause_ratio must be positive")
        if self.clause_width < 1:
            raise InvalidGenSpec("clause_width must be at least 1")
        if self.distractors < 0:
            raise InvalidGenSpec("distractors cannot be negative")
        if self.max_retries < 1:
            raise InvalidGenSpec("max_retries must be at least 1")

    @property
    def dataset_name(self) -> str:
        if self.name:
            return self.name
        if self.kind is GenKind.KHOP_CHAIN:
            return f"khop{self.hops}-s{self.seed}"
        return f"cnf{self.vars}-s{self.seed}"


# ------------------------------------------------------------------ k-hop theories
@dataclass(frozen=True)
class Rule:
    body: str
    head: str
    positive: bool = True


@dataclass(frozen=True)
class KhopTheory:
    entity: str
    fact: str
    rules: Tuple[Rule, ...]
    atoms: Tuple[str, ...]
    query: str
    negated: bool = False
    query_kind: QueryKind = QueryKind.POSITIVE


def forward_closure(facts: Sequence[str], rules: Sequence[Rule]) -> Tuple[FrozenSet[str], FrozenSet[str]]:
    """Atoms derivable as true and as false by chaining the rules from ``facts``."""
    positive = set(facts)
    negative = set()
    changed = True
    while changed:
        changed = False
        for rule in rules:
            if rule.body not in positive:
                continue
            target = positive if rule.positive else negative
            if rule.head not in target:
                target.add(rule.head)
                changed = True
    return frozenset(positive), frozenset(negative)


def khop_entailment(theory: KhopTheory) -> TernaryAnswer:
    positive, negative = forward_closure([theory.fact], theory.rules)
    if theory.query in positive:
        answer = TernaryAnswer.TRUE
    elif theory.query in negative:
        answer = TernaryAnswer.FALSE
    else:
        answer = TernaryAnswer.UNCERTAIN
    return negate_answer(answer) if theory.negated else answer


def khop_closed_world(theory: KhopTheory) -> Verdict:
    """Verdict of the query constraint once every underivable atom is assumed false."""
    positive, _ = forward_closure([theory.fact], theory.rules)
    holds = (theory.query in positive) != theory.negated
    return Verdict.SAT if holds else Verdict.UNSAT


def _pick_concepts(rng: np.random.Generator, count: int) -> List[str]:
    pool = list(load_vocabulary().concepts)
    suffix = 2
    base = list(pool)
    while len(pool) < count:
        pool.extend(f"{name}{suffix}" for name in base)
        suffix += 1
    order = rng.permutation(len(pool))[:count]
    return [pool[int(i)] for i in order]


def build_khop_theory(rng: np.random.Generator, hops: int, distractors: int, query: QueryKind) -> KhopTheory:
    if query is QueryKind.MIXED:
        query = _CONCRETE_QUERIES[int(rng.integers(len(_CONCRETE_QUERIES)))]
    needs_extra = query in (QueryKind.BLOCKED, QueryKind.DISTRACTOR)
    extra_count = max(distractors, 1) if needs_extra else distractors

    entities = load_vocabulary().entities
    entity = entities[int(rng.integers(len(entities)))]
    names = _pick_concepts(rng, hops + 1 + extra_count)
    chain, extra = names[: hops + 1], names[hops + 1 :]

    rules: List[Rule] = [Rule(chain[i], chain[i + 1]) for i in range(hops)]
    for position, atom in enumerate(extra):
        anchor = chain[int(rng.integers(len(chain)))]
        if position == 0 and needs_extra:
            blocked = query is QueryKind.BLOCKED
        else:
            blocked = bool(rng.integers(2))
        # A blocked atom is refuted from the chain; a free one only feeds into it.
        rules.append(Rule(anchor, atom, positive=False) if blocked else Rule(atom, anchor))
    order = rng.permutation(len(rules))
    shuffled = tuple(rules[int(i)] for i in order)

    if query is QueryKind.POSITIVE:
        target, negated = chain[-1], False
    elif query is QueryKind.NEGATED:
        target, negated = chain[-1], True
    else:
        target, negated = extra[0], False
    return KhopTheory(
        entity=entity,
        fact=chain[0],
        rules=shuffled,
        atoms=tuple(sorted(names)),
        query=target,
        negated=negated,
        query_kind=query,
    )


def _rule_term(rule: Rule) -> Term:
    head: Term = Var(rule.head, BOOL)
    if not rule.positive:
        head = mk_not(head)
    return App(Op.IMPLIES, (Var(rule.body, BOOL), head), BOOL)


def _query_term(theory: KhopTheory) -> Term:
    atom = Var(theory.query, BOOL)
    return mk_not(atom) if theory.negated else atom


def khop_script(theory: KhopTheory, task_kind: TaskKind) -> Script:
    assertions: List[Term] = [Var(theory.fact, BOOL)]
    assertions.extend(_rule_term(rule) for rule in theory.rules)
    if task_kind is TaskKind.BINARY_SATNESS:
        positive, _ = forward_closure([theory.fact], theory.rules)
        assertions.extend(mk_not(Var(a, BOOL)) for a in theory.atoms if a not in positive)
    assertions.append(_query_term(theory))
    return Script(
        logic="QF_UF",
        declarations=tuple(Declaration(a, BOOL) for a in theory.atoms),
        assertions=tuple(assertions),
        has_check_sat=True,
    )


def _article(word: str) -> str:
    return "an" if word[:1].lower() in "aeiou" else "a"


def khop_text(theory: KhopTheory, task_kind: TaskKind) -> str:
    sentences = [f"{theory.entity} is {_article(theory.fact)} {theory.fact}."]
    for rule in theory.rules:
        link = "is" if rule.positive else "is not"
        sentences.append(f"Every {rule.body} {link} {_article(rule.head)} {rule.head}.")
    if task_kind is TaskKind.BINARY_SATNESS:
        sentences.append("Anything that is not stated or derivable is false.")
    link = "is not" if theory.negated else "is"
    sentences.append(f"Statement: {theory.entity} {link} {_article(theory.query)} {theory.query}.")
    if task_kind is TaskKind.BINARY_SATNESS:
        sentences.append("Is the statement true or false?")
    else:
        sentences.append("Is the statement true, false, or uncertain?")
    return " ".join(sentences)


# ------------------------------------------------------------------ random CNF
def cnf_script(clauses: Sequence[Sequence[int]], names: Optional[Sequence[str]] = None) -> Script:
    """Script for DIMACS-style clauses: literal ``k`` is variable ``k`` (1-based), ``-k`` its negation."""
    count = max((abs(lit) for clause in clauses for lit in clause), default=0)
    names = list(names) if names is not None else [f"p{i}" for i in range(count)]
    if len(names) < count:
        raise InvalidGenSpec(f"{count} variables used but only {len(names)} names given")
    assertions: List[Term] = []
    for clause in clauses:
        if not clause or 0 in clause:
            raise InvalidGenSpec(f"malformed clause {list(clause)}")
        literals = [
            Var(names[abs(lit) - 1], BOOL) if lit > 0 else mk_not(Var(names[abs(lit) - 1], BOOL))
            for lit in clause
        ]
        assertions.append(literals[0] if len(literals) == 1 else App(Op.OR, tuple(literals), BOOL))
    return Script(
        logic="QF_UF",
        declarations=tuple(Declaration(n, BOOL) for n in names),
        assertions=tuple(assertions),
        has_check_sat=True,
    )


def random_clauses(rng: np.random.Generator, num_vars: int, num_clauses: int, width: int) -> List[List[int]]:
    width = min(width, num_vars)
    clauses: List[List[int]] = []
    for _ in range(num_clauses):
        chosen = rng.choice(num_vars, size=width, replace=False)
        signs = rng.integers(0, 2, size=width)
        clauses.append([int(v) + 1 if s else -(int(v) + 1) for v, s in zip(chosen, signs)])
    return clauses


# ------------------------------------------------------------------ generation
def _label(script: Script, task_kind: TaskKind, cfg: Optional[OracleConfig]) -> Optional[Answer]:
    if task_kind is TaskKind.TERNARY_ENTAILMENT:
        premises, conclusion = script.assertions[:-1], script.assertions[-1]
        affirm = solve(script, cfg).verdict
        negate = solve(script.with_assertions(premises + (mk_not(conclusion),)), cfg).verdict
        if Verdict.UNKNOWN in (affirm, negate):
            return None
        try:
            return dual_hypothesis_combine(affirm, negate)
        except InconsistentPremises:
            return None
    verdict = solve(script, cfg).verdict
    return None if verdict is Verdict.UNKNOWN else verdict


def _khop_problem(spec: GenSpec, problem_id: str, rng: np.random.Generator) -> Optional[Problem]:
    theory = build_khop_theory(rng, spec.hops, spec.distractors, spec.query)
    script = khop_script(theory, spec.task_kind)
    if spec.task_kind is TaskKind.BINARY_SATNESS:
        expected: Answer = khop_closed_world(theory)
    else:
        expected = khop_entailment(theory)
    label = _label(script, spec.task_kind, spec.oracle)
    if label is None:
        return None
    if label is not expected:
        raise GeneratorDisagreement(
            f"'{problem_id}': forward chaining says {expected.value}, oracle says {label.value}"
        )
    return Problem(
        id=problem_id,
        dialect=Dialect.SMTLIB,
        code=print_script(script),
        ground_truth=label,
        source=f"generated:{spec.kind.value}:hops={spec.hops}:query={theory.query_kind.value}:seed={spec.seed}",
        nl_context=khop_text(theory, spec.task_kind),
        category="khop",
    )


def _cnf_problem(spec: GenSpec, problem_id: str, rng: np.random.Generator) -> Optional[Problem]:
    num_clauses = max(1, round(spec.clause_ratio * spec.vars))
    clauses = random_clauses(rng, spec.vars, num_clauses, spec.clause_width)
    script = cnf_script(clauses)
    label = _label(script, spec.task_kind, spec.oracle)
    if label is None:
        return None
    return Problem(
        id=problem_id,
        dialect=Dialect.SMTLIB,
        code=print_script(script),
        ground_truth=label,
        source=f"generated:{spec.kind.value}:vars={spec.vars}:ratio={spec.clause_ratio}:seed={spec.seed}",
        category="cnf",
    )


def generate(spec: GenSpec) -> Dataset:
    name = spec.dataset_name
    build = _khop_problem if spec.kind is GenKind.KHOP_CHAIN else _cnf_problem
    problems: List[Problem] = []
    for index in range(spec.count):
        problem_id = f"{name}-{index:04d}"
        for attempt in range(spec.max_retries):
            rng = make_rng("generate", spec.kind.value, spec.seed, index, attempt)
            problem = build(spec, problem_id, rng)
            if problem is not None:
                problems.append(problem)
                break
            LOGGER.debug("Oracle undecided on %s (attempt %d); regenerating", problem_id, attempt)
        else:
            raise OracleUndecided(problem_id, spec.max_retries)
    LOGGER.info("Generated %d %s problems for '%s'", len(problems), spec.kind.value, name)
    return Dataset(name=name, task_kind=spec.task_kind, problems=tuple(problems))
