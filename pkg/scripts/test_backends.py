#!/usr/bin/env python
"""Quick smoke test for a backend: probe it, then answer two tiny problems."""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from src.llm import BackendSpec, complete, probe  # noqa: E402
from src.logic.core import Dialect, Problem, Verdict  # noqa: E402
from src.prompts import DColOrder, Strategy, StrategyTag, build  # noqa: E402
from src.eval import parse_verdict  # noqa: E402

PROBLEMS = [
    Problem("smoke-unsat", Dialect.SMTLIB, "(declare-const a Bool)\n(assert a)\n(assert (not a))\n(check-sat)\n", Verdict.UNSAT),
    Problem("smoke-sat", Dialect.SMTLIB, "(declare-const a Bool)\n(declare-const b Bool)\n(assert (or a b))\n(check-sat)\n", Verdict.SAT),
]


def main() -> None:
    spec = BackendSpec.parse(sys.argv[1] if len(sys.argv) > 1 else "perfect")
    print("Probe:")
    print(probe(spec))

    strategy = Strategy(StrategyTag.DCOL, DColOrder.SAT_FIRST)
    for problem in PROBLEMS:
        completion = complete(spec, build(problem, strategy), seed=0)
        parsed = parse_verdict(completion.text)
        print(f"{problem.id}: expected {problem.ground_truth.value}, got {parsed.verdict.value} ({parsed.source.value})")
        print(completion.text)


if __name__ == "__main__":
    main()
