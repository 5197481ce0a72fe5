import itertools

import pytest

from src.logic.core import (
    Dialect,
    InconsistentPremises,
    Problem,
    TaskKind,
    TernaryAnswer,
    Verdict,
    dual_hypothesis_combine,
    negate_answer,
    parse_answer,
    verdict_to_binary,
)


def test_verdict_to_binary_is_a_bijection():
    images = {verdict_to_binary(v) for v in Verdict}
    assert images == set(TernaryAnswer)
    assert verdict_to_binary(Verdict.SAT) is TernaryAnswer.TRUE
    assert verdict_to_binary(Verdict.UNSAT) is TernaryAnswer.FALSE
    assert verdict_to_binary(Verdict.UNKNOWN) is TernaryAnswer.UNCERTAIN


@pytest.mark.parametrize(
    "affirm, negate, expected",
    [
        (Verdict.SAT, Verdict.UNSAT, TernaryAnswer.TRUE),
        (Verdict.UNSAT, Verdict.SAT, TernaryAnswer.FALSE),
        (Verdict.SAT, Verdict.SAT, TernaryAnswer.UNCERTAIN),
        (Verdict.UNKNOWN, Verdict.SAT, TernaryAnswer.UNCERTAIN),
        (Verdict.UNSAT, Verdict.UNKNOWN, TernaryAnswer.UNCERTAIN),
    ],
)
def test_dual_hypothesis_combine(affirm, negate, expected):
    assert dual_hypothesis_combine(affirm, negate) is expected


def test_both_unsat_means_inconsistent_premises():
    with pytest.raises(InconsistentPremises) as info:
        dual_hypothesis_combine(Verdict.UNSAT, Verdict.UNSAT)
    assert info.value.code == 110
    assert dual_hypothesis_combine(Verdict.UNSAT, Verdict.UNSAT, literal_uncertain=True) is TernaryAnswer.UNCERTAIN


def test_combine_is_symmetric_under_conclusion_negation():
    for a, b in itertools.product(Verdict, repeat=2):
        if (a, b) == (Verdict.UNSAT, Verdict.UNSAT):
            continue
        assert dual_hypothesis_combine(a, b) is negate_answer(dual_hypothesis_combine(b, a))


def test_problem_loc_counts_physical_lines():
    p = Problem("p1", Dialect.SMTLIB, "(declare-const x Bool)\n\n(assert x)\n", Verdict.SAT)
    assert p.loc == 3
    assert p.task_kind is TaskKind.BINARY_SATNESS
    record = p.to_record()
    assert record["ground_truth"] == "sat"
    assert record["loc"] == 3
    assert "category" not in record


def test_parse_answer_closed_vocabulary():
    assert parse_answer("UNSAT") is Verdict.UNSAT
    assert parse_answer(" uncertain ") is TernaryAnswer.UNCERTAIN
    with pytest.raises(ValueError):
        parse_answer("maybe")
