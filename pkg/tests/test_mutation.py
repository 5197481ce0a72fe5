import re
from pathlib import Path

import pytest

from src.corpus import Dataset
from src.logic.core import Dialect, Problem, TaskKind, Verdict
from src.mutation import MutationKind, NoMutationSite, mutate, mutate_dataset, original_id, verify_broken
from src.mutation.engine import MutationMismatch, code_mask, load_records, sidecar_path, write_records

SAMPLES = Path(__file__).resolve().parents[1] / "data" / "smtlib"


def smt_problem(path):
    return Problem(id=path.stem, dialect=Dialect.SMTLIB, code=path.read_text(encoding="utf-8"), ground_truth=Verdict.SAT)


def py_problem(code, problem_id="py"):
    return Problem(id=problem_id, dialect=Dialect.Z3PY_TEXT, code=code, ground_truth=Verdict.UNSAT)


def edit_distance(a, b):
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def test_duplicated_paren_example():
    outcomes = {mutate(py_problem("func(a, b)"), MutationKind.MISMATCHED_PARENS, seed)[0].code for seed in range(60)}
    assert "func(a, b))" in outcomes
    assert outcomes <= {"func(a, b))", "func((a, b)", "funca, b)", "func(a, b"}


def test_misspelled_identifier_example():
    mutant, record = mutate(py_problem("x1 + 2\n"), MutationKind.MISSPELLED_IDENT, seed=3)
    assert mutant.code == "xl + 2\n"
    assert (record.original_fragment, record.mutated_fragment) == ("x1", "xl")
    assert record.site == (1, 1)


def test_smtlib_splice_into_python():
    problem = py_problem("x = Int('x')\ns = Solver()\ns.add(x > 0)\n")
    mutant, record = mutate(problem, MutationKind.MIX_SMTLIB_GRAMMAR, seed=0)
    assert re.fullmatch(r"\(declare-fun \w+ \(\) Bool\)\n", record.mutated_fragment)
    assert record.original_fragment == ""
    assert record.mutated_fragment in mutant.code


def test_fol_splice_uses_quantifier_symbol():
    mutant, record = mutate(py_problem("s.add(x > 0)\n"), MutationKind.MIX_FOL_GRAMMAR, seed=1)
    assert record.mutated_fragment[0] in "∀∃"
    assert record.offset == 6


@pytest.mark.parametrize("kind", list(MutationKind))
def test_mutant_keeps_label_and_marks_id(kind):
    problem = smt_problem(SAMPLES / "int_linear_sat.smt2")
    mutant, record = mutate(problem, kind, seed=5)
    assert mutant.id == "int_linear_sat~mut"
    assert original_id(mutant.id) == problem.id
    assert mutant.ground_truth is problem.ground_truth
    assert record.apply(problem.code) == mutant.code
    assert edit_distance(problem.code, mutant.code) <= len(record.mutated_fragment) + 1


@pytest.mark.parametrize("kind", list(MutationKind))
def test_mutation_is_deterministic(kind):
    problem = smt_problem(SAMPLES / "pigeonhole_3_2.smt2")
    assert mutate(problem, kind, seed=9) == mutate(problem, kind, seed=9)


@pytest.mark.parametrize("path", sorted(SAMPLES.glob("*.smt2")), ids=lambda p: p.stem)
@pytest.mark.parametrize("kind", list(MutationKind))
def test_smtlib_mutants_do_not_parse(path, kind):
    problem = smt_problem(path)
    assert verify_broken(problem) is False
    for seed in range(5):
        mutant, _ = mutate(problem, kind, seed)
        assert verify_broken(mutant), mutant.code


def test_verify_broken_trusts_other_dialects(caplog):
    assert verify_broken(py_problem("x = Int('x')\n"))
    assert "no parser" in caplog.text


def test_comments_and_strings_are_left_alone():
    code = "; (not here)\n(declare-const x Int)\n(assert (> x 0))\n"
    problem = Problem("c", Dialect.SMTLIB, code, Verdict.SAT)
    for seed in range(20):
        _, record = mutate(problem, MutationKind.MISMATCHED_PARENS, seed)
        assert record.site[0] > 1
    mask = code_mask("s.add(x) # (x)\nprint('(x)')\n", Dialect.Z3PY_TEXT)
    assert [i for i, keep in enumerate(mask) if not keep and "s.add(x) # (x)\nprint('(x)')\n"[i] == "("] == [11, 22]


def test_rebound_names_are_not_misspelled():
    problem = smt_problem(SAMPLES / "quantified_bound.smt2")
    for seed in range(10):
        _, record = mutate(problem, MutationKind.MISSPELLED_IDENT, seed)
        assert record.original_fragment == "x"


def test_no_site():
    with pytest.raises(NoMutationSite):
        mutate(Problem("t", Dialect.SMTLIB, "(assert true)\n", Verdict.SAT), MutationKind.MISSPELLED_IDENT, 0)
    with pytest.raises(NoMutationSite):
        mutate(py_problem(""), MutationKind.MISMATCHED_PARENS, 0)
    with pytest.raises(NoMutationSite):
        mutate(py_problem("x + 1\n"), MutationKind.MISMATCHED_PARENS, 0)


def test_apply_checks_fragment():
    _, record = mutate(py_problem("x1 + 2\n"), MutationKind.MISSPELLED_IDENT, seed=0)
    with pytest.raises(MutationMismatch):
        record.apply("y + 2\n")


def test_mutate_dataset_sample_and_sidecar(tmp_path):
    problems = tuple(smt_problem(p) for p in sorted(SAMPLES.glob("*.smt2")))
    base = Dataset("samples", TaskKind.BINARY_SATNESS, problems)
    derived, records = mutate_dataset(base, MutationKind.MIX_FOL_GRAMMAR, seed=4, sample=3)
    assert derived.name == "samples~mix_fol_grammar"
    assert derived.derived_from == "samples"
    assert len(derived) == len(records) == 3
    originals = base.by_id()
    for mutant, record in zip(derived, records):
        assert mutant.id == record.original_id + "~mut"
        assert record.apply(originals[record.original_id].code) == mutant.code
    order = [p.id for p in problems]
    assert [order.index(r.original_id) for r in records] == sorted(order.index(r.original_id) for r in records)

    path = sidecar_path(tmp_path / "samples~mix_fol_grammar.jsonl")
    assert path.name == "samples~mix_fol_grammar.mutations.jsonl"
    assert load_records(write_records(records, path)) == records


def test_mutate_dataset_skips_problems_without_site():
    problems = (
        Problem("plain", Dialect.SMTLIB, "(assert true)\n", Verdict.SAT),
        smt_problem(SAMPLES / "de_morgan.smt2"),
    )
    derived, records = mutate_dataset(Dataset("d", TaskKind.BINARY_SATNESS, problems), MutationKind.MISSPELLED_IDENT, 0)
    assert [r.original_id for r in records] == ["de_morgan"]


@pytest.mark.parametrize("params", ["()", "( )", "(\n  )"])
def test_nullary_declare_fun_with_spaced_parens_is_a_constant(params):
    code = f"(declare-fun flag {params} Bool)\n(assert flag)\n(check-sat)\n"
    problem = Problem(id="nullary", dialect=Dialect.SMTLIB, code=code, ground_truth=Verdict.SAT)
    mutant, record = mutate(problem, MutationKind.MISSPELLED_IDENT, seed=0)
    assert record.original_fragment == "flag"
    assert record.offset == code.index("(assert flag)") + len("(assert ")
    assert mutant.code.startswith(f"(declare-fun flag {params} Bool)")
