import json
import logging
from fractions import Fraction

import pytest

from src.corpus import (
    Dataset,
    DuplicateId,
    EmptyDataset,
    GenKind,
    GenSpec,
    IoError,
    QueryKind,
    SchemaError,
    filter_dataset,
    generate,
    load,
    stats,
    write,
)
from src.corpus.dataset import dumps, loads
from src.corpus.generate import (
    InvalidGenSpec,
    KhopTheory,
    OracleUndecided,
    Rule,
    cnf_script,
    forward_closure,
    khop_closed_world,
    khop_entailment,
)
from src.logic.core import Dialect, Problem, TaskKind, TernaryAnswer, Verdict, verdict_to_binary
from src.oracle import OracleConfig, entailment, solve
from src.smtlib import parse


def record(problem_id, code="(assert true)\n", truth="sat", **extra):
    data = {
        "id": problem_id,
        "dialect": "smtlib",
        "code": code,
        "nl_context": None,
        "ground_truth": truth,
        "source": "test",
    }
    data.update(extra)
    return json.dumps(data)


def make_problem(problem_id, lines, truth=Verdict.SAT, dialect=Dialect.SMTLIB):
    code = "".join("(assert true)\n" for _ in range(lines))
    return Problem(id=problem_id, dialect=dialect, code=code, ground_truth=truth)


# ------------------------------------------------------------------ load / write
def test_load_two_records(tmp_path):
    path = tmp_path / "two.jsonl"
    path.write_text(record("a") + "\n" + record("b", truth="unsat") + "\n", encoding="utf-8")
    dataset = load(path)
    assert dataset.name == "two"
    assert dataset.task_kind is TaskKind.BINARY_SATNESS
    assert [p.id for p in dataset] == ["a", "b"]
    assert dataset.problems[1].ground_truth is Verdict.UNSAT


def test_header_sets_name_and_kind():
    header = json.dumps({"name": "folio-mini", "task_kind": "ternary_entailment", "version": 1})
    dataset = loads(header + "\n" + record("a", truth="uncertain") + "\n")
    assert dataset.name == "folio-mini"
    assert dataset.task_kind is TaskKind.TERNARY_ENTAILMENT


def test_unknown_label_is_schema_error():
    with pytest.raises(SchemaError) as err:
        loads(record("a") + "\n" + record("b", truth="maybe") + "\n")
    assert err.value.line == 2
    assert err.value.field == "ground_truth"


def test_label_kind_must_match_header():
    header = json.dumps({"name": "x", "task_kind": "binary_satness", "version": 1})
    with pytest.raises(SchemaError) as err:
        loads(header + "\n" + record("a", truth="true") + "\n")
    assert err.value.field == "ground_truth"


def test_mixed_labels_without_header_rejected():
    with pytest.raises(SchemaError):
        loads(record("a", truth="sat") + "\n" + record("b", truth="false") + "\n")


def test_bad_dialect_and_json():
    with pytest.raises(SchemaError) as err:
        loads(record("a", dialect="lean") + "\n")
    assert err.value.field == "dialect"
    with pytest.raises(SchemaError) as err:
        loads("{not json\n")
    assert err.value.field == "json"


def test_duplicate_id():
    with pytest.raises(DuplicateId):
        loads(record("a") + "\n" + record("a") + "\n")


def test_stale_loc_is_recomputed(caplog):
    with caplog.at_level(logging.WARNING):
        dataset = loads(record("a", code="(assert true)\n(assert true)\n", loc=7) + "\n")
    assert dataset.problems[0].loc == 2
    assert "recomputed" in caplog.text


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(IoError):
        load(tmp_path / "absent.jsonl")


def test_write_then_load_is_identity(tmp_path):
    dataset = Dataset(
        name="mini",
        task_kind=TaskKind.BINARY_SATNESS,
        problems=(
            make_problem("p1", 3),
            Problem(
                id="p2",
                dialect=Dialect.Z3PY_TEXT,
                code="x = Int('x')\ns.add(x > 1)\n",
                ground_truth=Verdict.UNKNOWN,
                nl_context="∀ is fine in context",
                category="arithmetic",
            ),
        ),
        derived_from="base",
    )
    path = write(dataset, tmp_path / "out" / "mini.jsonl")
    assert load(path) == dataset
    first = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
    assert first == {"name": "mini", "task_kind": "binary_satness", "version": 1, "derived_from": "base"}


# ------------------------------------------------------------------ stats / filter
def test_stats_mean_loc():
    dataset = Dataset("d", TaskKind.BINARY_SATNESS, (make_problem("a", 4), make_problem("b", 6, Verdict.UNSAT)))
    summary = stats(dataset)
    assert summary.count == 2
    assert summary.mean_loc == 5
    assert summary.mean_loc_display == "5.00"
    assert summary.by_truth == {"sat": 1, "unsat": 1}
    assert (summary.min_loc, summary.max_loc) == (4, 6)


def test_stats_single_problem():
    summary = stats(Dataset("d", TaskKind.BINARY_SATNESS, (make_problem("a", 9),)))
    assert summary.to_dict()["mean_loc"] == "9.00"


def test_stats_two_decimal_rounding():
    problems = tuple(make_problem(f"p{i}", n) for i, n in enumerate([14, 14, 15]))
    summary = stats(Dataset("d", TaskKind.BINARY_SATNESS, problems))
    assert summary.mean_loc == Fraction(43, 3)
    assert summary.mean_loc_display == "14.33"


def test_stats_empty():
    with pytest.raises(EmptyDataset):
        stats(Dataset("d", TaskKind.BINARY_SATNESS))


def test_filter_thresholds():
    long_line = Problem("wide", Dialect.SMTLIB, "(assert " + "(and true true) " * 20 + ")\n", Verdict.SAT)
    dataset = Dataset("d", TaskKind.BINARY_SATNESS, (make_problem("a", 2), make_problem("b", 30), long_line))
    assert [p.id for p in filter_dataset(dataset, max_loc=10)] == ["a", "wide"]
    assert [p.id for p in filter_dataset(dataset, max_tokens_per_line=20)] == ["a", "b"]
    assert [p.id for p in filter_dataset(dataset, max_tokens=50)] == ["a"]
    assert filter_dataset(dataset).problems == dataset.problems


# ------------------------------------------------------------------ generation
def test_khop_one_hop_positive():
    spec = GenSpec(GenKind.KHOP_CHAIN, count=3, hops=1, query=QueryKind.POSITIVE, seed=1)
    for problem in generate(spec):
        assert problem.ground_truth is Verdict.SAT
        assert verdict_to_binary(problem.ground_truth) is TernaryAnswer.TRUE
    ternary = generate(GenSpec(GenKind.KHOP_CHAIN, count=3, hops=1, query=QueryKind.POSITIVE,
                               task_kind=TaskKind.TERNARY_ENTAILMENT))
    assert {p.ground_truth for p in ternary} == {TernaryAnswer.TRUE}


def test_khop_distractor_labels():
    binary = generate(GenSpec(GenKind.KHOP_CHAIN, count=4, hops=5, query=QueryKind.DISTRACTOR, seed=3))
    assert {verdict_to_binary(p.ground_truth) for p in binary} == {TernaryAnswer.FALSE}
    ternary = generate(GenSpec(GenKind.KHOP_CHAIN, count=4, hops=5, query=QueryKind.DISTRACTOR, seed=3,
                               task_kind=TaskKind.TERNARY_ENTAILMENT))
    assert {p.ground_truth for p in ternary} == {TernaryAnswer.UNCERTAIN}


@pytest.mark.parametrize(
    "query, binary, ternary",
    [
        (QueryKind.POSITIVE, Verdict.SAT, TernaryAnswer.TRUE),
        (QueryKind.NEGATED, Verdict.UNSAT, TernaryAnswer.FALSE),
        (QueryKind.BLOCKED, Verdict.UNSAT, TernaryAnswer.FALSE),
        (QueryKind.DISTRACTOR, Verdict.UNSAT, TernaryAnswer.UNCERTAIN),
    ],
)
def test_khop_query_kinds(query, binary, ternary):
    b = generate(GenSpec(GenKind.KHOP_CHAIN, count=2, hops=3, query=query, seed=11))
    t = generate(GenSpec(GenKind.KHOP_CHAIN, count=2, hops=3, query=query, seed=11,
                         task_kind=TaskKind.TERNARY_ENTAILMENT))
    assert {p.ground_truth for p in b} == {binary}
    assert {p.ground_truth for p in t} == {ternary}


def test_generated_labels_agree_with_oracle():
    binary = generate(GenSpec(GenKind.KHOP_CHAIN, count=12, hops=4, seed=5))
    for problem in binary:
        assert solve(parse(problem.code)).verdict is problem.ground_truth
        assert problem.nl_context and problem.nl_context.endswith("true or false?")
    ternary = generate(GenSpec(GenKind.KHOP_CHAIN, count=12, hops=4, seed=5, task_kind=TaskKind.TERNARY_ENTAILMENT))
    for problem in ternary:
        assert entailment(parse(problem.code)) is problem.ground_truth


def test_generation_is_deterministic():
    spec = GenSpec(GenKind.KHOP_CHAIN, count=5, hops=5, seed=42)
    assert dumps(generate(spec)) == dumps(generate(spec))
    other = GenSpec(GenKind.KHOP_CHAIN, count=5, hops=5, seed=43)
    assert dumps(generate(spec)) != dumps(generate(other))


def test_generated_dataset_round_trips(tmp_path):
    dataset = generate(GenSpec(GenKind.RANDOM_CNF, count=6, vars=5, seed=2))
    assert load(write(dataset, tmp_path / "cnf.jsonl")) == dataset


def test_cnf_contradiction_is_unsat():
    script = cnf_script([[1, 2], [1], [-1]], ["a", "b"])
    assert solve(script).verdict is Verdict.UNSAT


def test_random_cnf_labels_from_oracle():
    dataset = generate(GenSpec(GenKind.RANDOM_CNF, count=20, vars=3, clause_ratio=Fraction(10), seed=9))
    for problem in dataset:
        assert problem.category == "cnf"
        assert solve(parse(problem.code)).verdict is problem.ground_truth
    assert Verdict.UNSAT in {p.ground_truth for p in dataset}


def test_closure_routine():
    rules = [Rule("a", "b"), Rule("b", "c"), Rule("c", "d", positive=False), Rule("e", "a")]
    positive, negative = forward_closure(["a"], rules)
    assert positive == {"a", "b", "c"}
    assert negative == {"d"}
    theory = KhopTheory("Alex", "a", tuple(rules), ("a", "b", "c", "d", "e"), "e")
    assert khop_entailment(theory) is TernaryAnswer.UNCERTAIN
    assert khop_closed_world(theory) is Verdict.UNSAT


def test_undecidable_instances_raise():
    tight = OracleConfig(max_bool_vars=2)
    with pytest.raises(OracleUndecided):
        generate(GenSpec(GenKind.KHOP_CHAIN, count=1, hops=5, max_retries=2, oracle=tight))


@pytest.mark.parametrize("field", ["count", "hops", "vars"])
def test_invalid_spec(field):
    with pytest.raises(InvalidGenSpec):
        GenSpec(GenKind.KHOP_CHAIN, **{"count": 1, field: 0})
