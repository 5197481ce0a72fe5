import csv
import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.eval import RunRecord
from src.logic.core import TernaryAnswer, Verdict
from src.report import (
    CSV_HEADER,
    EmptyRecords,
    ErrorCategory,
    ErrorTag,
    LineageMismatch,
    MalformedRow,
    MixedCell,
    ReportFormat,
    TagOnCorrect,
    UnknownProblem,
    emit_report,
    guess_adjusted_accuracy,
    load_summaries,
    load_tags,
    load_taxonomy,
    pair_deltas,
    pct,
    robustness_delta,
    summarize,
    summarize_cells,
    tag_errors,
    validate_cells,
    validate_rows,
)

S, U, K = Verdict.SAT, Verdict.UNSAT, Verdict.UNKNOWN


def record(i, final, truth=U, *, dataset="z3test", strategy="sd", backend="mock", repeat=0, derived_from=None):
    return RunRecord(
        problem_id=f"p{i:05d}",
        dataset=dataset,
        derived_from=derived_from,
        strategy=strategy,
        backend=backend,
        backend_fingerprint="f" * 16,
        repeat=repeat,
        samples=(),
        votes=None,
        sub_verdicts=None,
        final=final,
        ground_truth=truth,
        correct=final is truth,
    )


def records(n, correct, unknown, **kwargs):
    """``n`` UNSAT problems: ``correct`` right, ``unknown`` undecided, the rest answered SAT."""
    finals = [U] * correct + [K] * unknown + [S] * (n - correct - unknown)
    return [record(i, f, **kwargs) for i, f in enumerate(finals)]


# ------------------------------------------------------------------ summarize
@pytest.mark.parametrize(
    "correct, unknown, acc, unk, exe",
    [
        (7647, 353, "76.47", "3.53", "79.27"),
        (7254, 352, "72.54", "3.52", "75.19"),
        (5490, 686, "54.90", "6.86", "58.94"),
    ],
)
def test_execution_accuracy_matches_published_rows(correct, unknown, acc, unk, exe):
    summary = summarize(records(10_000, correct, unknown))
    row = summary.to_dict()
    assert (row["accuracy"], row["unknown_rate"], row["exe_acc"]) == (acc, unk, exe)
    assert abs(summary.exe_acc * 100 - Fraction(exe)) <= Fraction(1, 100)


def test_no_unknowns_means_exe_equals_acc():
    summary = summarize(records(20, 13, 0))
    assert summary.exe_acc == summary.acc == Fraction(13, 20)


def test_all_unknown_gives_not_applicable():
    summary = summarize(records(5, 0, 5))
    assert summary.exe_acc is None
    assert summary.to_dict()["exe_acc"] == "N/A"
    assert validate_cells([summary]) == []


def test_confusion_sums_to_n():
    summary = summarize(records(40, 25, 5))
    assert sum(c for _, _, c in summary.confusion) == 40
    diagonal = sum(c for t, f, c in summary.confusion if t == f)
    assert Fraction(diagonal, summary.n) == summary.acc


def test_ternary_uncertain_counts_as_unknown():
    rows = [
        record(0, TernaryAnswer.TRUE, TernaryAnswer.TRUE),
        record(1, TernaryAnswer.UNCERTAIN, TernaryAnswer.FALSE),
        record(2, TernaryAnswer.FALSE, TernaryAnswer.UNCERTAIN),
    ]
    summary = summarize(rows)
    assert (summary.correct, summary.unknown) == (1, 1)
    assert guess_adjusted_accuracy(summary) == Fraction(1, 3) + Fraction(1, 9)


def test_guess_adjusted_binary():
    summary = summarize(records(10, 5, 4))
    assert guess_adjusted_accuracy(summary) == Fraction(7, 10)


def test_summarize_rejects_empty_and_mixed():
    with pytest.raises(EmptyRecords):
        summarize([])
    mixed = records(2, 1, 0) + records(2, 1, 0, strategy="cot")
    with pytest.raises(MixedCell) as excinfo:
        summarize(mixed)
    assert excinfo.value.code == 902


@given(st.lists(st.sampled_from([S, U, K]), min_size=1, max_size=30), st.randoms())
def test_summarize_is_permutation_invariant(finals, rnd):
    rows = [record(i, f) for i, f in enumerate(finals)]
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert summarize(shuffled) == summarize(rows)


def test_repeats_get_their_own_cells_and_a_pooled_one():
    rows = records(10, 8, 0, repeat=0) + records(10, 6, 2, repeat=1)
    cells = summarize_cells(rows)
    assert [c.repeat_label for c in cells] == ["0", "1", "all"]
    pooled = cells[-1]
    assert (pooled.n, pooled.correct, pooled.unknown) == (20, 14, 2)


# ------------------------------------------------------------------ robustness
def test_robustness_delta_exact_drop():
    base = summarize(records(10, 8, 0))
    mutated = summarize(records(10, 4, 0, dataset="z3test~misspell", derived_from="z3test"))
    delta = robustness_delta(base, mutated)
    assert delta.acc_drop == 40
    assert delta.to_dict()["acc_drop"] == "40.00"


def test_robustness_delta_identical_counts_is_zero():
    base = summarize(records(10, 6, 2))
    mutated = summarize(records(10, 6, 2, dataset="z3test~rename", derived_from="z3test"))
    delta = robustness_delta(base, mutated)
    assert (delta.acc_drop, delta.unk_shift, delta.exe_drop) == (0, 0, 0)


def test_robustness_delta_can_be_negative():
    base = summarize(records(10, 3, 0))
    mutated = summarize(records(10, 5, 1, dataset="z3test~hole", derived_from="z3test"))
    delta = robustness_delta(base, mutated)
    assert delta.acc_drop == -20
    assert delta.unk_shift == 10
    assert delta.to_dict()["acc_drop"] == "-20.00"


def test_robustness_delta_checks_lineage():
    base = summarize(records(10, 3, 0))
    stranger = summarize(records(10, 5, 1, dataset="other"))
    with pytest.raises(LineageMismatch):
        robustness_delta(base, stranger)


def test_pair_deltas_needs_a_baseline_cell():
    base = [summarize(records(10, 8, 0))]
    mutated = [summarize(records(10, 4, 0, dataset="z3test~x", derived_from="z3test", strategy="cot"))]
    with pytest.raises(MixedCell):
        pair_deltas(base, mutated)


# ------------------------------------------------------------------ validation
def test_validate_rows_flags_inconsistent_row():
    rows = [
        {"label": "sd", "accuracy": "76.47", "unknown": "3.53", "exe_acc": "79.27"},
        {"label": "dcol", "accuracy": "83.53", "unknown": "1.76", "exe_acc": "84.52"},
        {"label": "cot", "accuracy": "54.9", "unknown": "6.86", "exe_acc": "58.94"},
    ]
    checks = validate_rows(rows)
    assert [c.ok for c in checks] == [True, False, True]
    assert checks[1].to_dict()["implied_exe_acc"] == "85.03"


@pytest.mark.parametrize(
    "row",
    [
        {"label": "x", "accuracy": "N/A", "unknown": "0", "exe_acc": "0"},
        {"label": "x", "accuracy": "50", "exe_acc": "50"},
        {"label": "x", "accuracy": "50", "unknown": "0", "exe_acc": "half"},
    ],
)
def test_validate_rows_rejects_malformed_cells(row):
    with pytest.raises(MalformedRow) as err:
        validate_rows([row])
    assert err.value.exit_status == 1


def test_validate_rows_accepts_na_exe_acc_only_when_all_unknown():
    checks = validate_rows([
        {"label": "abstains", "accuracy": "0", "unknown": "100", "exe_acc": "N/A"},
        {"label": "decides", "accuracy": "50", "unknown": "0", "exe_acc": "N/A"},
    ])
    assert [c.ok for c in checks] == [True, False]
    assert checks[0].to_dict()["exe_acc"] == "N/A"


def test_emitted_cells_satisfy_identity():
    cells = summarize_cells(records(997, 611, 83) + records(50, 11, 9, strategy="cot"))
    assert all(check.ok for check in validate_cells(cells))


# ------------------------------------------------------------------ taxonomy
def test_taxonomy_legend_covers_every_category():
    legend = load_taxonomy()
    assert [e.category for e in legend] == list(ErrorCategory)
    assert all(e.hex_color.startswith("#") and len(e.hex_color) == 7 for e in legend)


def test_tag_errors_counts_per_category():
    rows = records(5, 1, 0)
    tags = [
        ErrorTag(ErrorCategory.INFERRING, "p00001"),
        ErrorTag(ErrorCategory.INFERRING, "p00002"),
        ErrorTag(ErrorCategory.COMMONSENSE, "p00003"),
    ]
    (row,) = tag_errors(rows, tags)
    counts = dict(row.counts)
    assert counts[ErrorCategory.INFERRING] == 2
    assert counts[ErrorCategory.COMMONSENSE] == 1
    assert sum(counts.values()) == 3
    assert row.proportion(ErrorCategory.INFERRING) == Fraction(2, 3)


def test_tag_errors_empty_tags():
    (row,) = tag_errors(records(5, 1, 0), [])
    assert row.total == 0
    assert all(n == 0 for _, n in row.counts)


def test_tag_errors_rejects_bad_tags():
    rows = records(5, 1, 0)
    with pytest.raises(TagOnCorrect):
        tag_errors(rows, [ErrorTag(ErrorCategory.REAL_ARITH, "p00000")])
    with pytest.raises(UnknownProblem):
        tag_errors(rows, [ErrorTag(ErrorCategory.REAL_ARITH, "nope")])


def test_load_tags(tmp_path):
    path = tmp_path / "tags.jsonl"
    path.write_text(
        '{"tag": "PARTIAL_UNSAT", "problem_id": "p00003", "note": "stopped early"}\n\n'
        '{"tag": "bitvec_arith", "problem_id": "p00004", "strategy": "sd"}\n',
        encoding="utf-8",
    )
    tags = load_tags(path)
    assert [t.tag for t in tags] == [ErrorCategory.PARTIAL_UNSAT, ErrorCategory.BITVEC_ARITH]
    assert tags[1].strategy == "sd"


# ------------------------------------------------------------------ emission
def test_csv_report(tmp_path):
    cell = summarize(records(10, 7, 1))
    path = emit_report([cell], ReportFormat.CSV, tmp_path)
    with path.open(encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_HEADER
    assert rows[0][-4:] == ["accuracy", "unknown", "exe_acc", "n"]
    assert rows[1] == ["z3test", "sd", "mock", "0", "70.00", "10.00", "77.78", "10"]
    assert len(rows) == 2
    assert (tmp_path / "plot_data.json").exists()


def test_json_report_round_trip(tmp_path):
    cells = summarize_cells(records(10, 7, 1) + records(12, 3, 3, strategy="dcol+sc3"))
    path = emit_report(cells, ReportFormat.JSON, tmp_path)
    assert load_summaries(path) == cells


def test_markdown_report(tmp_path):
    base = summarize_cells(records(10, 8, 0) + records(10, 6, 1, strategy="dcol"))
    mutated = summarize_cells(
        records(10, 4, 0, dataset="z3test~misspell", derived_from="z3test")
        + records(10, 5, 1, dataset="z3test~misspell", derived_from="z3test", strategy="dcol")
    )
    wrong = records(10, 8, 0)
    taxonomy = tag_errors(wrong, [ErrorTag(ErrorCategory.INFERRING, "p00008")])
    path = emit_report(
        base + mutated,
        ReportFormat.MARKDOWN,
        tmp_path,
        deltas=pair_deltas(base, mutated),
        taxonomy=taxonomy,
        checks=validate_cells(base),
    )
    text = path.read_text(encoding="utf-8")
    assert path.name == "report.md"
    assert "| Accuracy | Unknown | Exe. Acc. |" in text
    assert "## z3test~misspell" in text
    assert "| sd | mock | 0 | 80.00 | 0.00 | 80.00 |" in text
    assert "| z3test | z3test~misspell | sd | mock | 40.00 |" in text
    assert "Inferring error" in text

    plot = json.loads((tmp_path / "plot_data.json").read_text(encoding="utf-8"))
    assert plot["metrics"] == ["accuracy", "unknown_rate", "exe_acc"]
    assert plot["taxonomy"]["categories"][0]["color"] == "#4e79a7"


def test_report_is_deterministic(tmp_path):
    cells = summarize_cells(records(30, 20, 4))
    first = emit_report(cells, ReportFormat.MARKDOWN, tmp_path / "a").read_bytes()
    second = emit_report(cells, ReportFormat.MARKDOWN, tmp_path / "b").read_bytes()
    assert first == second


def test_pct_rounds_half_up():
    assert pct(Fraction(12345, 1_000_000)) == "1.23"
    assert pct(Fraction(12350, 1_000_000)) == "1.24"
    assert pct(None) == "N/A"
