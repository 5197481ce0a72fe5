import itertools
from pathlib import Path

import numpy as np
import pytest

from src.logic.core import Assignment, TernaryAnswer, Verdict
from src.oracle import NotUnsat, OracleConfig, UnboundVariable, entailment, evaluate, extract_core, solve
from src.oracle.evaluate import evaluate_columns
from src.rng import make_rng
from src.smtlib import parse
from src.smtlib.ast import BOOL, FALSE, INT, TRUE, App, Const, Op, Var, bitvec

SAMPLES = Path(__file__).resolve().parents[1] / "data" / "smtlib"


# ------------------------------------------------------------------ helpers
def random_bool_term(rng, names, depth):
    if depth == 0 or rng.random() < 0.35:
        name = names[int(rng.integers(len(names)))]
        return name if rng.random() < 0.7 else f"(not {name})"
    op = ["and", "or", "=>", "=", "xor", "ite", "not"][int(rng.integers(7))]
    if op == "not":
        return f"(not {random_bool_term(rng, names, depth - 1)})"
    arity = 3 if op == "ite" else int(rng.integers(2, 4)) if op in ("and", "or") else 2
    args = " ".join(random_bool_term(rng, names, depth - 1) for _ in range(arity))
    return f"({op} {args})"


def random_propositional_script(rng, max_vars=12, max_assertions=40):
    n = int(rng.integers(1, max_vars + 1))
    names = [f"p{i}" for i in range(n)]
    decls = "".join(f"(declare-const {name} Bool)\n" for name in names)
    count = int(rng.integers(1, max_assertions + 1))
    body = "".join(f"(assert {random_bool_term(rng, names, 2)})\n" for _ in range(count))
    return parse(decls + body + "(check-sat)\n")


def truth_table_verdict(script):
    names = [name for name, _ in script.variables()]
    rows = 1 << len(names)
    index = np.arange(rows)
    columns = {name: ((index >> i) & 1).astype(bool) for i, name in enumerate(names)}
    ok = np.ones(rows, dtype=bool)
    for term in script.assertions:
        ok &= evaluate_columns(term, columns, rows).astype(bool)
    return Verdict.SAT if ok.any() else Verdict.UNSAT


def random_int_script(rng):
    names = ["x", "y", "z"][: int(rng.integers(1, 4))]
    decls = "".join(f"(declare-const {n} Int)\n" for n in names)
    atoms = []
    for _ in range(int(rng.integers(1, 5))):
        a, b = (names[int(rng.integers(len(names)))] for _ in range(2))
        op = ["<", "<=", ">", ">=", "="][int(rng.integers(5))]
        k = int(rng.integers(-6, 7))
        offset = str(k) if k >= 0 else f"(- {-k})"
        atoms.append(f"(assert ({op} (+ {a} {offset}) {b}))")
    return parse(decls + "\n".join(atoms))


def assert_witness(script, result):
    assert result.witness is not None
    for term in script.assertions:
        assert evaluate(term, result.witness) is True


# ------------------------------------------------------------------ evaluate
def test_evaluate_examples():
    assert evaluate(App(Op.AND, (TRUE, FALSE), BOOL), {}) is False
    x = Var("x", INT)
    assert evaluate(App(Op.ADD, (x, Const(1, INT)), INT), Assignment({"x": 2})) == 3
    bv4 = bitvec(4)
    shifted = App(Op.BVSHL, (Const(0b0011, bv4), Const(1, bv4)), bv4)
    assert evaluate(shifted, {}) == 0b0110
    assert evaluate(App(Op.BVSHL, (Const(0b0011, bv4), Const(5, bv4)), bv4), {}) == 0
    assert evaluate(App(Op.BVADD, (Const(15, bv4), Const(1, bv4)), bv4), {}) == 0


def test_evaluate_unbound_variable():
    with pytest.raises(UnboundVariable) as info:
        evaluate(Var("ghost", BOOL), {})
    assert info.value.name == "ghost"


# ------------------------------------------------------------------ solve
def test_assert_false_is_unsat_with_core():
    result = solve(parse("(assert false)"), with_core=True)
    assert result.verdict is Verdict.UNSAT
    assert result.core.sorted() == (0,)


def test_empty_script_is_sat():
    result = solve(parse(""))
    assert result.verdict is Verdict.SAT
    assert result.witness == Assignment({})


def test_de_morgan_negation_is_unsat():
    script = parse((SAMPLES / "de_morgan.smt2").read_text())
    assert solve(script).verdict is Verdict.UNSAT


def test_int_sign_conflict_core():
    result = solve(parse((SAMPLES / "int_sign_conflict.smt2").read_text()), with_core=True)
    assert result.verdict is Verdict.UNSAT
    assert not result.exhausted
    assert result.core.sorted() == (0, 1)


@pytest.mark.parametrize(
    "name, expected",
    [
        ("de_morgan.smt2", Verdict.UNSAT),
        ("int_sign_conflict.smt2", Verdict.UNSAT),
        ("int_linear_sat.smt2", Verdict.SAT),
        ("bv_shift.smt2", Verdict.UNSAT),
        ("quantified_bound.smt2", Verdict.UNKNOWN),
        ("real_square.smt2", Verdict.UNKNOWN),
        ("pigeonhole_3_2.smt2", Verdict.UNSAT),
        ("define_fun_let.smt2", Verdict.SAT),
        ("khop_chain.smt2", Verdict.SAT),
        ("bv_wraparound.smt2", Verdict.SAT),
    ],
)
def test_sample_corpus_verdicts(name, expected):
    script = parse((SAMPLES / name).read_text())
    result = solve(script)
    assert result.verdict is expected
    if expected is Verdict.SAT:
        assert_witness(script, result)


def test_unused_declarations_get_default_witness_values():
    result = solve(parse("(declare-const a Bool)(declare-const b Bool)(declare-const n Int)(assert a)"))
    assert result.witness.as_dict() == {"a": True, "b": False, "n": 0}


def test_unbounded_int_unsat_is_not_claimed():
    # x*x = 2 has no integer model, but nothing bounds x outside the domain.
    result = solve(parse("(declare-const x Int)(assert (= (* x x) 2))"))
    assert result.verdict is Verdict.UNKNOWN
    assert result.exhausted


def test_bounded_nonlinear_int_unsat_is_proven():
    result = solve(parse("(declare-const x Int)(assert (<= 0 x))(assert (<= x 100))(assert (= (* x x) 2))"))
    assert result.verdict is Verdict.UNSAT


def test_sat_witness_outside_default_domain():
    script = parse("(declare-const x Int)(assert (= x 40))")
    result = solve(script)
    assert result.verdict is Verdict.SAT
    assert result.witness["x"] == 40


def test_limits_surface_as_exhausted_unknown():
    cfg = OracleConfig(max_bool_vars=2)
    result = solve(parse("(declare-const a Bool)(declare-const b Bool)(declare-const c Bool)(assert (or a b c))"), cfg)
    assert result.verdict is Verdict.UNKNOWN and result.exhausted


def test_quantified_script_is_unknown_and_has_no_core():
    script = parse(
        "(declare-const x Int)(declare-const y Int)"
        "(assert (= y (+ x 1)))(assert (forall ((y Int)) (=> (<= y 0) (< x y))))"
    )
    result = solve(script)
    assert result.verdict is Verdict.UNKNOWN
    assert not result.exhausted
    with pytest.raises(NotUnsat):
        extract_core(script)


def test_external_solver_hook():
    script = parse("(declare-const r Real)(assert (> r 1.0))")
    assert solve(script, OracleConfig(external_solver_cmd="echo sat {file}")).verdict is Verdict.SAT
    assert solve(script, OracleConfig(external_solver_cmd="echo unsat")).verdict is Verdict.UNSAT
    assert solve(script, OracleConfig(external_solver_cmd="false {file}")).verdict is Verdict.UNKNOWN


def test_external_verdicts_carry_no_witness_or_core():
    script = parse("(declare-const r Real)(assert (> r 1.0))")
    sat = solve(script, OracleConfig(external_solver_cmd="echo sat {file}"), with_core=True)
    assert sat.method == "external" and sat.witness is None
    unsat = solve(script, OracleConfig(external_solver_cmd="echo unsat {file}"), with_core=True)
    assert unsat.method == "external" and unsat.core is None


# ------------------------------------------------------------------ cores
def test_core_drops_irrelevant_assertion():
    script = parse(
        "(declare-const x Int)(declare-const y Int)(assert (= x 1))(assert (> x y))(assert (> y x))"
    )
    assert extract_core(script).sorted() == (1, 2)


def test_core_revisits_members_kept_for_unknown():
    # Dropping the y range first leaves y unbounded (UNKNOWN), so it survives
    # the first pass; only the x assertions are needed.
    script = parse(
        "(declare-const x Int)(declare-const y Int)"
        "(assert (and (>= y (- 20)) (<= y 20)))"
        "(assert (> (* y y) 100))"
        "(assert (and (>= x 0) (<= x 2)))"
        "(assert (= (* x x) 2))"
    )
    core = extract_core(script)
    assert core.sorted() == (2, 3)
    for member in core.assertion_indices:
        rest = core.assertion_indices - {member}
        assert solve(script.subscript(rest)).verdict is not Verdict.UNSAT


def test_core_requires_unsat():
    with pytest.raises(NotUnsat):
        extract_core(parse("(declare-const a Bool)(assert a)"))


# ------------------------------------------------------------------ entailment
def test_entailment_answers():
    chain = "(declare-const p Bool)(declare-const q Bool)(declare-const r Bool)(assert p)(assert (=> p q))"
    assert entailment(parse(chain + "(assert q)")) is TernaryAnswer.TRUE
    assert entailment(parse(chain + "(assert (not q))")) is TernaryAnswer.FALSE
    assert entailment(parse(chain + "(assert r)")) is TernaryAnswer.UNCERTAIN


def test_entailment_matches_brute_force():
    rng = make_rng("entailment-test")
    for _ in range(60):
        script = random_propositional_script(rng, max_vars=5, max_assertions=3)
        premises = script.with_assertions(script.assertions[:-1])
        if truth_table_verdict(premises) is Verdict.UNSAT:
            continue
        names = [n for n, _ in script.variables()]
        entailed = True
        for values in itertools.product([False, True], repeat=len(names)):
            env = dict(zip(names, values))
            if all(evaluate(t, env) for t in premises.assertions) and not evaluate(script.assertions[-1], env):
                entailed = False
                break
        assert (entailment(script) is TernaryAnswer.TRUE) == entailed


# ------------------------------------------------------------------ properties
def _dpll_agreement(count):
    rng = make_rng("dpll-agreement", 0)
    for _ in range(count):
        script = random_propositional_script(rng)
        result = solve(script)
        assert result.verdict is truth_table_verdict(script)
        if result.verdict is Verdict.SAT:
            assert_witness(script, result)


def test_dpll_agrees_with_truth_table():
    _dpll_agreement(60)


@pytest.mark.slow
def test_dpll_agrees_with_truth_table_at_scale():
    _dpll_agreement(1000)


def _self_certification(count):
    rng = make_rng("self-certification", 0)
    for i in range(count):
        if i % 2:
            script = random_propositional_script(rng, max_vars=6, max_assertions=8)
        else:
            script = random_int_script(rng)
        result = solve(script)
        if result.verdict is Verdict.SAT:
            assert_witness(script, result)
        elif result.verdict is Verdict.UNSAT:
            core = extract_core(script)
            assert solve(script.subscript(core.assertion_indices)).verdict is Verdict.UNSAT
            for member in core.assertion_indices:
                rest = core.assertion_indices - {member}
                assert solve(script.subscript(rest)).verdict is not Verdict.UNSAT


def test_witnesses_and_cores_certify_themselves():
    _self_certification(60)


@pytest.mark.slow
def test_witnesses_and_cores_certify_themselves_at_scale():
    _self_certification(500)


def test_enumeration_is_monotone_in_domain():
    rng = make_rng("monotone-domain")
    small, large = OracleConfig(int_domain=(-3, 3)), OracleConfig(int_domain=(-12, 12))
    for _ in range(80):
        script = random_int_script(rng)
        if solve(script, small).verdict is Verdict.SAT:
            assert solve(script, large).verdict is Verdict.SAT
