import json
from pathlib import Path

import pytest

from src.llm import (
    BackendConfigError,
    BackendKind,
    BackendSpec,
    ChatClient,
    HttpError,
    MalformedResponse,
    RateLimited,
    Reply,
    TranscriptCache,
    Usage,
    complete,
    probe,
)
from src.llm.doubles import oracle_answer
from src.logic.core import Dialect, Problem, TernaryAnswer, Verdict
from src.oracle import OracleConfig
from src.prompts import DColMode, DColOrder, Strategy, StrategyTag, build

SAMPLES = Path(__file__).resolve().parents[1] / "data" / "smtlib"
PERFECT = BackendSpec(BackendKind.PERFECT_ORACLE)
ADVERSARIAL = BackendSpec(BackendKind.ADVERSARIAL)
COT = Strategy(StrategyTag.COT)


def plan_for(code, truth=Verdict.UNSAT, strategy=COT, problem_id="p"):
    return build(Problem(problem_id, Dialect.SMTLIB, code, truth), strategy)


class FakeClock:
    def __init__(self):
        self.now = 0.0
        self.sleeps = []

    def __call__(self):
        return self.now

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.now += seconds


class ScriptedTransport:
    """Returns or raises the queued outcomes in order."""

    def __init__(self, *outcomes):
        self.outcomes = list(outcomes)
        self.calls = []

    def __call__(self, history, seed):
        self.calls.append([dict(m) for m in history])
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return Reply(outcome, Usage(10, 5), "fake-model")


def http_spec(**overrides):
    return BackendSpec(BackendKind.HTTP_CHAT, model="fake-model", endpoint="http://127.0.0.1:9/v1", **overrides)


def client_for(transport, **overrides):
    clock = FakeClock()
    return ChatClient(http_spec(**overrides), transport, sleep=clock.sleep, clock=clock), clock


# ------------------------------------------------------------------ doubles
def test_perfect_and_adversarial_on_contradiction():
    plan = plan_for("(assert false)\n")
    assert complete(PERFECT, plan, 0).text.endswith("FINAL: UNSAT")
    assert complete(ADVERSARIAL, plan, 0).text.endswith("FINAL: SAT")


def test_perfect_reports_witness():
    text = complete(PERFECT, plan_for("(declare-const a Bool)\n(assert a)\n", Verdict.SAT), 0).text
    assert "a = True" in text
    assert text.endswith("FINAL: SAT")


def test_perfect_undecided_on_broken_code():
    text = complete(PERFECT, plan_for("(assert (and true)\n"), 0).text
    assert text.endswith("FINAL: UNKNOWN")


def test_ternary_doubles():
    code = "(declare-const a Bool)\n(declare-const b Bool)\n(assert a)\n(assert (=> a b))\n(assert b)\n"
    plan = plan_for(code, TernaryAnswer.TRUE)
    assert complete(PERFECT, plan, 0).text.endswith("FINAL: TRUE")
    assert complete(ADVERSARIAL, plan, 0).text.endswith("FINAL: FALSE")


def test_wrong_doubles_never_answer_uncertain_on_uncertain_truth():
    code = "(declare-const a Bool)\n(declare-const b Bool)\n(assert a)\n(assert b)\n"
    plan = plan_for(code, TernaryAnswer.UNCERTAIN)
    assert complete(PERFECT, plan, 0).text.endswith("FINAL: UNCERTAIN")
    hopeless = BackendSpec(BackendKind.MOCK, mock_accuracy=0.0)
    finals = {complete(hopeless, plan, seed).text.splitlines()[-1] for seed in range(20)}
    assert finals == {"FINAL: TRUE", "FINAL: FALSE"}
    for seed in range(5):
        assert complete(ADVERSARIAL, plan, seed).text.splitlines()[-1] in ("FINAL: TRUE", "FINAL: FALSE")


def test_oracle_answer_trusts_external_sat_without_model():
    plan = plan_for("(declare-const r Real)\n(assert (> r 1.0))\n", Verdict.SAT)
    answer, detail = oracle_answer(plan, OracleConfig(external_solver_cmd="echo sat {file}"))
    assert answer is Verdict.SAT
    assert "external solver" in detail


def test_certain_mock_matches_perfect():
    mock = BackendSpec(BackendKind.MOCK, mock_accuracy=1.0)
    for path in sorted(SAMPLES.glob("*.smt2")):
        plan = plan_for(path.read_text(encoding="utf-8"), problem_id=path.stem)
        for seed in range(3):
            assert complete(mock, plan, seed).text == complete(PERFECT, plan, seed).text


def test_hopeless_mock_matches_adversarial():
    mock = BackendSpec(BackendKind.MOCK, mock_accuracy=0.0)
    plan = plan_for("(assert false)\n")
    assert complete(mock, plan, 7).text == complete(ADVERSARIAL, plan, 7).text


def test_stochastic_mock_is_deterministic_per_seed():
    mock = BackendSpec(BackendKind.MOCK, mock_accuracy=0.5)
    plan = plan_for("(assert false)\n")
    first = [complete(mock, plan, seed).text for seed in range(20)]
    assert first == [complete(mock, plan, seed).text for seed in range(20)]
    assert {text.splitlines()[-1] for text in first} == {"FINAL: SAT", "FINAL: UNSAT"}


def test_staged_plan_transcript():
    staged = Strategy(StrategyTag.DCOL, DColOrder.SAT_FIRST, DColMode.STAGED)
    completion = complete(PERFECT, plan_for("(assert false)\n", strategy=staged), 0)
    roles = [m["role"] for m in completion.transcript]
    assert roles == ["system", "user", "assistant", "user", "assistant", "user", "assistant"]
    assert completion.text.endswith("FINAL: UNSAT")
    assert all("FINAL:" not in m["content"] for m in completion.transcript[2:5:2])


def test_scripted_mock(tmp_path):
    script = tmp_path / "responses.jsonl"
    lines = [
        {"id": "p", "response": "Looks fine. FINAL: SAT"},
        {"id": "p", "strategy": "sd", "response": "FINAL: UNSAT"},
    ]
    script.write_text("\n".join(json.dumps(line) for line in lines) + "\n", encoding="utf-8")
    spec = BackendSpec.parse(f"mock:{script}")
    assert spec.mock_script == str(script)
    assert complete(spec, plan_for("(assert false)\n"), 0).text == "Looks fine. FINAL: SAT"
    assert complete(spec, plan_for("(assert false)\n", strategy=Strategy(StrategyTag.SD)), 0).text == "FINAL: UNSAT"
    with pytest.raises(MalformedResponse):
        complete(spec, plan_for("(assert false)\n", problem_id="other"), 0)
    assert probe(spec).healthy


def test_probe_doubles_and_missing_script(tmp_path):
    assert probe(PERFECT).healthy
    missing = BackendSpec(BackendKind.MOCK, mock_script=str(tmp_path / "nope.jsonl"))
    with pytest.raises(BackendConfigError):
        probe(missing)


def test_oracle_answer_outside_smtlib():
    plan = build(Problem("z", Dialect.Z3PY_TEXT, "x = Int('x')\n", Verdict.SAT), COT)
    answer, _ = oracle_answer(plan)
    assert answer is Verdict.UNKNOWN


# ------------------------------------------------------------------ http client
def test_retries_rate_limits_on_schedule():
    transport = ScriptedTransport(RateLimited("slow down"), HttpError(503, "http://x"), "FINAL: SAT")
    client, clock = client_for(transport)
    completion = client.run_plan(plan_for("(assert true)\n"), 0)
    assert completion.text == "FINAL: SAT"
    assert completion.attempt == 3
    assert clock.sleeps[:2] == [1.0, 2.0]


def test_client_errors_are_not_retried():
    transport = ScriptedTransport(HttpError(400, "http://x", "bad request"), "FINAL: SAT")
    client, _ = client_for(transport)
    with pytest.raises(HttpError) as err:
        client.run_plan(plan_for("(assert true)\n"), 0)
    assert err.value.status == 400
    assert len(transport.calls) == 1


def test_retries_are_bounded():
    transport = ScriptedTransport(*[RateLimited("again")] * 2)
    client, _ = client_for(transport, max_attempts=2)
    with pytest.raises(RateLimited):
        client.run_plan(plan_for("(assert true)\n"), 0)
    assert len(transport.calls) == 2


def test_staged_plan_over_http_sums_usage():
    staged = Strategy(StrategyTag.DCOL, DColOrder.UNSAT_FIRST, DColMode.STAGED)
    plan = plan_for("(assert false)\n", strategy=staged)
    transport = ScriptedTransport("extracted", "chains", "FINAL: UNSAT")
    client, _ = client_for(transport)
    completion = client.run_plan(plan, 3)
    assert completion.usage == Usage(30, 15)
    assert transport.calls[2][-1]["content"] == plan.followups[1]
    assert transport.calls[1][-2] == {"role": "assistant", "content": "extracted"}


def test_cache_replays_completions(tmp_path):
    cache = TranscriptCache(tmp_path / "cache")
    transport = ScriptedTransport("FINAL: UNSAT")
    client, _ = client_for(transport)
    plan = plan_for("(assert false)\n")
    first = complete(client.spec, plan, 1, client=client, cache=cache)
    second = complete(client.spec, plan, 1, client=client, cache=cache)
    assert not first.cache_hit and second.cache_hit
    assert second.text == first.text
    assert second.request_id == first.request_id
    assert len(transport.calls) == 1


def test_unreachable_endpoint_names_endpoint(monkeypatch):
    pytest.importorskip("agents")
    monkeypatch.setenv("HARNESS_API_KEY", "test-key")
    spec = http_spec(max_attempts=1, timeout=5.0)
    with pytest.raises(HttpError) as err:
        probe(spec)
    assert "http://127.0.0.1:9/v1" in str(err.value)


def test_http_backend_needs_key(monkeypatch):
    pytest.importorskip("agents")
    monkeypatch.delenv("HARNESS_API_KEY", raising=False)
    with pytest.raises(BackendConfigError):
        probe(http_spec())
