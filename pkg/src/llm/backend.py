from __future__ import annotations

import logging
import time
from pathlib import Path
from typing import Optional

from ..logic.core import Dialect, Problem, Verdict
from ..oracle.solver import OracleConfig
from ..prompts.builder import PromptPlan, build
from ..prompts.strategy import Strategy, StrategyTag
from .agents import ChatClient
from .cache import TranscriptCache, cache_key
from .doubles import complete_double, load_mock_script
from .spec import BackendConfigError, BackendError, BackendKind, BackendSpec, Completion, HealthRecord


LOGGER = logging.getLogger(__name__)

_PROBE_PROBLEM = Problem("probe", Dialect.SMTLIB, "(assert false)\n", Verdict.UNSAT)


def complete(
    spec: BackendSpec,
    plan: PromptPlan,
    seed: int,
    *,
    client: Optional[ChatClient] = None,
    cache: Optional[TranscriptCache] = None,
    oracle: Optional[OracleConfig] = None,
) -> Completion:
    """Produce one completion for a plan; doubles bypass the cache and the network."""
    if spec.is_double:
        return complete_double(spec, plan, seed, oracle)

    key = cache_key(spec, plan.plan_hash, seed)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    client = client or ChatClient(spec)
    completion = client.run_plan(plan, seed, request_id=key)
    if cache is not None:
        request = {
            "model": spec.model,
            "endpoint": spec.endpoint,
            "temperature": spec.temperature,
            "max_tokens": spec.max_tokens,
            "seed": seed,
            "messages": [m.to_dict() for m in plan.messages],
            "followups": list(plan.followups),
        }
        cache.put(key, request, completion)
    return completion


def probe(spec: BackendSpec, *, client: Optional[ChatClient] = None) -> HealthRecord:
    """Fail fast on configuration; for HTTP, one minimal round trip.

    Transport failures propagate as the same errors ``complete`` raises.
    """
    if spec.kind is BackendKind.MOCK and spec.mock_script is not None:
        if not Path(spec.mock_script).exists():
            raise BackendConfigError(f"mock script not found at {spec.mock_script}")
        entries = load_mock_script(str(spec.mock_script))
        return HealthRecord(spec.label, True, f"{len(entries)} scripted responses")
    if spec.is_double:
        return HealthRecord(spec.label, True, "test double")

    client = client or ChatClient(spec)
    plan = build(_PROBE_PROBLEM, Strategy(StrategyTag.SD))
    started = time.monotonic()
    try:
        reply, _ = client.send([m.to_dict() for m in plan.messages], 0)
    except BackendError:
        LOGGER.error("Probe of %s at %s failed", spec.label, spec.endpoint)
        raise
    latency = time.monotonic() - started
    LOGGER.info("Probe of %s answered in %.2fs", spec.label, latency)
    return HealthRecord(spec.label, True, reply.text[:80], model_echo=reply.model, latency=latency)
