from __future__ import annotations

import asyncio
import logging
import os
import threading
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

from ..prompts.builder import PromptPlan, Role
from .spec import (
    BackendConfigError,
    BackendError,
    BackendSpec,
    BackendTimeout,
    Completion,
    HttpError,
    MalformedResponse,
    RateLimited,
    Usage,
)

try:  # pragma: no cover - optional dependency
    from agents import Agent, ModelSettings, OpenAIChatCompletionsModel, RunConfig, Runner
    from agents.exceptions import AgentsException
    from openai import APIConnectionError, APIStatusError, APITimeoutError, AsyncOpenAI, RateLimitError
    _AGENTS_AVAILABLE = True
except ImportError:  # pragma: no cover - optional dependency
    Agent = None  # type: ignore
    Runner = None  # type: ignore
    _AGENTS_AVAILABLE = False


LOGGER = logging.getLogger(__name__)

SEED_MODULUS = 2**31


@dataclass(frozen=True)
class Reply:
    text: str
    usage: Usage
    model: Optional[str] = None


# A transport sends one chat history and returns the next assistant reply.
# It raises BackendError subclasses; anything retryable is retried by ChatClient.
Transport = Callable[[List[Dict[str, str]], int], Reply]


def _retryable(exc: BackendError) -> bool:
    if isinstance(exc, (BackendTimeout, RateLimited)):
        return True
    return isinstance(exc, HttpError) and exc.retryable


class _Pacer:
    """Spaces request starts at least ``1 / rps`` seconds apart across threads."""

    def __init__(self, rps: float, clock: Callable[[], float], sleep: Callable[[float], None]) -> None:
        self.interval = 1.0 / rps
        self.clock = clock
        self.sleep = sleep
        self._next = 0.0
        self._lock = threading.Lock()

    def wait(self) -> None:
        with self._lock:
            now = self.clock()
            start = max(now, self._next)
            self._next = start + self.interval
        if start > now:
            self.sleep(start - now)


class AgentsTransport:
    """Chat completions through the OpenAI Agents SDK against any compatible endpoint."""

    def __init__(self, spec: BackendSpec) -> None:
        if not _AGENTS_AVAILABLE:
            raise BackendConfigError("the openai-agents package is not installed")
        api_key = os.environ.get(spec.api_key_env)
        if not api_key:
            raise BackendConfigError(f"set {spec.api_key_env} to use the http backend")
        self.spec = spec
        self._client = AsyncOpenAI(base_url=spec.endpoint, api_key=api_key, timeout=spec.timeout, max_retries=0)

    def _agent(self, instructions: str, seed: int) -> "Agent":
        settings = ModelSettings(
            temperature=self.spec.temperature,
            max_tokens=self.spec.max_tokens,
            extra_args={"seed": seed % SEED_MODULUS},
        )
        model = OpenAIChatCompletionsModel(model=self.spec.model, openai_client=self._client)
        return Agent(name="Code Simulator", instructions=instructions, model=model, model_settings=settings)

    def __call__(self, history: List[Dict[str, str]], seed: int) -> Reply:
        system = [m["content"] for m in history if m["role"] == Role.SYSTEM.value]
        turns = [m for m in history if m["role"] != Role.SYSTEM.value]
        agent = self._agent("\n\n".join(system), seed)

        # Run in new event loop for threading
        loop = asyncio.new_event_loop()
        asyncio.set_event_loop(loop)
        try:
            result = loop.run_until_complete(
                Runner.run(agent, turns, max_turns=1, run_config=RunConfig(tracing_disabled=True))
            )
        except APITimeoutError as exc:
            raise BackendTimeout(f"no reply from {self.spec.endpoint} within {self.spec.timeout:g}s") from exc
        except RateLimitError as exc:
            raise RateLimited(f"rate limited by {self.spec.endpoint}") from exc
        except APIStatusError as exc:
            raise HttpError(exc.status_code, self.spec.endpoint, str(exc)) from exc
        except APIConnectionError as exc:
            raise HttpError(None, self.spec.endpoint, str(exc)) from exc
        except AgentsException as exc:
            raise MalformedResponse(f"agent run failed: {exc}") from exc
        finally:
            loop.close()

        output = getattr(result, "final_output", None)
        if not isinstance(output, str) or not output.strip():
            raise MalformedResponse(f"empty or non-text reply from {self.spec.endpoint}")
        usage = result.context_wrapper.usage
        return Reply(output, Usage(usage.input_tokens, usage.output_tokens), self.spec.model)


class ChatClient:
    """Retrying, rate-limited chat client that plays a prompt plan turn by turn."""

    def __init__(
        self,
        spec: BackendSpec,
        transport: Optional[Transport] = None,
        *,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        self.spec = spec
        self.transport: Transport = transport if transport is not None else AgentsTransport(spec)
        self.sleep = sleep
        self.clock = clock
        self._slots = threading.BoundedSemaphore(spec.max_in_flight)
        self._pacer = _Pacer(spec.requests_per_second, clock, sleep)

    # ------------------------------------------------------------------ single call
    def send(self, history: List[Dict[str, str]], seed: int) -> tuple[Reply, int]:
        """One reply, retried on timeouts, 429s and 5xx. Returns the reply and the attempt number."""
        last: Optional[BackendError] = None
        for attempt in range(1, self.spec.max_attempts + 1):
            self._pacer.wait()
            try:
                with self._slots:
                    return self.transport(history, seed), attempt
            except BackendError as exc:
                if not _retryable(exc):
                    raise
                last = exc
                if attempt == self.spec.max_attempts:
                    break
                delay = self.spec.backoff[min(attempt - 1, len(self.spec.backoff) - 1)] if self.spec.backoff else 0.0
                LOGGER.warning("Attempt %d/%d failed (%s); retrying in %.1fs", attempt, self.spec.max_attempts, exc, delay)
                self.sleep(delay)
        assert last is not None
        raise last

    # ------------------------------------------------------------------ plan
    def run_plan(self, plan: PromptPlan, seed: int, request_id: str = "") -> Completion:
        history: List[Dict[str, str]] = [m.to_dict() for m in plan.messages]
        usage = Usage()
        attempts = 1
        started = self.clock()
        reply: Optional[Reply] = None
        for stage in range(plan.expects_stages):
            if stage > 0:
                history.append({"role": Role.USER.value, "content": plan.followups[stage - 1]})
            reply, attempt = self.send(history, seed)
            attempts = max(attempts, attempt)
            usage = usage + reply.usage
            history.append({"role": Role.ASSISTANT.value, "content": reply.text})
        assert reply is not None
        return Completion(
            text=reply.text,
            usage=usage,
            latency=self.clock() - started,
            attempt=attempts,
            request_id=request_id,
            transcript=tuple(history),
        )
