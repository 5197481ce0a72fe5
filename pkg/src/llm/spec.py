from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from ..errors import HarnessError
from ..rng import sha256_text
from ..settings import API_KEY_ENV, BACKEND


class BackendKind(enum.Enum):
    HTTP_CHAT = "http"
    PERFECT_ORACLE = "perfect"
    ADVERSARIAL = "adversarial"
    MOCK = "mock"


DOUBLES = {BackendKind.PERFECT_ORACLE, BackendKind.ADVERSARIAL, BackendKind.MOCK}


# ------------------------------------------------------------------ errors
class BackendError(HarnessError):
    code = 700


class BackendTimeout(BackendError):
    code = 701


class HttpError(BackendError):
    code = 702

    def __init__(self, status: Optional[int], endpoint: str, detail: str = "") -> None:
        shown = status if status is not None else "unreachable"
        message = f"HTTP {shown} from {endpoint}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.status = status
        self.endpoint = endpoint

    @property
    def retryable(self) -> bool:
        return self.status is None or self.status >= 500


class RateLimited(BackendError):
    code = 703


class MalformedResponse(BackendError):
    code = 704


class BackendConfigError(BackendError):
    code = 705
    exit_status = 1


# ------------------------------------------------------------------ spec
@dataclass(frozen=True)
class BackendSpec:
    kind: BackendKind
    model: str = BACKEND.model
    endpoint: str = BACKEND.endpoint
    temperature: float = BACKEND.single_temperature
    max_tokens: int = BACKEND.max_tokens
    timeout: float = BACKEND.timeout
    max_attempts: int = BACKEND.max_attempts
    backoff: Tuple[float, ...] = BACKEND.backoff
    mock_script: Optional[str] = None
    mock_accuracy: Optional[float] = None
    max_in_flight: int = BACKEND.max_in_flight
    requests_per_second: float = BACKEND.requests_per_second
    api_key_env: str = API_KEY_ENV

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise BackendConfigError("temperature must be non-negative")
        if self.max_attempts < 1:
            raise BackendConfigError("max_attempts must be at least 1")
        if self.max_tokens < 1 or self.timeout <= 0:
            raise BackendConfigError("max_tokens and timeout must be positive")
        if self.max_in_flight < 1 or self.requests_per_second <= 0:
            raise BackendConfigError("max_in_flight and requests_per_second must be positive")
        if any(delay < 0 for delay in self.backoff):
            raise BackendConfigError("backoff delays cannot be negative")
        if self.kind is BackendKind.MOCK:
            if (self.mock_script is None) == (self.mock_accuracy is None):
                raise BackendConfigError("a mock backend needs exactly one of mock_script or mock_accuracy")
            if self.mock_accuracy is not None and not 0.0 <= self.mock_accuracy <= 1.0:
                raise BackendConfigError("mock_accuracy must be a probability")
        if self.kind is BackendKind.HTTP_CHAT and not (self.model and self.endpoint):
            raise BackendConfigError("an http backend needs a model and an endpoint")

    @property
    def is_double(self) -> bool:
        return self.kind in DOUBLES

    @property
    def label(self) -> str:
        if self.kind is BackendKind.HTTP_CHAT:
            return f"http:{self.model}"
        if self.kind is BackendKind.MOCK:
            if self.mock_accuracy is not None:
                return f"mock:{self.mock_accuracy:g}"
            return f"mock:{self.mock_script}"
        return self.kind.value

    @property
    def fingerprint(self) -> str:
        payload = asdict(self)
        payload["kind"] = self.kind.value
        payload["backoff"] = list(self.backoff)
        return sha256_text(json.dumps(payload, sort_keys=True))[:16]

    @classmethod
    def parse(cls, text: str, **overrides) -> "BackendSpec":
        """``perfect``, ``adversarial``, ``mock:0.7``, ``mock:responses.jsonl`` or ``http:<model>``."""
        head, _, arg = text.strip().partition(":")
        try:
            kind = BackendKind(head.lower())
        except ValueError as exc:
            raise BackendConfigError(f"unknown backend {text!r}") from exc
        if kind is BackendKind.MOCK:
            if not arg:
                raise BackendConfigError("mock backend needs an accuracy or a script path")
            try:
                overrides.setdefault("mock_accuracy", float(arg))
            except ValueError:
                overrides.setdefault("mock_script", arg)
        elif kind is BackendKind.HTTP_CHAT and arg:
            overrides.setdefault("model", arg)
        elif arg:
            raise BackendConfigError(f"{kind.value} takes no argument: {text!r}")
        return cls(kind=kind, **overrides)


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(self.prompt_tokens + other.prompt_tokens, self.completion_tokens + other.completion_tokens)


@dataclass(frozen=True)
class Completion:
    text: str
    usage: Optional[Usage] = None
    latency: float = 0.0
    attempt: int = 1
    cache_hit: bool = False
    request_id: str = ""
    transcript: Tuple[Dict[str, str], ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict[str, object]:
        return {
            "text": self.text,
            "usage": asdict(self.usage) if self.usage else None,
            "latency": self.latency,
            "attempt": self.attempt,
            "request_id": self.request_id,
            "transcript": [dict(m) for m in self.transcript],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object], *, cache_hit: bool = False) -> "Completion":
        usage = data.get("usage")
        transcript: List[Dict[str, str]] = list(data.get("transcript") or [])
        return cls(
            text=str(data["text"]),
            usage=Usage(**usage) if isinstance(usage, dict) else None,
            latency=float(data.get("latency", 0.0)),
            attempt=int(data.get("attempt", 1)),
            cache_hit=cache_hit,
            request_id=str(data.get("request_id", "")),
            transcript=tuple(transcript),
        )


@dataclass(frozen=True)
class HealthRecord:
    backend: str
    healthy: bool
    detail: str = ""
    model_echo: Optional[str] = None
    latency: float = 0.0

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)
