"""
Answer producers: the chat-completion client over the OpenAI Agents SDK and the deterministic doubles.
"""

from .agents import AgentsTransport, ChatClient, Reply  # noqa: F401
from .backend import complete, probe  # noqa: F401
from .cache import TranscriptCache, cache_key  # noqa: F401
from .spec import (  # noqa: F401
    BackendConfigError,
    BackendError,
    BackendKind,
    BackendSpec,
    BackendTimeout,
    Completion,
    HealthRecord,
    HttpError,
    MalformedResponse,
    RateLimited,
    Usage,
)
