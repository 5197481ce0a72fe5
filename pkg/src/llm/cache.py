from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from pathlib import Path
from typing import Dict, Optional, Union

from ..rng import sha256_text
from ..settings import CACHE_DIR_ENV
from .spec import BackendSpec, Completion


LOGGER = logging.getLogger(__name__)


def cache_key(spec: BackendSpec, plan_hash: str, seed: int) -> str:
    payload = {
        "kind": spec.kind.value,
        "model": spec.model,
        "endpoint": spec.endpoint,
        "temperature": spec.temperature,
        "max_tokens": spec.max_tokens,
        "plan": plan_hash,
        "seed": seed,
    }
    return sha256_text(json.dumps(payload, sort_keys=True))


class TranscriptCache:
    """On-disk store of raw request/response transcripts, one JSON file per key."""

    def __init__(self, root: Union[str, Path]) -> None:
        self.root = Path(root)
        self._locks: Dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    @classmethod
    def from_env(cls) -> Optional["TranscriptCache"]:
        root = os.environ.get(CACHE_DIR_ENV)
        return cls(root) if root else None

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def _lock(self, key: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(key, threading.Lock())

    def get(self, key: str) -> Optional[Completion]:
        path = self._path(key)
        if not path.exists():
            return None
        try:
            with path.open("r", encoding="utf-8") as fh:
                data = json.load(fh)
            completion = Completion.from_dict(data["response"], cache_hit=True)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            LOGGER.warning("Ignoring unreadable cache entry %s: %s", path, exc)
            return None
        LOGGER.debug("Cache hit %s", key[:12])
        return completion

    def put(self, key: str, request: Dict[str, object], completion: Completion) -> None:
        path = self._path(key)
        body = json.dumps({"request": request, "response": completion.to_dict()}, ensure_ascii=False, indent=1)
        with self._lock(key):
            path.parent.mkdir(parents=True, exist_ok=True)
            handle, tmp = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp")
            try:
                with os.fdopen(handle, "w", encoding="utf-8") as fh:
                    fh.write(body)
                os.replace(tmp, path)
            except OSError as exc:
                LOGGER.warning("Could not write cache entry %s: %s", path, exc)
                try:
                    os.unlink(tmp)
                except OSError:
                    pass
