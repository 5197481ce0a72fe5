from __future__ import annotations

import hashlib

import numpy as np


def seed_value(*parts: object) -> int:
    token = "\x1f".join(str(part) for part in parts)
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big", signed=False)


def make_rng(*parts: object) -> np.random.Generator:
    """Independent generator for a tuple of tokens; same tokens, same stream."""
    return np.random.default_rng(seed_value(*parts))


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
