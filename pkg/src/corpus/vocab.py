from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

from ..settings import DATA_DIR


VOCAB_FILE = DATA_DIR / "khop_vocab.json"


@dataclass(frozen=True)
class Vocabulary:
    entities: Tuple[str, ...]
    concepts: Tuple[str, ...]


@lru_cache(maxsize=1)
def load_vocabulary() -> Vocabulary:
    if not VOCAB_FILE.exists():
        raise FileNotFoundError(f"Vocabulary file not found at {VOCAB_FILE}")
    with VOCAB_FILE.open("r", encoding="utf-8") as f:
        raw = json.load(f)
    entities = tuple(raw["entities"])
    concepts = tuple(raw["concepts"])
    if not entities or len(set(concepts)) != len(concepts):
        raise ValueError(f"Vocabulary at {VOCAB_FILE} needs entities and distinct concepts")
    return Vocabulary(entities=entities, concepts=concepts)
