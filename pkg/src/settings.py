from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple


@dataclass(frozen=True)
class OracleDefaults:
    int_domain: Tuple[int, int] = (-8, 8)
    max_bool_vars: int = 24
    max_enum_states: int = 2**20
    max_cnf_clauses: int = 200_000
    enum_chunk: int = 2**16
    external_timeout: float = 30.0


@dataclass(frozen=True)
class BackendDefaults:
    model: str = "gpt-4o-mini"
    endpoint: str = "https://api.openai.com/v1"
    single_temperature: float = 0.0
    sampling_temperature: float = 0.7
    max_tokens: int = 2048
    timeout: float = 120.0
    max_attempts: int = 4
    backoff: Tuple[float, ...] = (1.0, 2.0, 4.0)
    max_in_flight: int = 8
    requests_per_second: float = 5.0


@dataclass(frozen=True)
class PromptDefaults:
    context_budget: int = 16_000
    chars_per_token: int = 4


@dataclass(frozen=True)
class RunDefaults:
    parallelism: int = 4
    seed: int = 0
    samples_per_order: int = 3


PACKAGE_DIR = Path(__file__).resolve().parent
DATA_DIR = PACKAGE_DIR / "data"
TEMPLATE_DIR = PACKAGE_DIR / "prompts" / "templates"
REPORT_TEMPLATE_DIR = PACKAGE_DIR / "report" / "templates"
TAXONOMY_FILE = DATA_DIR / "taxonomy.json"

API_KEY_ENV = "HARNESS_API_KEY"
CACHE_DIR_ENV = "HARNESS_CACHE_DIR"
SOLVER_TIMEOUT_ENV = "HARNESS_SOLVER_TIMEOUT"


ORACLE = OracleDefaults()
BACKEND = BackendDefaults()
PROMPT = PromptDefaults()
RUN = RunDefaults()
