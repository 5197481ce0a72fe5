from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 backport with the same API
    import tomli as tomllib

from ..errors import HarnessError
from ..llm.spec import BackendConfigError, BackendKind, BackendSpec
from ..prompts.strategy import DColMode, DColOrder, InvalidStrategy, Strategy, StrategyTag
from ..settings import BACKEND, RUN


LOGGER = logging.getLogger(__name__)


class RunConfigError(HarnessError):
    code = 801
    exit_status = 1


@dataclass(frozen=True)
class SelfConsistency:
    samples_per_order: int = RUN.samples_per_order
    # empty means: sample the configured strategy as it is
    orders: Tuple[DColOrder, ...] = ()

    def __post_init__(self) -> None:
        if self.samples_per_order < 1:
            raise RunConfigError("samples_per_order must be at least 1")
        if len(set(self.orders)) != len(self.orders):
            raise RunConfigError("self-consistency orders repeat")

    def to_dict(self) -> Dict[str, object]:
        return {"samples_per_order": self.samples_per_order, "orders": [o.value for o in self.orders]}


BIDIRECTIONAL = (DColOrder.SAT_FIRST, DColOrder.UNSAT_FIRST)


@dataclass(frozen=True)
class RunConfig:
    dataset: Path
    strategy: Strategy
    backend: BackendSpec
    output_dir: Path
    sc: Optional[SelfConsistency] = None
    parallelism: int = RUN.parallelism
    seed: int = RUN.seed
    repeats: int = 1
    prefill_signature: bool = False

    def __post_init__(self) -> None:
        if self.parallelism < 1:
            raise RunConfigError("parallelism must be at least 1")
        if self.repeats < 1:
            raise RunConfigError("repeats must be at least 1")
        if self.sc is not None and self.sc.orders and self.strategy.tag is not StrategyTag.DCOL:
            raise RunConfigError("ordered self-consistency needs the dcol strategy")

    @property
    def strategy_label(self) -> str:
        """The strategy label, suffixed with the sampling scheme under self-consistency."""
        if self.sc is None:
            return self.strategy.label
        n = self.sc.samples_per_order
        if len(self.sc.orders) < 2:
            return f"{self.strategy.label}+sc{n}"
        label = self.strategy.tag.value
        if self.strategy.dcol_mode is DColMode.STAGED:
            label += ":" + DColMode.STAGED.value
        label += f"+bisc{n}"
        return label + "+nl" if self.strategy.include_nl_context else label

    def to_dict(self) -> Dict[str, object]:
        backend = {
            "kind": self.backend.kind.value,
            "label": self.backend.label,
            "fingerprint": self.backend.fingerprint,
            "temperature": self.backend.temperature,
        }
        if self.backend.kind is BackendKind.HTTP_CHAT:
            backend.update(model=self.backend.model, endpoint=self.backend.endpoint, max_tokens=self.backend.max_tokens)
        return {
            "dataset": str(self.dataset),
            "strategy": self.strategy_label,
            "backend": backend,
            "output_dir": str(self.output_dir),
            "sc": self.sc.to_dict() if self.sc else None,
            "parallelism": self.parallelism,
            "seed": self.seed,
            "repeats": self.repeats,
            "prefill_signature": self.prefill_signature,
        }


# ------------------------------------------------------------------ loading
def _strategy(table: Mapping[str, Any], overrides: Mapping[str, Any]) -> Strategy:
    tag = overrides.get("strategy") or table.get("tag", "cot")
    order = overrides.get("order")
    if order is None and "strategy" not in overrides:
        order = table.get("order")
    mode = table.get("mode", DColMode.SINGLE_MESSAGE.value)
    try:
        tag_value = StrategyTag(str(tag).lower())
        dcol_order = None
        if tag_value is StrategyTag.DCOL:
            dcol_order = DColOrder(str(order or DColOrder.SAT_FIRST.value).replace("-", "_"))
        elif order:
            raise RunConfigError(f"--order only applies to dcol, not {tag_value.value}")
        return Strategy(
            tag_value,
            dcol_order,
            DColMode(mode),
            include_nl_context=bool(overrides.get("nl_context", table.get("nl_context", False))),
        )
    except (ValueError, InvalidStrategy) as exc:
        raise RunConfigError(f"bad strategy settings: {exc}") from exc


def _backend(table: Mapping[str, Any], overrides: Mapping[str, Any], sampling: bool) -> BackendSpec:
    fields: Dict[str, Any] = {}
    for key in ("model", "endpoint", "temperature", "max_tokens", "timeout", "max_attempts",
                "max_in_flight", "requests_per_second", "api_key_env"):
        if key in table:
            fields[key] = table[key]
    if "backoff" in table:
        fields["backoff"] = tuple(float(x) for x in table["backoff"])
    if "script" in table:
        fields["mock_script"] = str(table["script"])
    if "accuracy" in table:
        fields["mock_accuracy"] = float(table["accuracy"])
    if sampling and "temperature" not in fields:
        fields["temperature"] = BACKEND.sampling_temperature

    try:
        if overrides.get("backend"):
            for key in ("mock_script", "mock_accuracy"):
                fields.pop(key, None)
            if ":" in str(overrides["backend"]):
                fields.pop("model", None)
            return BackendSpec.parse(str(overrides["backend"]), **fields)
        kind = BackendKind(str(table.get("kind", BackendKind.PERFECT_ORACLE.value)))
        return BackendSpec(kind=kind, **fields)
    except (ValueError, TypeError) as exc:
        raise BackendConfigError(f"bad backend settings: {exc}") from exc


def _sc(table: Optional[Mapping[str, Any]], overrides: Mapping[str, Any], strategy: Strategy) -> Optional[SelfConsistency]:
    samples = overrides.get("sc")
    if table is None and samples is None:
        return None
    table = table or {}
    raw_orders = table.get("orders")
    if raw_orders is None:
        orders = BIDIRECTIONAL if strategy.tag is StrategyTag.DCOL else ()
    else:
        try:
            orders = tuple(DColOrder(str(o).replace("-", "_")) for o in raw_orders)
        except ValueError as exc:
            raise RunConfigError(f"bad self-consistency order: {exc}") from exc
    return SelfConsistency(int(samples or table.get("samples_per_order", RUN.samples_per_order)), orders)


def build_config(data: Mapping[str, Any], base_dir: Path = Path("."), **overrides: Any) -> RunConfig:
    """Merge a parsed config mapping with command-line overrides; overrides win."""
    overrides = {k: v for k, v in overrides.items() if v is not None}
    dataset = overrides.get("dataset") or data.get("dataset")
    output_dir = overrides.get("out") or data.get("output_dir")
    if not dataset or not output_dir:
        raise RunConfigError("a run needs both dataset and output_dir")

    strategy = _strategy(data.get("strategy", {}), overrides)
    sc = _sc(data.get("sc"), overrides, strategy)
    backend = _backend(data.get("backend", {}), overrides, sampling=sc is not None)
    if sc is not None and backend.kind is BackendKind.HTTP_CHAT and backend.temperature == 0:
        LOGGER.warning("Self-consistency at temperature 0 repeats the same answer")
    return RunConfig(
        dataset=base_dir / Path(dataset),
        strategy=strategy,
        backend=backend,
        output_dir=base_dir / Path(output_dir),
        sc=sc,
        parallelism=int(overrides.get("parallel") or data.get("parallelism", RUN.parallelism)),
        seed=int(overrides.get("seed", data.get("seed", RUN.seed))),
        repeats=int(overrides.get("repeats") or data.get("repeats", 1)),
        prefill_signature=bool(data.get("prefill_signature", False)),
    )


def load_run_config(path: Optional[Union[str, Path]] = None, **overrides: Any) -> RunConfig:
    """Read a TOML run config; relative paths inside it resolve against the working directory."""
    data: Dict[str, Any] = {}
    if path is not None:
        source = Path(path)
        if not source.is_file():
            raise RunConfigError(f"run config not found: {source}")
        try:
            with source.open("rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise RunConfigError(f"{source}: {exc}") from exc
    return build_config(data, **overrides)


def with_bidirectional_sc(cfg: RunConfig, samples_per_order: Optional[int] = None) -> RunConfig:
    samples = samples_per_order or (cfg.sc.samples_per_order if cfg.sc else RUN.samples_per_order)
    backend = cfg.backend
    if cfg.sc is None:
        # Single runs were configured at the deterministic temperature.
        backend = replace(backend, temperature=BACKEND.sampling_temperature)
    if backend.kind is BackendKind.HTTP_CHAT and backend.temperature == 0:
        LOGGER.warning("Self-consistency at temperature 0 repeats the same answer")
    return replace(cfg, backend=backend, sc=SelfConsistency(samples, BIDIRECTIONAL))
