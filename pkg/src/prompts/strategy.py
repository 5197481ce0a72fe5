from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

from ..errors import HarnessError


class StrategyTag(enum.Enum):
    SD = "sd"
    COT = "cot"
    PS = "ps"
    COSM = "cosm"
    DCOL = "dcol"


class DColOrder(enum.Enum):
    SAT_FIRST = "sat_first"
    UNSAT_FIRST = "unsat_first"


class DColMode(enum.Enum):
    SINGLE_MESSAGE = "single"
    STAGED = "staged"


class InvalidStrategy(HarnessError):
    code = 603
    exit_status = 1


class NotDCoL(HarnessError):
    code = 602

    def __init__(self, tag: StrategyTag) -> None:
        super().__init__(f"order_flip needs a dcol strategy, got {tag.value}")


@dataclass(frozen=True)
class Strategy:
    tag: StrategyTag
    dcol_order: Optional[DColOrder] = None
    dcol_mode: DColMode = DColMode.SINGLE_MESSAGE
    include_nl_context: bool = False

    def __post_init__(self) -> None:
        if (self.tag is StrategyTag.DCOL) != (self.dcol_order is not None):
            raise InvalidStrategy("dcol_order must be set exactly when the strategy is dcol")

    @property
    def label(self) -> str:
        """Stable text form, e.g. ``cot+nl`` or ``dcol:unsat_first:staged``."""
        parts = [self.tag.value]
        if self.dcol_order is not None:
            parts.append(self.dcol_order.value)
            if self.dcol_mode is DColMode.STAGED:
                parts.append(self.dcol_mode.value)
        label = ":".join(parts)
        return label + "+nl" if self.include_nl_context else label

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        label = text.strip().lower()
        include_nl = label.endswith("+nl")
        if include_nl:
            label = label[: -len("+nl")]
        head, *rest = label.split(":")
        try:
            tag = StrategyTag(head)
        except ValueError as exc:
            raise InvalidStrategy(f"unknown strategy {text!r}") from exc
        order = None
        mode = DColMode.SINGLE_MESSAGE
        if tag is StrategyTag.DCOL:
            order = DColOrder.SAT_FIRST
            for part in rest:
                if part in {o.value for o in DColOrder}:
                    order = DColOrder(part)
                elif part in {m.value for m in DColMode}:
                    mode = DColMode(part)
                else:
                    raise InvalidStrategy(f"unknown dcol option {part!r} in {text!r}")
        elif rest:
            raise InvalidStrategy(f"{tag.value} takes no options: {text!r}")
        return cls(tag=tag, dcol_order=order, dcol_mode=mode, include_nl_context=include_nl)


def order_flip(strategy: Strategy) -> Strategy:
    if strategy.tag is not StrategyTag.DCOL:
        raise NotDCoL(strategy.tag)
    flipped = DColOrder.UNSAT_FIRST if strategy.dcol_order is DColOrder.SAT_FIRST else DColOrder.SAT_FIRST
    return replace(strategy, dcol_order=flipped)
