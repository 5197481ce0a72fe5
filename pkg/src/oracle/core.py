from __future__ import annotations

import logging
from typing import List, Optional

from ..errors import HarnessError
from ..logic.core import UnsatCore, Verdict
from ..smtlib.ast import Script
from .solver import DEFAULT_CONFIG, OracleConfig, decide


LOGGER = logging.getLogger(__name__)


class NotUnsat(HarnessError):
    code = 304

    def __init__(self, verdict: Verdict) -> None:
        super().__init__(f"core extraction needs an UNSAT script, oracle said {verdict.value}")
        self.verdict = verdict


def extract_core(script: Script, cfg: Optional[OracleConfig] = None) -> UnsatCore:
    """Deletion-based minimisation: drop each assertion whose removal keeps the rest UNSAT.

    The result is subset-minimal with respect to the oracle: deleting any
    single member yields SAT or UNKNOWN.
    """
    cfg = cfg or DEFAULT_CONFIG
    verdict = decide(script, cfg).verdict
    if verdict is not Verdict.UNSAT:
        raise NotUnsat(verdict)

    kept: List[int] = list(range(len(script.assertions)))
    # The oracle is not monotone (an unbounded Int turns UNSAT into UNKNOWN),
    # so a member kept early may become removable later. Repeat to a fixpoint.
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(kept):
            trial = kept[:i] + kept[i + 1 :]
            if decide(script.subscript(trial), cfg).verdict is Verdict.UNSAT:
                kept = trial
                changed = True
            else:
                i += 1
    LOGGER.debug("Core of %d assertions reduced to %d", len(script.assertions), len(kept))
    return UnsatCore.of(kept)
