from __future__ import annotations

from collections import Counter
from typing import Sequence

from ..errors import HarnessError
from ..logic.core import Answer, TernaryAnswer, Verdict, is_undecided


class EmptyVotes(HarnessError):
    code = 802

    def __init__(self) -> None:
        super().__init__("cannot vote over an empty list")


def vote(votes: Sequence[Answer]) -> Answer:
    """Majority over decided answers; undecided wins only with a strict majority of all votes.

    A tie between decided answers is undecided.
    """
    if not votes:
        raise EmptyVotes()
    undecided = TernaryAnswer.UNCERTAIN if isinstance(votes[0], TernaryAnswer) else Verdict.UNKNOWN
    abstained = sum(1 for v in votes if is_undecided(v))
    if 2 * abstained > len(votes):
        return undecided
    decided = Counter(v for v in votes if not is_undecided(v))
    if not decided:
        return undecided
    ranked = decided.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return undecided
    return ranked[0][0]
