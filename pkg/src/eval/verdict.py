"""Free-text response to verdict.

An explicit ``FINAL: X`` marker always wins, and the last one counts. Without
it only the closing paragraph is read: hedged or conditional wording and
predictions that the code errors out give UNKNOWN, as do texts that assert
both answers. Unsat-family words are masked before sat-family words are
searched, so "unsatisfiable" can never count as "sat".
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Pattern, Tuple

from ..logic.core import Answer, TaskKind, TernaryAnswer, Verdict, parse_answer

EXCERPT_CHARS = 200


class ConfidenceSource(enum.Enum):
    FINAL_LINE = "final_line"
    KEYWORD_SCAN = "keyword_scan"
    NONE = "none"


@dataclass(frozen=True)
class ParsedVerdict:
    verdict: Answer
    source: ConfidenceSource
    excerpt: str = ""

    def to_dict(self) -> Dict[str, str]:
        return {"verdict": self.verdict.value, "source": self.source.value, "excerpt": self.excerpt}

    @classmethod
    def from_dict(cls, data: Dict[str, str]) -> "ParsedVerdict":
        return cls(parse_answer(data["verdict"]), ConfidenceSource(data["source"]), data.get("excerpt", ""))


_FINAL = re.compile(r"\bFINAL\s*:\s*[*_`'\"\[(]*\s*([A-Za-z]+)", re.I)

_FINAL_WORDS: Dict[str, Answer] = {
    "sat": Verdict.SAT,
    "satisfiable": Verdict.SAT,
    "unsat": Verdict.UNSAT,
    "unsatisfiable": Verdict.UNSAT,
    "unknown": Verdict.UNKNOWN,
}
_FINAL_TERNARY: Dict[str, Answer] = {
    "true": TernaryAnswer.TRUE,
    "false": TernaryAnswer.FALSE,
    "uncertain": TernaryAnswer.UNCERTAIN,
    "unknown": TernaryAnswer.UNCERTAIN,
}

_HEDGES: Tuple[Pattern[str], ...] = tuple(
    re.compile(p, re.I)
    for p in (
        r"\bif (?:a|any|such an?) (?:\w+ )?(?:solution|model|assignment)\b",
        r"\bif (?:it|the (?:constraints?|formula|problem)) (?:is|are) (?:un)?sat",
        r"\b(?:cannot|can't|can not|unable to|impossible to|not possible to) (?:be )?(?:determine|decide|tell|say)",
        r"\b(?:it|this|that|the (?:answer|result|output|verdict)) (?:really |only )?depends on\b",
        r"\bdepends? on whether\b",
    )
)
_ERROR_PREDICTIONS: Tuple[Pattern[str], ...] = tuple(
    re.compile(p, re.I)
    for p in (
        r"\b(?:output|raise|throw|produce|return|report|give)s?\s+(?:an?\s+)?(?:error|exception)\b",
        r"\b(?:syntax|parse|parsing|runtime|type) error\b",
        r"\bfails? to (?:parse|run|execute|compile)\b",
    )
)

_UNSAT_WORDS = re.compile(r"\b(?:unsat|unsatisfiable|not\s+satisfiable|no\s+satisfying\s+assignment)\b", re.I)
_SAT_WORDS = re.compile(r"\b(?:sat|satisfiable|satisfying\s+assignment)\b", re.I)
_UNKNOWN_WORDS = re.compile(r"\b(?:unknown|undetermined|undecidable)\b", re.I)
_COMMANDS = re.compile(r"check-sat(?:-assuming)?|get-model", re.I)

_UNCERTAIN_WORDS = re.compile(r"\b(?:uncertain|unknown|undetermined|cannot be determined|can't be determined)\b", re.I)
_FALSE_WORDS = re.compile(r"\b(?:false|not\s+true)\b", re.I)
_TRUE_WORDS = re.compile(r"\btrue\b", re.I)


def _excerpt(text: str, start: int, end: int) -> str:
    pad = max(0, (EXCERPT_CHARS - (end - start)) // 2)
    lo = max(0, start - pad)
    return text[lo : lo + EXCERPT_CHARS].strip()


def _final_paragraph(text: str) -> str:
    blocks = [b for b in re.split(r"\n\s*\n", text.strip()) if b.strip()]
    return blocks[-1] if blocks else ""


def _mask(text: str, pattern: Pattern[str]) -> Tuple[str, List[re.Match]]:
    found = list(pattern.finditer(text))
    masked = pattern.sub(lambda m: " " * len(m.group(0)), text)
    return masked, found


def _final_line(text: str, vocabulary: Dict[str, Answer], undecided: Answer) -> Optional[ParsedVerdict]:
    matches = list(_FINAL.finditer(text))
    if not matches:
        return None
    last = matches[-1]
    verdict = vocabulary.get(last.group(1).lower(), undecided)
    return ParsedVerdict(verdict, ConfidenceSource.FINAL_LINE, _excerpt(text, last.start(), last.end()))


def _hedged(paragraph: str) -> Optional[re.Match]:
    for pattern in _HEDGES + _ERROR_PREDICTIONS:
        match = pattern.search(paragraph)
        if match:
            return match
    return None


# ------------------------------------------------------------------ public
def parse_verdict(text: str) -> ParsedVerdict:
    """Total: every text maps to SAT, UNSAT or UNKNOWN."""
    final = _final_line(text, _FINAL_WORDS, Verdict.UNKNOWN)
    if final is not None:
        return final

    paragraph, _ = _mask(_final_paragraph(text), _COMMANDS)
    hedge = _hedged(paragraph)
    if hedge is not None:
        return ParsedVerdict(Verdict.UNKNOWN, ConfidenceSource.NONE, _excerpt(paragraph, hedge.start(), hedge.end()))

    masked, unsat_hits = _mask(paragraph, _UNSAT_WORDS)
    sat_hits = list(_SAT_WORDS.finditer(masked))
    if unsat_hits and sat_hits:
        return ParsedVerdict(Verdict.UNKNOWN, ConfidenceSource.NONE, _excerpt(paragraph, 0, 0))
    if unsat_hits:
        hit = unsat_hits[-1]
        return ParsedVerdict(Verdict.UNSAT, ConfidenceSource.KEYWORD_SCAN, _excerpt(paragraph, hit.start(), hit.end()))
    if sat_hits:
        hit = sat_hits[-1]
        return ParsedVerdict(Verdict.SAT, ConfidenceSource.KEYWORD_SCAN, _excerpt(paragraph, hit.start(), hit.end()))
    unknown = _UNKNOWN_WORDS.search(paragraph)
    if unknown:
        return ParsedVerdict(Verdict.UNKNOWN, ConfidenceSource.KEYWORD_SCAN, _excerpt(paragraph, unknown.start(), unknown.end()))
    return ParsedVerdict(Verdict.UNKNOWN, ConfidenceSource.NONE)


def parse_ternary_detail(text: str) -> ParsedVerdict:
    final = _final_line(text, _FINAL_TERNARY, TernaryAnswer.UNCERTAIN)
    if final is not None:
        return final

    paragraph = _final_paragraph(text)
    uncertain = _UNCERTAIN_WORDS.search(paragraph) or _hedged(paragraph)
    if uncertain:
        return ParsedVerdict(
            TernaryAnswer.UNCERTAIN, ConfidenceSource.KEYWORD_SCAN, _excerpt(paragraph, uncertain.start(), uncertain.end())
        )
    masked, false_hits = _mask(paragraph, _FALSE_WORDS)
    true_hits = list(_TRUE_WORDS.finditer(masked))
    if false_hits and true_hits:
        return ParsedVerdict(TernaryAnswer.UNCERTAIN, ConfidenceSource.NONE, _excerpt(paragraph, 0, 0))
    if false_hits:
        hit = false_hits[-1]
        return ParsedVerdict(TernaryAnswer.FALSE, ConfidenceSource.KEYWORD_SCAN, _excerpt(paragraph, hit.start(), hit.end()))
    if true_hits:
        hit = true_hits[-1]
        return ParsedVerdict(TernaryAnswer.TRUE, ConfidenceSource.KEYWORD_SCAN, _excerpt(paragraph, hit.start(), hit.end()))
    return ParsedVerdict(TernaryAnswer.UNCERTAIN, ConfidenceSource.NONE)


def parse_ternary(text: str) -> TernaryAnswer:
    return parse_ternary_detail(text).verdict  # type: ignore[return-value]


def parse_response(text: str, task_kind: TaskKind) -> ParsedVerdict:
    if task_kind is TaskKind.TERNARY_ENTAILMENT:
        return parse_ternary_detail(text)
    return parse_verdict(text)
