"""Turn free-text model completions into taxonomy labels or binary decisions.

Parsing is total: anything that does not resolve becomes Unknown, never an
exception. Matching is case-insensitive and punctuation-insensitive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .corpus import ActivityTaxonomy

_WORD_RE = re.compile(r"[a-z0-9]+")

_BINARY_TOKENS = {
    "yes": True,
    "present": True,
    "no": False,
    "absent": False,
}


class MatchTier(Enum):
    EXACT = "exact"
    ALIAS = "alias"
    FUZZY = "fuzzy"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ParsedLabel:
    label: str | None
    tier: MatchTier
    raw: str

    def __post_init__(self):
        if (self.label is None) != (self.tier is MatchTier.UNKNOWN):
            raise ValueError("label is None iff tier is UNKNOWN")


@dataclass(frozen=True)
class ParsedBinary:
    presence: bool | None
    raw: str


def normalize(text: str) -> str:
    """Case-fold, strip punctuation, collapse whitespace."""
    return " ".join(_WORD_RE.findall(text.casefold()))


def parse_label(text: str, taxonomy: ActivityTaxonomy) -> ParsedLabel:
    """Match text against the taxonomy: exact, then alias, then fuzzy substring.

    Fuzzy matching picks the label whose first occurrence in the text is
    earliest; a position tie between different labels yields Unknown.
    """
    norm = normalize(text)

    for label in taxonomy.labels:
        if norm == normalize(label):
            return ParsedLabel(label=label, tier=MatchTier.EXACT, raw=text)

    for alias, target in taxonomy.aliases.items():
        if norm == normalize(alias):
            return ParsedLabel(label=target, tier=MatchTier.ALIAS, raw=text)

    occurrences: list[tuple[int, str]] = []
    for label in taxonomy.labels:
        pos = norm.find(normalize(label))
        if pos >= 0:
            occurrences.append((pos, label))
    if occurrences:
        occurrences.sort(key=lambda item: item[0])
        if len(occurrences) == 1 or occurrences[0][0] < occurrences[1][0]:
            return ParsedLabel(label=occurrences[0][1], tier=MatchTier.FUZZY, raw=text)

    return ParsedLabel(label=None, tier=MatchTier.UNKNOWN, raw=text)


def parse_binary(text: str) -> ParsedBinary:
    """Decide Presence/Absence from the first standalone yes/no/present/absent token."""
    for token in _WORD_RE.findall(text.casefold()):
        if token in _BINARY_TOKENS:
            return ParsedBinary(presence=_BINARY_TOKENS[token], raw=text)
    return ParsedBinary(presence=None, raw=text)
