"""Cleaning pipeline for raw DSS texts.

Rule order: character removal, phrase removal, whitespace collapse, length
filter, deduplication. The character/phrase/whitespace passes are iterated to
a fixpoint because one removal can splice a new banned occurrence together
(deleting "*" from "@*@" leaves "@@"); the fixpoint guarantees that no banned
fragment or phrase survives in any output text and makes cleaning idempotent.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .errors import DuplicateNctIdError
from .records import CleanRecord, TrialRecord

RULE_CONTROL = "strip-control"
RULE_FRAGMENTS = "strip-fragments"
RULE_PHRASES = "strip-phrases"
RULE_WHITESPACE = "collapse-whitespace"
RULE_LENGTH = "min-length"

# Control characters that act as spacing are turned into spaces; all other
# control characters are dropped outright.
_SPACING_CONTROLS = {"\n", "\r", "\t", "\v", "\f"}


@dataclass(frozen=True)
class CleaningRules:
    """Configurable cleaning rules; the defaults are the production list."""

    banned_fragments: tuple[str, ...] = ("@@", "*")
    banned_phrases: tuple[str, ...] = (
        "gsk and wrair",
        "glaxosmithkline",
        "n/a - phase i study",
    )
    min_length: int = 10

    def phrase_patterns(self) -> tuple[re.Pattern, ...]:
        return tuple(
            re.compile(re.escape(phrase), re.IGNORECASE)
            for phrase in self.banned_phrases
            if phrase
        )


DEFAULT_RULES = CleaningRules()


@dataclass
class CorpusStats:
    """Accounting for one cleaning run; counters partition the raw input."""

    raw_count: int = 0
    after_clean_count: int = 0
    dropped_short: int = 0
    dropped_duplicate: int = 0
    dropped_empty: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "raw_count": self.raw_count,
            "after_clean_count": self.after_clean_count,
            "dropped_short": self.dropped_short,
            "dropped_duplicate": self.dropped_duplicate,
            "dropped_empty": self.dropped_empty,
        }

    def check_conservation(self) -> None:
        total = (
            self.after_clean_count
            + self.dropped_short
            + self.dropped_duplicate
            + self.dropped_empty
        )
        if total != self.raw_count:
            raise AssertionError(f"stats counters sum to {total}, not {self.raw_count}")


def _strip_controls(text: str) -> str:
    out = []
    for ch in text:
        if ch in _SPACING_CONTROLS:
            out.append(" ")
        elif unicodedata.category(ch) == "Cc":
            continue
        else:
            out.append(ch)
    return "".join(out)


def _one_pass(text: str, rules: CleaningRules, applied: set[str]) -> str:
    stripped = _strip_controls(text)
    if stripped != text:
        applied.add(RULE_CONTROL)
    text = stripped

    for fragment in rules.banned_fragments:
        if fragment and fragment in text:
            text = text.replace(fragment, "")
            applied.add(RULE_FRAGMENTS)

    for pattern in rules.phrase_patterns():
        text, n = pattern.subn("", text)
        if n:
            applied.add(RULE_PHRASES)

    collapsed = re.sub(r"\s+", " ", text).strip()
    if collapsed != text:
        applied.add(RULE_WHITESPACE)
    return collapsed


def normalize_text(text: str, rules: CleaningRules = DEFAULT_RULES) -> tuple[str, tuple[str, ...]]:
    """Run the character/phrase/whitespace passes to a fixpoint.

    Returns the normalized text (possibly empty) and the identifiers of the
    rules that changed it, without applying the length filter.
    """
    applied: set[str] = set()
    current = text
    while True:
        cleaned = _one_pass(current, rules, applied)
        if cleaned == current:
            return cleaned, tuple(sorted(applied))
        current = cleaned


def clean_text(text: str, rules: CleaningRules = DEFAULT_RULES) -> str | None:
    """Clean one DSS text; None when the result is shorter than the minimum."""
    cleaned, _ = normalize_text(text, rules)
    if len(cleaned) < rules.min_length:
        return None
    return cleaned


def dedupe(records: list[CleanRecord]) -> list[CleanRecord]:
    """Keep one record per distinct clean_text (case-insensitive comparison).

    The survivor is the record with the smallest nct_id; output is ordered by
    ascending nct_id.
    """
    survivors: dict[str, CleanRecord] = {}
    for record in records:
        key = record.clean_text.casefold()
        best = survivors.get(key)
        if best is None or record.nct_id < best.nct_id:
            survivors[key] = record
    return sorted(survivors.values(), key=lambda r: r.nct_id)


def build_corpus(
    raw: list[TrialRecord], rules: CleaningRules = DEFAULT_RULES
) -> tuple[list[CleanRecord], CorpusStats]:
    """Clean every raw record, then deduplicate; stats partition the input."""
    seen_ids: set[str] = set()
    stats = CorpusStats(raw_count=len(raw))
    cleaned_records: list[CleanRecord] = []

    for record in raw:
        if record.nct_id in seen_ids:
            raise DuplicateNctIdError(f"duplicate nct_id in raw input: {record.nct_id}")
        seen_ids.add(record.nct_id)

        cleaned, applied = normalize_text(record.dss_text, rules)
        if len(cleaned) == 0:
            stats.dropped_empty += 1
            continue
        if len(cleaned) < rules.min_length:
            stats.dropped_short += 1
            continue
        cleaned_records.append(
            CleanRecord(
                nct_id=record.nct_id,
                original_category=record.original_category,
                clean_text=cleaned,
                first_posted_year=record.first_posted_year,
                applied_rules=applied,
            )
        )

    unique = dedupe(cleaned_records)
    stats.dropped_duplicate = len(cleaned_records) - len(unique)
    stats.after_clean_count = len(unique)
    stats.check_conservation()
    return unique, stats
