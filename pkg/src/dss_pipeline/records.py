"""Core record types flowing between pipeline stages."""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import datetime

from .labels import Label

NCT_ID_PATTERN = re.compile(r"^NCT\d{8}$")


def validate_nct_id(nct_id: str) -> str:
    if not NCT_ID_PATTERN.match(nct_id or ""):
        raise ValueError(f"invalid registry identifier: {nct_id!r}")
    return nct_id


@dataclass(frozen=True)
class TrialRecord:
    """One registry entry as harvested: raw DSS text plus registry metadata."""

    nct_id: str
    original_category: Label
    dss_text: str
    first_posted_year: int  # 0 when the registry gave no first-posted date


@dataclass(frozen=True)
class CleanRecord:
    """A record whose DSS text survived the cleaning pipeline."""

    nct_id: str
    original_category: Label
    clean_text: str
    first_posted_year: int
    applied_rules: tuple[str, ...] = ()


@dataclass(frozen=True)
class Annotation:
    """A committed human label for one record."""

    nct_id: str
    manual_label: Label
    annotator: str
    annotated_at: datetime


@dataclass(frozen=True)
class CorpusRecord:
    """One row of the persisted corpus: registry fields plus experiment state.

    manual_label and split stay None until annotation and partitioning
    have happened; the CSV schema serialises them as empty cells.
    """

    nct_id: str
    original_category: Label
    dss_text: str
    first_posted_year: int
    manual_label: Label | None = None
    split: str | None = None

    def with_split(self, split: str | None) -> "CorpusRecord":
        return replace(self, split=split)

    def with_manual_label(self, label: Label | None) -> "CorpusRecord":
        return replace(self, manual_label=label)


def corpus_record_from_trial(record: TrialRecord) -> CorpusRecord:
    return CorpusRecord(
        nct_id=record.nct_id,
        original_category=record.original_category,
        dss_text=record.dss_text,
        first_posted_year=record.first_posted_year,
    )


def corpus_record_from_clean(record: CleanRecord) -> CorpusRecord:
    return CorpusRecord(
        nct_id=record.nct_id,
        original_category=record.original_category,
        dss_text=record.clean_text,
        first_posted_year=record.first_posted_year,
    )
