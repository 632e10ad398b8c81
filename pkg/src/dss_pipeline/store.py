"""Corpus persistence: CSV interchange, an embedded sqlite store, and splits.

The CSV file is the interchange format for every CLI stage; the sqlite store
backs the annotation service, whose label commits must be atomic under
concurrent annotators.
"""
from __future__ import annotations

import csv
import math
import random
import sqlite3
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    AlreadyAnnotatedError,
    BadLabelValueError,
    ClassTooSmallError,
    DuplicateRecordError,
    MissingHeaderError,
    UnknownRecordError,
    UnlabeledRecordError,
)
from .labels import LABEL_ORDER, Label
from .records import Annotation, CorpusRecord

CSV_HEADER = [
    "nct_id",
    "original_category",
    "dss_text",
    "first_posted_year",
    "manual_label",
    "split",
]

SPLIT_SEGMENTS = ("train", "validation", "test")
DEFAULT_RATIOS = (0.70, 0.15, 0.15)
DEFAULT_SPLIT_SEED = 42
UNKNOWN_SEED = -1  # split materialised from a CSV column; seed not recorded there


@dataclass(frozen=True)
class LabelDistribution:
    yes_count: int = 0
    no_count: int = 0
    undecided_count: int = 0

    @property
    def total(self) -> int:
        return self.yes_count + self.no_count + self.undecided_count

    def as_dict(self) -> dict[str, int]:
        return {
            "yes_count": self.yes_count,
            "no_count": self.no_count,
            "undecided_count": self.undecided_count,
        }


@dataclass(frozen=True)
class DatasetSplit:
    """Seeded three-way partition of labeled record ids."""

    train_ids: frozenset[str]
    validation_ids: frozenset[str]
    test_ids: frozenset[str]
    seed: int
    ratios: tuple[float, float, float] = DEFAULT_RATIOS

    def segment_of(self, nct_id: str) -> str | None:
        if nct_id in self.train_ids:
            return "train"
        if nct_id in self.validation_ids:
            return "validation"
        if nct_id in self.test_ids:
            return "test"
        return None

    def sizes(self) -> tuple[int, int, int]:
        return (len(self.train_ids), len(self.validation_ids), len(self.test_ids))

    @classmethod
    def from_records(cls, records: Iterable[CorpusRecord], seed: int = UNKNOWN_SEED) -> "DatasetSplit":
        """Rebuild a split from the CSV split column."""
        segments: dict[str, set[str]] = {name: set() for name in SPLIT_SEGMENTS}
        for record in records:
            if record.split:
                if record.split not in segments:
                    raise ValueError(f"unknown split segment {record.split!r}")
                segments[record.split].add(record.nct_id)
        return cls(
            train_ids=frozenset(segments["train"]),
            validation_ids=frozenset(segments["validation"]),
            test_ids=frozenset(segments["test"]),
            seed=seed,
        )


# --- CSV interchange ---


def _record_to_row(record: CorpusRecord) -> list[str]:
    return [
        record.nct_id,
        record.original_category.value,
        record.dss_text,
        str(record.first_posted_year),
        record.manual_label.value if record.manual_label else "",
        record.split or "",
    ]


def _row_to_record(row: list[str], row_number: int) -> CorpusRecord:
    if len(row) != len(CSV_HEADER):
        raise BadLabelValueError(f"expected {len(CSV_HEADER)} columns, got {len(row)}", row_number)
    nct_id, category, text, year, manual, split = row
    original = Label.parse_or_none(category)
    if original is None:
        raise BadLabelValueError(f"bad original_category {category!r}", row_number)
    manual_label = None
    if manual != "":
        manual_label = Label.parse_or_none(manual)
        if manual_label is None:
            raise BadLabelValueError(f"bad manual_label {manual!r}", row_number)
    if split and split not in SPLIT_SEGMENTS:
        raise BadLabelValueError(f"bad split value {split!r}", row_number)
    try:
        year_value = int(year)
    except ValueError:
        raise BadLabelValueError(f"bad first_posted_year {year!r}", row_number) from None
    return CorpusRecord(
        nct_id=nct_id,
        original_category=original,
        dss_text=text,
        first_posted_year=year_value,
        manual_label=manual_label,
        split=split or None,
    )


def export_csv(records: Iterable[CorpusRecord], path: str | Path) -> int:
    """Write records to a corpus CSV; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(_record_to_row(record))
            count += 1
    return count


def import_csv(path: str | Path) -> list[CorpusRecord]:
    """Read a corpus CSV, validating header, labels, and id uniqueness."""
    records: list[CorpusRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise MissingHeaderError(
                f"expected header {CSV_HEADER}, found {header!r} in {path}"
            )
        for row_number, row in enumerate(reader, start=2):
            record = _row_to_record(row, row_number)
            if record.nct_id in seen:
                raise DuplicateRecordError(
                    f"duplicate nct_id {record.nct_id} at row {row_number}"
                )
            seen.add(record.nct_id)
            records.append(record)
    return records


# --- stratified split ---


def _allocate(count: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder allocation of `count` items across the ratios.

    Remainder ties break toward the earlier segment (train, validation, test).
    """
    exact = [ratio * count for ratio in ratios]
    base = [math.floor(x) for x in exact]
    remainder = count - sum(base)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - base[i]), i))
    for i in order[:remainder]:
        base[i] += 1
    return base


def stratified_split(
    records: Sequence[CorpusRecord],
    seed: int = DEFAULT_SPLIT_SEED,
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
) -> DatasetSplit:
    """Partition labeled records into train/validation/test, stratified by
    manual_label.

    Deterministic for a fixed (records, seed): ids are sorted per stratum
    before the seeded shuffle, so input order does not matter.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be three non-negative numbers: {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1: {ratios}")

    strata: dict[Label, list[str]] = {label: [] for label in LABEL_ORDER}
    for record in records:
        if record.manual_label is None:
            raise UnlabeledRecordError(
                f"record {record.nct_id} has no manual_label; split requires labeled records"
            )
        strata[record.manual_label].append(record.nct_id)

    rng = random.Random(seed)
    segments: list[set[str]] = [set(), set(), set()]
    for label in LABEL_ORDER:
        ids = sorted(strata[label])
        if not ids:
            continue
        rng.shuffle(ids)
        counts = _allocate(len(ids), ratios)
        for i, ratio in enumerate(ratios):
            if ratio > 0 and counts[i] == 0:
                raise ClassTooSmallError(
                    f"stratum {label.value} ({len(ids)} records) cannot populate "
                    f"the {SPLIT_SEGMENTS[i]} segment"
                )
        offset = 0
        for i, n in enumerate(counts):
            segments[i].update(ids[offset : offset + n])
            offset += n

    return DatasetSplit(
        train_ids=frozenset(segments[0]),
        validation_ids=frozenset(segments[1]),
        test_ids=frozenset(segments[2]),
        seed=seed,
        ratios=ratios,
    )


def apply_split(records: Sequence[CorpusRecord], split: DatasetSplit) -> list[CorpusRecord]:
    """Return records with their split column set from the partition."""
    return [record.with_split(split.segment_of(record.nct_id)) for record in records]


# --- embedded store ---


class CorpusStore:
    """Single-file embedded store for records and their annotations.

    Reads are concurrent; label commits serialise on one lock and use an
    atomic check-and-update so concurrent annotators cannot double-label a
    record.
    """

    def __init__(self, path: str | Path = ":memory:"):
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._lock = threading.Lock()
        self._conn.execute(
            """
            CREATE TABLE IF NOT EXISTS records (
                nct_id TEXT PRIMARY KEY,
                original_category TEXT NOT NULL,
                dss_text TEXT NOT NULL,
                first_posted_year INTEGER NOT NULL,
                manual_label TEXT,
                annotator TEXT,
                annotated_at TEXT,
                split TEXT
            )
            """
        )
        self._conn.commit()

    def close(self) -> None:
        self._conn.close()

    # -- loading --

    def add_records(self, records: Iterable[CorpusRecord]) -> int:
        count = 0
        with self._lock:
            for record in records:
                try:
                    self._conn.execute(
                        "INSERT INTO records (nct_id, original_category, dss_text,"
                        " first_posted_year, manual_label, split)"
                        " VALUES (?, ?, ?, ?, ?, ?)",
                        (
                            record.nct_id,
                            record.original_category.value,
                            record.dss_text,
                            record.first_posted_year,
                            record.manual_label.value if record.manual_label else None,
                            record.split,
                        ),
                    )
                except sqlite3.IntegrityError as exc:
                    self._conn.rollback()
                    raise DuplicateRecordError(
                        f"nct_id {record.nct_id} already in store"
                    ) from exc
                count += 1
            self._conn.commit()
        return count

    def import_csv(self, path: str | Path) -> int:
        return self.add_records(import_csv(path))

    def export_csv(self, path: str | Path) -> int:
        return export_csv(self.all_records(), path)

    # -- reads --

    def all_records(self) -> list[CorpusRecord]:
        rows = self._conn.execute(
            "SELECT nct_id, original_category, dss_text, first_posted_year,"
            " manual_label, split FROM records ORDER BY nct_id"
        ).fetchall()
        return [
            CorpusRecord(
                nct_id=r[0],
                original_category=Label.parse(r[1]),
                dss_text=r[2],
                first_posted_year=r[3],
                manual_label=Label.parse(r[4]) if r[4] else None,
                split=r[5],
            )
            for r in rows
        ]

    def get(self, nct_id: str) -> CorpusRecord | None:
        row = self._conn.execute(
            "SELECT nct_id, original_category, dss_text, first_posted_year,"
            " manual_label, split FROM records WHERE nct_id = ?",
            (nct_id,),
        ).fetchone()
        if row is None:
            return None
        return CorpusRecord(
            nct_id=row[0],
            original_category=Label.parse(row[1]),
            dss_text=row[2],
            first_posted_year=row[3],
            manual_label=Label.parse(row[4]) if row[4] else None,
            split=row[5],
        )

    def total_count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM records").fetchone()[0]

    def labeled_count(self) -> int:
        return self._conn.execute(
            "SELECT COUNT(*) FROM records WHERE manual_label IS NOT NULL"
        ).fetchone()[0]

    def unlabeled_ids(self) -> list[str]:
        rows = self._conn.execute(
            "SELECT nct_id FROM records WHERE manual_label IS NULL ORDER BY nct_id"
        ).fetchall()
        return [r[0] for r in rows]

    def labeled_records(self) -> list[CorpusRecord]:
        return [r for r in self.all_records() if r.manual_label is not None]

    # -- annotation --

    def record_annotation(
        self,
        nct_id: str,
        manual_label: Label,
        annotator: str,
        annotated_at: datetime | None = None,
    ) -> Annotation:
        """Commit one manual label atomically; at most one label per record."""
        when = annotated_at or datetime.now(timezone.utc)
        with self._lock:
            cursor = self._conn.execute(
                "UPDATE records SET manual_label = ?, annotator = ?, annotated_at = ?"
                " WHERE nct_id = ? AND manual_label IS NULL",
                (manual_label.value, annotator, when.isoformat(), nct_id),
            )
            self._conn.commit()
            if cursor.rowcount == 1:
                return Annotation(nct_id, manual_label, annotator, when)
        if self.get(nct_id) is None:
            raise UnknownRecordError(f"nct_id {nct_id} not in corpus")
        raise AlreadyAnnotatedError(f"{nct_id} already carries a manual label")

    def get_annotation(self, nct_id: str) -> Annotation | None:
        row = self._conn.execute(
            "SELECT manual_label, annotator, annotated_at FROM records"
            " WHERE nct_id = ? AND manual_label IS NOT NULL",
            (nct_id,),
        ).fetchone()
        if row is None:
            return None
        return Annotation(
            nct_id=nct_id,
            manual_label=Label.parse(row[0]),
            annotator=row[1] or "",
            annotated_at=datetime.fromisoformat(row[2]),
        )

    def label_distribution(self) -> LabelDistribution:
        rows = self._conn.execute(
            "SELECT manual_label, COUNT(*) FROM records"
            " WHERE manual_label IS NOT NULL GROUP BY manual_label"
        ).fetchall()
        counts = {label: 0 for label in LABEL_ORDER}
        for value, count in rows:
            counts[Label.parse(value)] = count
        return LabelDistribution(
            yes_count=counts[Label.YES],
            no_count=counts[Label.NO],
            undecided_count=counts[Label.UNDECIDED],
        )


def label_distribution_of(records: Iterable[CorpusRecord]) -> LabelDistribution:
    counts = {label: 0 for label in LABEL_ORDER}
    for record in records:
        if record.manual_label is not None:
            counts[record.manual_label] += 1
    return LabelDistribution(
        yes_count=counts[Label.YES],
        no_count=counts[Label.NO],
        undecided_count=counts[Label.UNDECIDED],
    )
