"""Registry API client: paged fetching, record extraction, resumable harvest.

Pages are fetched sequentially because the continuation token for page N+1
only exists once page N has arrived; commits therefore happen in ascending
page order and the cursor checkpoint always trails the committed output.
"""
from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import requests

from .config import CtgovConfig, FieldMapping
from .errors import (
    DestinationWriteError,
    MalformedDocumentError,
    MalformedResponseError,
    NetworkUnreachableError,
)
from .labels import Label
from .records import CorpusRecord, TrialRecord, corpus_record_from_trial
from .store import CSV_HEADER, export_csv, import_csv

MAX_PAGE_SIZE = 1000
_BACKOFF_BASE_SECONDS = 0.5
_BACKOFF_CAP_SECONDS = 30.0


@dataclass(frozen=True)
class PageCursor:
    """Continuation point in the paged studies listing; token None means the
    first page when requesting, or the end of results when returned."""

    token: str | None = None
    page_size: int = MAX_PAGE_SIZE

    def __post_init__(self):
        if not 0 < self.page_size <= MAX_PAGE_SIZE:
            raise ValueError(f"page_size must be in 1..{MAX_PAGE_SIZE}: {self.page_size}")


@dataclass
class HarvestSummary:
    fetched: int = 0
    kept: int = 0
    skipped: int = 0

    def as_dict(self) -> dict[str, int]:
        return {"fetched": self.fetched, "kept": self.kept, "skipped": self.skipped}


def _dig(document: dict, dotted_path: str):
    value = document
    for part in dotted_path.split("."):
        if not isinstance(value, dict):
            return None
        value = value.get(part)
    return value


def extract_dss(document: dict, fields: FieldMapping | None = None) -> TrialRecord | None:
    """Map one raw study document to a TrialRecord.

    Returns None unless both an availability category and a DSS description
    are present; raises only when the identifier field itself is missing.
    """
    fields = fields or FieldMapping()
    if not isinstance(document, dict):
        raise MalformedDocumentError(f"study document is not an object: {type(document).__name__}")
    nct_id = _dig(document, fields.nct_id)
    if not nct_id or not isinstance(nct_id, str):
        raise MalformedDocumentError(
            f"study document lacks identifier at {fields.nct_id!r}"
        )

    category_raw = _dig(document, fields.category)
    description = _dig(document, fields.description)
    if not category_raw or not isinstance(description, str) or description == "":
        return None
    category = Label.parse_or_none(str(category_raw))
    if category is None:
        # Registry values outside the three-category vocabulary are skipped.
        return None

    year = 0
    date_value = _dig(document, fields.first_posted)
    if isinstance(date_value, str) and len(date_value) >= 4 and date_value[:4].isdigit():
        year = int(date_value[:4])

    return TrialRecord(
        nct_id=nct_id,
        original_category=category,
        dss_text=description,
        first_posted_year=year,
    )


class RateLimiter:
    """Spaces requests at least 1/rps seconds apart."""

    def __init__(self, requests_per_second: float, sleeper=time.sleep, clock=time.monotonic):
        self.interval = 1.0 / requests_per_second if requests_per_second > 0 else 0.0
        self._sleeper = sleeper
        self._clock = clock
        self._last = None

    def wait(self) -> None:
        if self.interval <= 0:
            return
        now = self._clock()
        if self._last is not None:
            remaining = self._last + self.interval - now
            if remaining > 0:
                self._sleeper(remaining)
                now = self._clock()
        self._last = now


class HarvestDestination:
    """Append-only CSV destination with resume bookkeeping.

    Records are committed page by page; the cursor file next to the CSV holds
    the continuation token of the next unfetched page. Replayed pages after a
    crash are deduplicated against the ids already on disk, so an interrupted
    harvest resumed from its cursor converges on the same record set.
    """

    def __init__(self, path: str | Path, resume: bool = False):
        self.path = Path(path)
        self.cursor_path = self.path.with_name(self.path.name + ".cursor")
        self.seen_ids: set[str] = set()
        self.pending_token: str | None = None
        self._handle = None

        if resume and self.path.exists():
            for record in import_csv(self.path):
                self.seen_ids.add(record.nct_id)
            if self.cursor_path.exists():
                token = self.cursor_path.read_text(encoding="utf-8").strip()
                self.pending_token = token or None
        elif not resume:
            if self.path.exists():
                self.path.unlink()
            if self.cursor_path.exists():
                self.cursor_path.unlink()

    def _open(self):
        if self._handle is None:
            try:
                new_file = not self.path.exists() or self.path.stat().st_size == 0
                self._handle = open(self.path, "a", encoding="utf-8", newline="")
                if new_file:
                    csv.writer(self._handle).writerow(CSV_HEADER)
            except OSError as exc:
                raise DestinationWriteError(str(exc)) from exc
        return self._handle

    def append_page(self, records: Iterable[CorpusRecord]) -> int:
        written = 0
        try:
            handle = self._open()
            writer = csv.writer(handle)
            for record in records:
                if record.nct_id in self.seen_ids:
                    continue
                writer.writerow(
                    [
                        record.nct_id,
                        record.original_category.value,
                        record.dss_text,
                        str(record.first_posted_year),
                        "",
                        "",
                    ]
                )
                self.seen_ids.add(record.nct_id)
                written += 1
            handle.flush()
            os.fsync(handle.fileno())
        except OSError as exc:
            raise DestinationWriteError(str(exc)) from exc
        return written

    def save_cursor(self, token: str) -> None:
        self.cursor_path.write_text(token + "\n", encoding="utf-8")

    def clear_cursor(self) -> None:
        if self.cursor_path.exists():
            self.cursor_path.unlink()

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
        elif not self.path.exists():
            # An empty harvest still leaves a readable, header-only corpus.
            export_csv([], self.path)


class CtgovClient:
    """Client for the registry's v2 studies endpoint."""

    def __init__(
        self,
        config: CtgovConfig | None = None,
        session: requests.Session | None = None,
        sleeper=time.sleep,
    ):
        self.config = config or CtgovConfig()
        self.base_url = self.config.resolved_api_base().rstrip("/")
        self.session = session or requests.Session()
        self._sleeper = sleeper
        self._limiter = RateLimiter(self.config.requests_per_second, sleeper=sleeper)

    def _backoff(self, attempt: int) -> None:
        self._sleeper(min(_BACKOFF_BASE_SECONDS * (2**attempt), _BACKOFF_CAP_SECONDS))

    def fetch_page(self, cursor: PageCursor) -> tuple[list[dict], PageCursor]:
        """Fetch one page of study documents, retrying transient failures."""
        params = {"pageSize": str(cursor.page_size), "format": "json"}
        if cursor.token:
            params["pageToken"] = cursor.token

        last_error: Exception | None = None
        for attempt in range(self.config.retry_budget + 1):
            self._limiter.wait()
            try:
                response = self.session.get(f"{self.base_url}/studies", params=params, timeout=60)
            except requests.RequestException as exc:
                last_error = exc
                self._backoff(attempt)
                continue

            if response.status_code == 429:
                retry_after = response.headers.get("Retry-After")
                if retry_after and retry_after.isdigit():
                    self._sleeper(float(retry_after))
                else:
                    self._backoff(attempt)
                continue
            if response.status_code >= 500:
                last_error = MalformedResponseError(
                    f"server error {response.status_code}", response.text[:200]
                )
                self._backoff(attempt)
                continue
            if response.status_code != 200:
                raise MalformedResponseError(
                    f"unexpected status {response.status_code}", response.text[:200]
                )

            try:
                payload = response.json()
            except (json.JSONDecodeError, ValueError) as exc:
                raise MalformedResponseError(
                    "response body is not JSON", response.text[:200]
                ) from exc
            if not isinstance(payload, dict) or not isinstance(payload.get("studies"), list):
                raise MalformedResponseError(
                    "response lacks a 'studies' list", json.dumps(payload)[:200]
                )
            token = payload.get("nextPageToken") or None
            return payload["studies"], PageCursor(token=token, page_size=cursor.page_size)

        raise NetworkUnreachableError(
            f"gave up after {self.config.retry_budget + 1} attempts: {last_error}"
        )

    def extract_dss(self, document: dict) -> TrialRecord | None:
        return extract_dss(document, self.config.fields)

    def harvest(
        self, destination: HarvestDestination, max_records: int | None = None
    ) -> HarvestSummary:
        """Walk the full listing, keeping records that carry a DSS.

        fetched counts documents seen this run; kept + skipped always equals
        fetched. The destination's cursor is checkpointed after each committed
        page so an interrupted run can resume.
        """
        summary = HarvestSummary()
        if max_records is not None and max_records <= 0:
            return summary
        token = destination.pending_token
        while True:
            remaining = None if max_records is None else max_records - summary.fetched
            if remaining is not None and remaining <= 0:
                break
            size = self.config.page_size if remaining is None else min(self.config.page_size, remaining)
            documents, next_cursor = self.fetch_page(PageCursor(token=token, page_size=size))

            page_records: list[CorpusRecord] = []
            for document in documents:
                summary.fetched += 1
                record = self.extract_dss(document)
                if record is None:
                    summary.skipped += 1
                else:
                    summary.kept += 1
                    page_records.append(corpus_record_from_trial(record))
            if page_records:
                destination.append_page(page_records)

            if next_cursor.token is None:
                break
            token = next_cursor.token
            destination.save_cursor(token)

        destination.clear_cursor()
        destination.close()
        return summary
