"""HTTP annotation service: leases unlabeled DSS to annotators, commits their
labels, and reports live progress.

Task payloads deliberately omit the registry's original category so manual
labels are assigned blind; lease creation and label commits are linearizable
behind one lock.
"""
from __future__ import annotations

import csv
import io
import threading
import time
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Response
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import AlreadyAnnotatedError, LeaseConflictError, StaleLeaseError, UnknownRecordError
from .labels import Label
from .metrics import agreement, EMPTY_AGREEMENT
from .store import CSV_HEADER, CorpusStore, label_distribution_of

DEFAULT_LEASE_MINUTES = 10.0


@dataclass
class Lease:
    nct_id: str
    annotator: str
    token: str
    expires_at: float  # epoch seconds


@dataclass(frozen=True)
class CompletedSubmission:
    nct_id: str
    label: Label
    annotator: str
    annotated_at: str


class LeaseManager:
    """Hands out exclusive, expiring leases over unlabeled records.

    All state transitions happen under one lock, so at no point do two live
    leases reference the same record, and a label commit is an atomic
    check-and-set against the store.
    """

    def __init__(self, store: CorpusStore, lease_seconds: float, clock=time.time):
        self.store = store
        self.lease_seconds = lease_seconds
        self.clock = clock
        self._leases: dict[str, Lease] = {}  # nct_id -> active lease
        self._by_token: dict[str, Lease] = {}
        self._completed: dict[str, CompletedSubmission] = {}  # token -> commit
        self._lock = threading.Lock()

    def _prune_expired(self, now: float) -> None:
        expired = [l.nct_id for l in self._leases.values() if l.expires_at <= now]
        for nct_id in expired:
            lease = self._leases.pop(nct_id)
            self._by_token.pop(lease.token, None)

    def next_task(self, annotator: str) -> Lease | None:
        """Lease the lowest unlabeled, unleased record; None when no work."""
        with self._lock:
            now = self.clock()
            self._prune_expired(now)
            leased = set(self._leases)
            for nct_id in self.store.unlabeled_ids():
                if nct_id in leased:
                    continue
                lease = Lease(
                    nct_id=nct_id,
                    annotator=annotator,
                    token=uuid.uuid4().hex,
                    expires_at=now + self.lease_seconds,
                )
                self._leases[nct_id] = lease
                self._by_token[lease.token] = lease
                return lease
            return None

    def submit(self, nct_id: str, label: Label, annotator: str, token: str) -> CompletedSubmission:
        """Commit a label for a leased record.

        Raises UnknownRecordError (no such record), LeaseConflictError (the
        record was already labeled by a different submission), or
        StaleLeaseError (token unknown or expired). Resubmitting the exact
        same (token, label) pair is idempotent.
        """
        with self._lock:
            if self.store.get(nct_id) is None:
                raise UnknownRecordError(f"nct_id {nct_id} not in corpus")

            done = self._completed.get(token)
            if done is not None:
                if done.nct_id == nct_id and done.label == label:
                    return done
                raise LeaseConflictError(
                    f"token already committed a different submission for {done.nct_id}"
                )

            now = self.clock()
            self._prune_expired(now)
            lease = self._by_token.get(token)
            try:
                if lease is None or lease.nct_id != nct_id:
                    # A live lease never survives its record's annotation, so a
                    # labeled record is a conflict rather than a stale token.
                    if self.store.get(nct_id).manual_label is not None:
                        raise LeaseConflictError(f"{nct_id} already labeled")
                    raise StaleLeaseError("lease token unknown or expired")
                annotation = self.store.record_annotation(nct_id, label, annotator)
            except AlreadyAnnotatedError as exc:
                raise LeaseConflictError(str(exc)) from exc

            self._leases.pop(nct_id, None)
            self._by_token.pop(token, None)
            done = CompletedSubmission(
                nct_id=nct_id,
                label=label,
                annotator=annotator,
                annotated_at=annotation.annotated_at.isoformat(),
            )
            self._completed[token] = done
            return done

    def active_leases(self) -> list[Lease]:
        with self._lock:
            self._prune_expired(self.clock())
            return list(self._leases.values())


# --- request/response models ---


class TaskPayload(BaseModel):
    nct_id: str
    dss_text: str
    lease_token: str
    lease_seconds: float
    expires_at: str


class LabelSubmission(BaseModel):
    label: Literal["Yes", "No", "Undecided"]
    annotator: str
    lease_token: str


class AnnotationPayload(BaseModel):
    nct_id: str
    manual_label: str
    annotator: str
    annotated_at: str


class DistributionPayload(BaseModel):
    yes_count: int
    no_count: int
    undecided_count: int


class AgreementPayload(BaseModel):
    agree_count: int
    total: int
    agree_fraction: float
    per_pair_matrix: list[list[int]]


class ProgressPayload(BaseModel):
    total: int
    labeled: int
    remaining: int
    distribution: DistributionPayload
    agreement: AgreementPayload


def create_app(
    store: CorpusStore,
    lease_minutes: float = DEFAULT_LEASE_MINUTES,
    clock=time.time,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="DSS annotation service")
    leases = LeaseManager(store, lease_seconds=lease_minutes * 60.0, clock=clock)
    app.state.store = store
    app.state.leases = leases

    @app.get("/api/tasks/next")
    def next_task(annotator: str) -> Response:
        lease = leases.next_task(annotator)
        if lease is None:
            return Response(status_code=204)
        record = store.get(lease.nct_id)
        # original_category stays hidden: annotation is blind by contract.
        payload = TaskPayload(
            nct_id=record.nct_id,
            dss_text=record.dss_text,
            lease_token=lease.token,
            lease_seconds=max(0.0, lease.expires_at - clock()),
            expires_at=datetime.fromtimestamp(lease.expires_at, tz=timezone.utc).isoformat(),
        )
        return JSONResponse(payload.model_dump())

    @app.post("/api/tasks/{nct_id}/label", status_code=201)
    def submit_label(nct_id: str, submission: LabelSubmission) -> Response:
        try:
            done = leases.submit(
                nct_id,
                Label.parse(submission.label),
                submission.annotator,
                submission.lease_token,
            )
        except UnknownRecordError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=404)
        except LeaseConflictError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=409)
        except StaleLeaseError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=410)
        payload = AnnotationPayload(
            nct_id=done.nct_id,
            manual_label=done.label.value,
            annotator=done.annotator,
            annotated_at=done.annotated_at,
        )
        return JSONResponse(payload.model_dump(), status_code=201)

    @app.get("/api/stats")
    def stats() -> ProgressPayload:
        labeled_records = store.labeled_records()
        total = store.total_count()
        labeled = len(labeled_records)
        distribution = label_distribution_of(labeled_records)
        agree = agreement(labeled_records) if labeled_records else EMPTY_AGREEMENT
        return ProgressPayload(
            total=total,
            labeled=labeled,
            remaining=total - labeled,
            distribution=DistributionPayload(**distribution.as_dict()),
            agreement=AgreementPayload(
                agree_count=agree.agree_count,
                total=agree.total,
                agree_fraction=agree.agree_fraction,
                per_pair_matrix=agree.per_pair_matrix.as_lists(),
            ),
        )

    @app.get("/api/export")
    def export() -> PlainTextResponse:
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(CSV_HEADER)
        for record in store.all_records():
            writer.writerow(
                [
                    record.nct_id,
                    record.original_category.value,
                    record.dss_text,
                    str(record.first_posted_year),
                    record.manual_label.value if record.manual_label else "",
                    record.split or "",
                ]
            )
        return PlainTextResponse(buffer.getvalue(), media_type="text/csv")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index() -> str:
            return (
                "<html><body><h1>DSS annotation service</h1>"
                "<p>No UI assets found; the JSON API is under /api/.</p></body></html>"
            )

    return app
