"""Evaluation metrics, agreement analysis, and report serialisation.

Everything here is a pure computation over label sequences or records; the
structured JSON report is the machine-readable contract, the text table is a
human convenience.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .errors import EmptyInputError, LengthMismatchError, MissingLabelError
from .labels import LABEL_INDEX, LABEL_ORDER, Label
from .records import CorpusRecord


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts; rows are gold labels, columns predicted, axis order
    [Yes, No, Undecided]."""

    counts: tuple[tuple[int, int, int], ...]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(3))

    def row_sums(self) -> tuple[int, int, int]:
        return tuple(sum(row) for row in self.counts)

    def col_sums(self) -> tuple[int, int, int]:
        return tuple(sum(self.counts[i][j] for i in range(3)) for j in range(3))

    def as_lists(self) -> list[list[int]]:
        return [list(row) for row in self.counts]


class Metrics(NamedTuple):
    accuracy: float
    precision: float
    f1: float


def confusion(golds: Sequence[Label], preds: Sequence[Label]) -> ConfusionMatrix:
    if len(golds) != len(preds):
        raise LengthMismatchError(f"{len(golds)} golds vs {len(preds)} predictions")
    if not golds:
        raise EmptyInputError("cannot build a confusion matrix from zero records")
    counts = [[0, 0, 0] for _ in range(3)]
    for gold, pred in zip(golds, preds):
        counts[LABEL_INDEX[gold]][LABEL_INDEX[pred]] += 1
    return ConfusionMatrix(tuple(tuple(row) for row in counts))


def per_class_metrics(matrix: ConfusionMatrix) -> list[dict[str, float]]:
    """Per-class precision, recall, F1 with zero-division mapped to 0."""
    rows = matrix.row_sums()
    cols = matrix.col_sums()
    out = []
    for i in range(3):
        tp = matrix.counts[i][i]
        precision = tp / cols[i] if cols[i] else 0.0
        recall = tp / rows[i] if rows[i] else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out.append({"precision": precision, "recall": recall, "f1": f1})
    return out


def metrics(matrix: ConfusionMatrix, averaging: str = "macro") -> Metrics:
    """Accuracy plus averaged precision and F1.

    macro averaging is the unweighted class mean; weighted averaging weights
    each class by its gold support.
    """
    total = matrix.total
    if total == 0:
        raise EmptyInputError("empty confusion matrix")
    if averaging not in ("macro", "weighted"):
        raise ValueError(f"unknown averaging scheme {averaging!r}")

    accuracy = matrix.trace / total
    by_class = per_class_metrics(matrix)
    if averaging == "macro":
        weights = [1 / 3] * 3
    else:
        rows = matrix.row_sums()
        weights = [rows[i] / total for i in range(3)]
    precision = sum(w * c["precision"] for w, c in zip(weights, by_class))
    f1 = sum(w * c["f1"] for w, c in zip(weights, by_class))
    return Metrics(accuracy=accuracy, precision=precision, f1=f1)


# --- original-vs-manual agreement ---


@dataclass(frozen=True)
class AgreementReport:
    agree_count: int
    total: int
    per_pair_matrix: ConfusionMatrix  # rows original_category, columns manual_label

    @property
    def agree_fraction(self) -> float:
        return self.agree_count / self.total if self.total else 0.0

    def as_dict(self) -> dict:
        return {
            "agree_count": self.agree_count,
            "total": self.total,
            "agree_fraction": self.agree_fraction,
            "per_pair_matrix": self.per_pair_matrix.as_lists(),
            "label_order": [label.value for label in LABEL_ORDER],
        }


EMPTY_AGREEMENT = AgreementReport(
    agree_count=0,
    total=0,
    per_pair_matrix=ConfusionMatrix(((0, 0, 0), (0, 0, 0), (0, 0, 0))),
)


def agreement(records: Iterable[CorpusRecord]) -> AgreementReport:
    """Cross-tabulate original categories against manual labels."""
    counts = [[0, 0, 0] for _ in range(3)]
    total = 0
    agree = 0
    for record in records:
        if record.manual_label is None:
            raise MissingLabelError(f"record {record.nct_id} has no manual_label")
        i = LABEL_INDEX[record.original_category]
        j = LABEL_INDEX[record.manual_label]
        counts[i][j] += 1
        total += 1
        if i == j:
            agree += 1
    return AgreementReport(
        agree_count=agree,
        total=total,
        per_pair_matrix=ConfusionMatrix(tuple(tuple(row) for row in counts)),
    )


@dataclass(frozen=True)
class Discrepancy:
    nct_id: str
    original_category: Label
    manual_label: Label
    dss_text: str


def discrepancies(records: Iterable[CorpusRecord]) -> list[Discrepancy]:
    """Records whose original category and manual label disagree, by nct_id."""
    out = []
    for record in records:
        if record.manual_label is None:
            raise MissingLabelError(f"record {record.nct_id} has no manual_label")
        if record.manual_label != record.original_category:
            out.append(
                Discrepancy(
                    nct_id=record.nct_id,
                    original_category=record.original_category,
                    manual_label=record.manual_label,
                    dss_text=record.dss_text,
                )
            )
    return sorted(out, key=lambda d: d.nct_id)


def yearly_counts(records: Iterable[CorpusRecord]) -> list[tuple[int, int]]:
    """Registration counts per first-posted year, ascending; year 0 records
    (no date in the registry) are excluded."""
    counts: dict[int, int] = {}
    for record in records:
        if record.first_posted_year == 0:
            continue
        counts[record.first_posted_year] = counts.get(record.first_posted_year, 0) + 1
    return sorted(counts.items())


def write_yearly_csv(series: Sequence[tuple[int, int]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["year", "count"])
        writer.writerows(series)


# --- evaluation report ---


@dataclass(frozen=True)
class EvaluationReport:
    """One classifier run's metrics against one target label column."""

    target: str
    accuracy: float
    macro_precision: float
    macro_f1: float
    matrix: ConfusionMatrix
    config_echo: dict
    split_seed: int
    averaging: str = "macro"
    segment: str = "test"

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "segment": self.segment,
            "averaging": self.averaging,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_f1": self.macro_f1,
            "matrix": self.matrix.as_lists(),
            "label_order": [label.value for label in LABEL_ORDER],
            "config": self.config_echo,
            "split_seed": self.split_seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    def format_table(self) -> str:
        names = [label.value for label in LABEL_ORDER]
        width = max(len(n) for n in names) + 2
        lines = [
            f"target: {self.target}   segment: {self.segment}   averaging: {self.averaging}",
            f"accuracy:  {self.accuracy:.3f}",
            f"precision: {self.macro_precision:.3f}",
            f"f1:        {self.macro_f1:.3f}",
            "",
            "gold \\ pred" + "".join(n.rjust(width) for n in names),
        ]
        for i, name in enumerate(names):
            row = "".join(str(self.matrix.counts[i][j]).rjust(width) for j in range(3))
            lines.append(name.ljust(11) + row)
        return "\n".join(lines)


def build_report(
    golds: Sequence[Label],
    preds: Sequence[Label],
    *,
    target: str,
    config_echo: dict,
    split_seed: int,
    averaging: str = "macro",
    segment: str = "test",
) -> EvaluationReport:
    matrix = confusion(golds, preds)
    summary = metrics(matrix, averaging=averaging)
    return EvaluationReport(
        target=target,
        accuracy=summary.accuracy,
        macro_precision=summary.precision,
        macro_f1=summary.f1,
        matrix=matrix,
        config_echo=config_echo,
        split_seed=split_seed,
        averaging=averaging,
        segment=segment,
    )


def load_report(path: str | Path) -> EvaluationReport:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return EvaluationReport(
        target=data["target"],
        accuracy=data["accuracy"],
        macro_precision=data["macro_precision"],
        macro_f1=data["macro_f1"],
        matrix=ConfusionMatrix(tuple(tuple(row) for row in data["matrix"])),
        config_echo=data["config"],
        split_seed=data["split_seed"],
        averaging=data["averaging"],
        segment=data["segment"],
    )
