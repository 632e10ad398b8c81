"""Exception types raised across the pipeline."""
from __future__ import annotations


class DssError(Exception):
    """Base class for all pipeline errors."""


# --- registry client ---

class NetworkUnreachableError(DssError):
    """Transient network failures persisted past the retry budget."""


class MalformedResponseError(DssError):
    """The registry answered with a payload we cannot interpret."""

    def __init__(self, message: str, payload_excerpt: str = ""):
        super().__init__(message)
        self.payload_excerpt = payload_excerpt


class MalformedDocumentError(DssError):
    """A study document is missing its identifier field entirely."""


class DestinationWriteError(DssError):
    """Writing harvested records failed; the resume cursor stays persisted."""


# --- normalizer ---

class DuplicateNctIdError(DssError):
    """The same nct_id appeared twice in raw input (upstream harvest bug)."""


# --- corpus store ---

class MissingHeaderError(DssError):
    """A corpus CSV lacks the expected header row."""


class BadLabelValueError(DssError):
    """A CSV cell holds a value outside the three-label vocabulary."""

    def __init__(self, message: str, row_number: int):
        super().__init__(f"{message} (row {row_number})")
        self.row_number = row_number


class DuplicateRecordError(DssError):
    """An nct_id was imported or inserted twice."""


class UnknownRecordError(DssError):
    """The referenced nct_id is not in the corpus."""


class AlreadyAnnotatedError(DssError):
    """The record already carries a committed manual label."""


class ClassTooSmallError(DssError):
    """A label stratum cannot populate every requested split segment."""


# --- classifiers ---

class EmptySegmentError(DssError):
    """A split segment required for training is empty."""


class UnlabeledRecordError(DssError):
    """A training record lacks the configured target label."""


class CheckpointUnavailableError(DssError):
    """The named encoder checkpoint could not be loaded."""


class VocabularyUnavailableError(DssError):
    """The tokenizer vocabulary for a checkpoint could not be loaded."""


class EmptyTextError(DssError):
    """predict() was handed empty or whitespace-only text."""


# --- evaluation ---

class LengthMismatchError(DssError):
    """Gold and predicted label sequences differ in length."""


class EmptyInputError(DssError):
    """An evaluation operation received no records."""


class MissingLabelError(DssError):
    """A record lacks a label required by the requested report."""


# --- annotation service ---

class StaleLeaseError(DssError):
    """The lease token is unknown or has expired."""


class LeaseConflictError(DssError):
    """The record was already labeled by a different submission."""
