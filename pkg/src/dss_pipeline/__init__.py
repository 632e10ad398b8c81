"""Pipeline for harvesting, cleaning, annotating, and classifying the
IPD data-sharing statements attached to clinical trial registrations."""

__version__ = "0.1.0"

from .labels import LABEL_ORDER, Label
from .records import Annotation, CleanRecord, CorpusRecord, TrialRecord

__all__ = [
    "LABEL_ORDER",
    "Label",
    "Annotation",
    "CleanRecord",
    "CorpusRecord",
    "TrialRecord",
    "__version__",
]
