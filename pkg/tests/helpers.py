"""Shared fixtures: registry-style example rows and synthetic corpora."""
from __future__ import annotations

import random

from dss_pipeline.labels import LABEL_ORDER, Label
from dss_pipeline.records import CorpusRecord

# Three real registry entries whose textual statement contradicts the
# registry's own category; used as canonical fixtures throughout.
REGISTRY_EXAMPLES = [
    CorpusRecord(
        nct_id="NCT03822728",
        original_category=Label.NO,
        dss_text=(
            "The investigators will make our participant data available to other "
            "researchers after completion of this study"
        ),
        first_posted_year=2019,
        manual_label=Label.YES,
    ),
    CorpusRecord(
        nct_id="NCT03463993",
        original_category=Label.YES,
        dss_text=(
            "It is undecided whether the IPD will be available to other researchers. "
            "Clearance is required first from ethical bodies and supervisors"
        ),
        first_posted_year=2018,
        manual_label=Label.UNDECIDED,
    ),
    CorpusRecord(
        nct_id="NCT03288623",
        original_category=Label.UNDECIDED,
        dss_text=(
            "De-identified individual participant data for all primary and secondary "
            "outcome measures will be made available"
        ),
        first_posted_year=2017,
        manual_label=Label.YES,
    ),
]


def nct(i: int) -> str:
    return f"NCT{i:08d}"


# --- separable 60-record corpus (disjoint keyword vocabulary per class) ---

_CLASS_WORDS = {
    Label.YES: ("alpha", "bravo", "crimson"),
    Label.NO: ("delta", "echo", "violet"),
    Label.UNDECIDED: ("foxtrot", "golf", "amber"),
}


def separable_corpus(per_class: int = 20) -> list[CorpusRecord]:
    records = []
    i = 0
    for label in LABEL_ORDER:
        words = _CLASS_WORDS[label]
        for k in range(per_class):
            text = f"{words[k % 3]} statement record {words[(k + 1) % 3]} catalogue entry {k}"
            records.append(
                CorpusRecord(
                    nct_id=nct(i),
                    original_category=Label.NO,
                    dss_text=text,
                    first_posted_year=2019,
                    manual_label=label,
                )
            )
            i += 1
    return records


# --- synthetic annotated corpus at the production scale ---

_TEMPLATES = {
    Label.YES: (
        "deidentified participant data will be made available to qualified researchers",
        "individual participant data will be shared upon reasonable request",
        "the study team plans to share collected measurements with outside investigators",
        "data will become available after publication through a managed access portal",
        "all collected records will be provided to any researcher with an approved proposal",
    ),
    Label.NO: (
        "there is no plan to make individual participant data available",
        "participant level data will not be shared outside the study team",
        "the sponsor will not distribute the collected data",
        "no data sharing is intended for this study",
        "records remain internal and will not be released",
    ),
    Label.UNDECIDED: (
        "it is undecided whether the data will be available to other researchers",
        "a decision on sharing participant data is pending ethics approval",
        "data sharing remains to be determined by the steering committee",
        "whether records will be provided has not yet been decided",
        "availability depends on a future review and is currently open",
    ),
}

_FILLERS = (
    "outcome measures include laboratory values",
    "the protocol covers multiple study sites",
    "enrollment details appear in the design section",
    "follow up visits occur quarterly",
    "the trial evaluates a standard intervention",
    "safety monitoring continues through the final visit",
    "participants complete questionnaires at baseline",
    "secondary endpoints are summarised descriptively",
    "randomisation uses permuted blocks",
    "the analysis population is defined per protocol",
)

# Manual-label counts and the per-class agreement that together give
# 3,130 / 5,000 records whose original category equals the manual label.
ANNOTATED_COUNTS = {Label.YES: 2441, Label.NO: 1232, Label.UNDECIDED: 1327}
_AGREE_PER_CLASS = {Label.YES: 1530, Label.NO: 800, Label.UNDECIDED: 800}


def synthetic_annotated_corpus(seed: int = 20240101) -> list[CorpusRecord]:
    """5,000 labeled records with learnable text and agreement 3,130/5,000."""
    rng = random.Random(seed)
    others = {
        label: tuple(o for o in LABEL_ORDER if o != label) for label in LABEL_ORDER
    }
    records = []
    i = 1
    for label in LABEL_ORDER:
        agree = _AGREE_PER_CLASS[label]
        for k in range(ANNOTATED_COUNTS[label]):
            template = rng.choice(_TEMPLATES[label])
            filler_a, filler_b = rng.sample(_FILLERS, 2)
            text = f"{filler_a}. {template}. {filler_b}."
            original = label if k < agree else others[label][k % 2]
            records.append(
                CorpusRecord(
                    nct_id=nct(i),
                    original_category=original,
                    dss_text=text,
                    first_posted_year=2018 + (i % 6),
                    manual_label=label,
                )
            )
            i += 1
    rng.shuffle(records)
    return records


# --- 50-record agreement fixture with hand-computed expectations ---

AGREEMENT_50_EXPECTED = {
    "agree_count": 31,
    "total": 50,
    # rows original_category, columns manual_label, axis order Yes/No/Undecided
    "matrix": [[12, 0, 5], [8, 9, 0], [0, 6, 10]],
}


def agreement_fixture_50() -> list[CorpusRecord]:
    plan = [
        # (manual, original, count)
        (Label.YES, Label.YES, 12),
        (Label.YES, Label.NO, 8),
        (Label.NO, Label.NO, 9),
        (Label.NO, Label.UNDECIDED, 6),
        (Label.UNDECIDED, Label.UNDECIDED, 10),
        (Label.UNDECIDED, Label.YES, 5),
    ]
    records = []
    i = 100
    for manual, original, count in plan:
        for _ in range(count):
            records.append(
                CorpusRecord(
                    nct_id=nct(i),
                    original_category=original,
                    dss_text=f"synthetic statement number {i} with sufficient length",
                    first_posted_year=2020,
                    manual_label=manual,
                )
            )
            i += 1
    return records


# --- registry study documents (v2 shape) for the mock server ---


def study_document(
    nct_id: str,
    category: str | None = None,
    description: str | None = None,
    first_posted: str | None = "2019-03-14",
) -> dict:
    doc: dict = {"protocolSection": {"identificationModule": {"nctId": nct_id}}}
    sharing: dict = {}
    if category is not None:
        sharing["ipdSharing"] = category
    if description is not None:
        sharing["description"] = description
    if sharing:
        doc["protocolSection"]["ipdSharingStatementModule"] = sharing
    if first_posted is not None:
        doc["protocolSection"]["statusModule"] = {
            "studyFirstPostDateStruct": {"date": first_posted, "type": "ACTUAL"}
        }
    return doc


def registry_fixture(total: int = 1000, missing_dss: int = 130) -> list[dict]:
    """Mock registry contents: `missing_dss` documents lack a description,
    spread evenly through the listing."""
    categories = ["YES", "NO", "UNDECIDED"]
    missing_indices = {k * total // missing_dss for k in range(missing_dss)}
    assert len(missing_indices) == missing_dss
    docs = []
    for i in range(total):
        nct_id = nct(1000000 + i)
        if i in missing_indices:
            docs.append(study_document(nct_id, category=categories[i % 3], description=None))
        else:
            docs.append(
                study_document(
                    nct_id,
                    category=categories[i % 3],
                    description=f"statement for record {i} describing data availability",
                    first_posted=f"{2018 + i % 6}-0{1 + i % 9}-11",
                )
            )
    return docs
