"""Three-valued IPD availability labels shared by every stage of the pipeline."""
from __future__ import annotations

import enum


class Label(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    UNDECIDED = "Undecided"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, value: str) -> "Label":
        """Parse a label string case-insensitively; raises ValueError otherwise."""
        label = cls.parse_or_none(value)
        if label is None:
            raise ValueError(f"not a recognised availability label: {value!r}")
        return label

    @classmethod
    def parse_or_none(cls, value: str) -> "Label | None":
        if not isinstance(value, str):
            return None
        return _BY_FOLDED.get(value.strip().casefold())


# Fixed axis order used by classifier score vectors and confusion matrices.
LABEL_ORDER: tuple[Label, Label, Label] = (Label.YES, Label.NO, Label.UNDECIDED)
LABEL_INDEX: dict[Label, int] = {label: i for i, label in enumerate(LABEL_ORDER)}

_BY_FOLDED = {label.value.casefold(): label for label in Label}
