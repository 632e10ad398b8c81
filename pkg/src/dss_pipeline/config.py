"""YAML configuration for the registry client and cleaning rules.

Registry schemas drift, so the field paths the harvester reads are data, not
code; the same file can also override the cleaning rule lists.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .normalize import CleaningRules

DEFAULT_API_BASE = "https://clinicaltrials.gov/api/v2"
API_BASE_ENV_VAR = "CTGOV_API_BASE"


@dataclass(frozen=True)
class FieldMapping:
    """Dotted paths into a study document for the fields we keep."""

    nct_id: str = "protocolSection.identificationModule.nctId"
    category: str = "protocolSection.ipdSharingStatementModule.ipdSharing"
    description: str = "protocolSection.ipdSharingStatementModule.description"
    first_posted: str = "protocolSection.statusModule.studyFirstPostDateStruct.date"


@dataclass(frozen=True)
class CtgovConfig:
    api_base: str = DEFAULT_API_BASE
    page_size: int = 1000
    requests_per_second: float = 3.0
    retry_budget: int = 5
    fields: FieldMapping = field(default_factory=FieldMapping)

    def resolved_api_base(self) -> str:
        return os.environ.get(API_BASE_ENV_VAR) or self.api_base


def _section(data: dict, name: str) -> dict:
    value = data.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ValueError(f"config section {name!r} must be a mapping")
    return value


def load_config_file(path: str | Path) -> dict:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a mapping at top level")
    return data


def ctgov_config_from(data: dict) -> CtgovConfig:
    section = _section(data, "ctgov")
    mapping = _section(section, "fields")
    defaults = FieldMapping()
    return CtgovConfig(
        api_base=section.get("api_base", DEFAULT_API_BASE),
        page_size=int(section.get("page_size", 1000)),
        requests_per_second=float(section.get("requests_per_second", 3.0)),
        retry_budget=int(section.get("retry_budget", 5)),
        fields=FieldMapping(
            nct_id=mapping.get("nct_id", defaults.nct_id),
            category=mapping.get("category", defaults.category),
            description=mapping.get("description", defaults.description),
            first_posted=mapping.get("first_posted", defaults.first_posted),
        ),
    )


def cleaning_rules_from(data: dict) -> CleaningRules:
    section = _section(data, "cleaning")
    defaults = CleaningRules()
    return CleaningRules(
        banned_fragments=tuple(section.get("banned_fragments", defaults.banned_fragments)),
        banned_phrases=tuple(section.get("banned_phrases", defaults.banned_phrases)),
        min_length=int(section.get("min_length", defaults.min_length)),
    )


def load_ctgov_config(path: str | Path | None = None) -> CtgovConfig:
    return ctgov_config_from(load_config_file(path) if path else {})


def load_cleaning_rules(path: str | Path | None = None) -> CleaningRules:
    return cleaning_rules_from(load_config_file(path) if path else {})
