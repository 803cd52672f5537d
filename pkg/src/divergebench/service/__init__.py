"""File-backed annotation service: durable project store plus HTTP API."""

from .store import (
    DuplicateProjectError,
    JudgmentRecord,
    ProjectStore,
    Roster,
    RosterEntry,
    StoreError,
    UnknownProjectError,
    UnknownSlotError,
    parse_blind_judgments,
    parse_roster,
    resolve_data_dir,
)

__all__ = [
    "DuplicateProjectError",
    "JudgmentRecord",
    "ProjectStore",
    "Roster",
    "RosterEntry",
    "StoreError",
    "UnknownProjectError",
    "UnknownSlotError",
    "parse_blind_judgments",
    "parse_roster",
    "resolve_data_dir",
]
