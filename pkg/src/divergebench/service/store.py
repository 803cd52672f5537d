"""Durable, file-backed storage for annotation projects.

A project is one directory: the immutable inputs (challenge set, outputs,
roster, per-annotator sessions, blinding key) written once at creation, and
a single append-only judgment log in line-delimited JSON. The log is the
only mutable file; every accepted judgment is flushed and fsynced before the
caller gets an acknowledgment, so a crash can lose at most an unacknowledged
trailing record. Replay tolerates exactly that: a torn final line is
ignored, anything else malformed is corruption and refuses to load.

Writes go through one in-process lock, and the log file is flocked for the
store's writing lifetime, so revisions per (annotator, item, label) slot are
assigned strictly increasing even with concurrent submitters.
"""

from __future__ import annotations

import fcntl
import json
import os
import secrets
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

from ..core import (
    ChallengeSet,
    DocumentError,
    SystemOutputSet,
    outputs_to_dict,
    parse_challenge_set,
    parse_outputs,
    serialize_challenge_set,
)
from ..scoring import Judgment, Verdict
from ..session import (
    AnnotationSession,
    BlindJudgment,
    BlindingKey,
    SessionItem,
    build_sessions,
    parse_blinding_key,
    parse_session,
    serialize_blinding_key,
    serialize_session,
    unblind,
)

ENV_DATA_DIR = "DIVERGEBENCH_DATA"
DEFAULT_DATA_DIR = "divergebench-data"

ROSTER_FORMAT = "roster"
PROJECT_FORMAT = "project"
FORMAT_VERSION = 1

LOG_NAME = "judgments.log"
SESSIONS_DIR = "sessions"


class StoreError(Exception):
    pass


class UnknownProjectError(StoreError):
    pass


class DuplicateProjectError(StoreError):
    pass


class UnknownSlotError(StoreError):
    pass


def resolve_data_dir(explicit: str | os.PathLike | None = None) -> Path:
    """Explicit argument, else the environment variable, else ./divergebench-data."""
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get(ENV_DATA_DIR)
    return Path(env) if env else Path(DEFAULT_DATA_DIR)


# -- roster -------------------------------------------------------------------


@dataclass(frozen=True)
class RosterEntry:
    annotator_id: str
    token: str


@dataclass(frozen=True)
class Roster:
    """Static bearer tokens: one per annotator plus one admin token."""

    annotators: tuple[RosterEntry, ...]
    admin_token: str

    def __post_init__(self):
        if not self.annotators:
            raise DocumentError("roster has no annotators")
        ids = [e.annotator_id for e in self.annotators]
        if len(set(ids)) != len(ids):
            raise DocumentError("duplicate annotator ids in roster")
        tokens = [e.token for e in self.annotators] + [self.admin_token]
        if len(set(tokens)) != len(tokens):
            raise DocumentError("roster tokens must be pairwise distinct")
        if any(not t for t in tokens):
            raise DocumentError("empty token in roster")

    @property
    def annotator_ids(self) -> tuple[str, ...]:
        return tuple(e.annotator_id for e in self.annotators)

    def annotator_for_token(self, token: str) -> str | None:
        for e in self.annotators:
            if secrets.compare_digest(e.token, token):
                return e.annotator_id
        return None

    def is_admin(self, token: str) -> bool:
        return secrets.compare_digest(self.admin_token, token)


def parse_roster(data: bytes | str | Mapping) -> Roster:
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"malformed JSON: {exc}") from exc
    else:
        doc = data
    if not isinstance(doc, dict):
        raise DocumentError("roster must be an object")
    try:
        annotators = tuple(
            RosterEntry(e["id"], e["token"]) for e in doc["annotators"]
        )
        return Roster(annotators, doc["admin_token"])
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"malformed roster: {exc}") from exc


def roster_to_dict(roster: Roster) -> dict:
    return {
        "format": ROSTER_FORMAT,
        "format_version": FORMAT_VERSION,
        "annotators": [{"id": e.annotator_id, "token": e.token} for e in roster.annotators],
        "admin_token": roster.admin_token,
    }


# -- judgment log -------------------------------------------------------------


@dataclass(frozen=True)
class JudgmentRecord:
    """One appended log line; still blind (label, not system)."""

    annotator_id: str
    item_id: str
    blind_label: str
    verdict: Verdict
    revision: int
    timestamp: float

    @property
    def slot(self) -> tuple[str, str, str]:
        return (self.annotator_id, self.item_id, self.blind_label)

    def to_line(self) -> str:
        return json.dumps(
            {
                "annotator_id": self.annotator_id,
                "item_id": self.item_id,
                "blind_label": self.blind_label,
                "verdict": self.verdict.value,
                "revision": self.revision,
                "timestamp": self.timestamp,
            },
            ensure_ascii=False,
        )


BLIND_JUDGMENTS_FORMAT = "blind-judgments"


def parse_blind_judgments(data: bytes | str) -> list[tuple[str, str, str, Verdict]]:
    """Interchange document for judgments collected outside the service:
    (annotator, item, label, verdict) tuples, revisions assigned at ingest."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != BLIND_JUDGMENTS_FORMAT:
        raise DocumentError(f"expected format {BLIND_JUDGMENTS_FORMAT!r}")
    rows = []
    for i, obj in enumerate(doc.get("judgments", [])):
        try:
            rows.append((
                obj["annotator_id"],
                obj["item_id"],
                obj["blind_label"],
                Verdict(obj["verdict"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"malformed judgment: {exc}", f"judgments[{i}]") from exc
    return rows


def _record_from_obj(obj: dict) -> JudgmentRecord:
    return JudgmentRecord(
        annotator_id=obj["annotator_id"],
        item_id=obj["item_id"],
        blind_label=obj["blind_label"],
        verdict=Verdict(obj["verdict"]),
        revision=obj["revision"],
        timestamp=obj["timestamp"],
    )


def replay_log(data: bytes) -> list[JudgmentRecord]:
    """Parse the append-only log, ignoring only a torn trailing line."""
    records: list[JudgmentRecord] = []
    lines = data.split(b"\n")
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        is_last = i == len(lines) - 1  # no newline after it: a torn append
        try:
            obj = json.loads(line.decode("utf-8"))
            records.append(_record_from_obj(obj))
        except (ValueError, KeyError, UnicodeDecodeError):
            if is_last:
                break
            raise StoreError(f"corrupt judgment log at line {i + 1}") from None
    return records


# -- project store ------------------------------------------------------------


class ProjectStore:
    """One annotation project; safe for concurrent reads and writes.

    Reads never mutate state. Writes (submit) serialize on an internal lock;
    the first write also takes an exclusive flock on the log file and
    re-replays it, so handing a directory from one writer process to another
    is safe as long as they do not write simultaneously.
    """

    def __init__(
        self,
        directory: Path,
        challenge_set: ChallengeSet,
        outputs: SystemOutputSet,
        roster: Roster,
        master_seed: int,
        sessions: Mapping[str, AnnotationSession],
        key: BlindingKey,
        records: Iterable[JudgmentRecord],
    ):
        self.directory = directory
        self.project_id = directory.name
        self.challenge_set = challenge_set
        self.outputs = outputs
        self.roster = roster
        self.master_seed = master_seed
        self.sessions = dict(sessions)
        self.key = key
        self._lock = threading.Lock()
        self._log_handle: IO[bytes] | None = None
        self._effective: dict[tuple[str, str, str], JudgmentRecord] = {}
        self._absorb(records)

    def _absorb(self, records: Iterable[JudgmentRecord]) -> None:
        for record in records:
            current = self._effective.get(record.slot)
            if current is None or record.revision > current.revision:
                self._effective[record.slot] = record

    # -- creation and loading --

    @classmethod
    def create(
        cls,
        root: Path,
        challenge_set: ChallengeSet,
        outputs: SystemOutputSet,
        roster: Roster,
        master_seed: int,
        project_id: str | None = None,
    ) -> "ProjectStore":
        outputs.require_complete(challenge_set)
        if project_id is None:
            project_id = secrets.token_hex(6)
        if not project_id or "/" in project_id or project_id in (".", ".."):
            raise StoreError(f"invalid project id {project_id!r}")
        directory = root / project_id
        if directory.exists():
            raise DuplicateProjectError(f"project {project_id!r} already exists")

        sessions, key = build_sessions(
            challenge_set, outputs, roster.annotator_ids, master_seed
        )
        directory.mkdir(parents=True)
        (directory / SESSIONS_DIR).mkdir()
        _write(directory / "challenge_set.json", serialize_challenge_set(challenge_set))
        _write(directory / "outputs.json", _dump(outputs_to_dict(outputs)))
        _write(directory / "roster.json", _dump(roster_to_dict(roster)))
        _write(directory / "project.json", _dump({
            "format": PROJECT_FORMAT,
            "format_version": FORMAT_VERSION,
            "project_id": project_id,
            "master_seed": master_seed,
            "created": time.time(),
        }))
        for session in sessions:
            _write(
                directory / SESSIONS_DIR / f"{session.annotator_id}.json",
                serialize_session(session),
            )
        _write(directory / "blinding_key.json", serialize_blinding_key(key))
        (directory / LOG_NAME).touch()
        return cls(
            directory, challenge_set, outputs, roster, master_seed,
            {s.annotator_id: s for s in sessions}, key, [],
        )

    @classmethod
    def open(cls, root: Path, project_id: str) -> "ProjectStore":
        directory = root / project_id
        if not (directory / "project.json").is_file():
            raise UnknownProjectError(f"no project {project_id!r} under {root}")
        meta = json.loads((directory / "project.json").read_text("utf-8"))
        challenge_set = parse_challenge_set((directory / "challenge_set.json").read_bytes())
        outputs = parse_outputs((directory / "outputs.json").read_bytes(), challenge_set)
        roster = parse_roster((directory / "roster.json").read_bytes())
        sessions = {}
        for annotator_id in roster.annotator_ids:
            session_path = directory / SESSIONS_DIR / f"{annotator_id}.json"
            sessions[annotator_id] = parse_session(session_path.read_bytes())
        key = parse_blinding_key((directory / "blinding_key.json").read_bytes())
        records = replay_log((directory / LOG_NAME).read_bytes())
        return cls(
            directory, challenge_set, outputs, roster, meta["master_seed"],
            sessions, key, records,
        )

    @staticmethod
    def list_projects(root: Path) -> list[str]:
        if not root.is_dir():
            return []
        return sorted(p.name for p in root.iterdir() if (p / "project.json").is_file())

    def close(self) -> None:
        with self._lock:
            if self._log_handle is not None:
                self._log_handle.close()
                self._log_handle = None

    # -- queries (never mutate) --

    def session_for(self, annotator_id: str) -> AnnotationSession:
        try:
            return self.sessions[annotator_id]
        except KeyError:
            raise UnknownSlotError(f"no session for annotator {annotator_id!r}") from None

    def verdicts_for(self, annotator_id: str, item_id: str) -> dict[str, Verdict]:
        """Effective verdict per blind label for one session item."""
        session = self.session_for(annotator_id)
        for si in session.items:
            if si.item_id == item_id:
                found = {}
                for output in si.outputs:
                    record = self._effective.get((annotator_id, item_id, output.label))
                    if record is not None:
                        found[output.label] = record.verdict
                return found
        raise UnknownSlotError(f"item {item_id!r} not in session of {annotator_id!r}")

    def next_pending(self, annotator_id: str) -> SessionItem | None:
        """Earliest session item with an unjudged output; None when done."""
        session = self.session_for(annotator_id)
        for si in session.items:
            judged = self.verdicts_for(annotator_id, si.item_id)
            if any(o.label not in judged for o in si.outputs):
                return si
        return None

    def progress(self) -> dict:
        per_system = len(self.outputs.systems)
        total = len(self.challenge_set.items) * per_system
        annotators = {}
        tallies = {v.value: 0 for v in Verdict}
        for annotator_id in self.roster.annotator_ids:
            judged = 0
            mine = {v.value: 0 for v in Verdict}
            for record in self._effective.values():
                if record.annotator_id == annotator_id:
                    judged += 1
                    mine[record.verdict.value] += 1
                    tallies[record.verdict.value] += 1
            annotators[annotator_id] = {"judged": judged, "total": total, "verdicts": mine}
        return {"annotators": annotators, "verdicts": tallies}

    def effective_records(self) -> list[JudgmentRecord]:
        return sorted(self._effective.values(), key=lambda r: r.slot)

    def export(self) -> tuple[list[Judgment], list[dict]]:
        """Unblinded effective judgments plus the still-pending slots.

        Admin-side only: pending slots name their real system ids.
        """
        blind = [
            BlindJudgment(
                annotator_id=r.annotator_id,
                item_id=r.item_id,
                blind_label=r.blind_label,
                verdict=r.verdict,
                revision=r.revision,
                timestamp=r.timestamp,
            )
            for r in self.effective_records()
        ]
        judgments = unblind(blind, self.key)
        pending = []
        for annotator_id in self.roster.annotator_ids:
            for si in self.sessions[annotator_id].items:
                for output in si.outputs:
                    if (annotator_id, si.item_id, output.label) not in self._effective:
                        pending.append({
                            "annotator_id": annotator_id,
                            "item_id": si.item_id,
                            "system_id": self.key.system_for(
                                annotator_id, si.item_id, output.label
                            ),
                        })
        return judgments, pending

    # -- writes --

    def _open_log_locked(self) -> IO[bytes]:
        """Take the writer role: flock the log, then catch up on any records
        another writer appended before us."""
        handle = open(self.directory / LOG_NAME, "ab")
        try:
            fcntl.flock(handle.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            handle.close()
            raise StoreError(
                f"judgment log of project {self.project_id!r} is locked by another writer"
            ) from None
        self._absorb(replay_log((self.directory / LOG_NAME).read_bytes()))
        return handle

    def submit(
        self, annotator_id: str, item_id: str, blind_label: str, verdict: Verdict
    ) -> JudgmentRecord:
        """Append one judgment durably; returns the acknowledged record."""
        session = self.session_for(annotator_id)
        slot_exists = any(
            si.item_id == item_id and any(o.label == blind_label for o in si.outputs)
            for si in session.items
        )
        if not slot_exists:
            raise UnknownSlotError(
                f"({item_id}, {blind_label}) is not a slot in the session of {annotator_id!r}"
            )
        with self._lock:
            if self._log_handle is None:
                self._log_handle = self._open_log_locked()
            current = self._effective.get((annotator_id, item_id, blind_label))
            record = JudgmentRecord(
                annotator_id=annotator_id,
                item_id=item_id,
                blind_label=blind_label,
                verdict=verdict,
                revision=0 if current is None else current.revision + 1,
                timestamp=time.time(),
            )
            self._log_handle.write(record.to_line().encode("utf-8") + b"\n")
            self._log_handle.flush()
            os.fsync(self._log_handle.fileno())
            # acknowledged only now that it is on disk
            self._effective[record.slot] = record
            return record


def _dump(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
