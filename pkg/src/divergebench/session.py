"""Deterministic blinded annotation sessions.

Each annotator sees the items in their own random order; within an item the
candidate translations are grouped, shuffled per annotator, and labeled "A",
"B", "C", ... in presentation order, so a label carries no signal across
items. The label -> system mapping lives in a separate blinding key that is
never shipped to annotators.

All randomness is documented and replicates across machines and languages:

* generator: splitmix64 (state advances by the 64-bit golden-gamma constant
  0x9E3779B97F4A7C15; output is the two-round mix with multipliers
  0xBF58476D1CE4E5B9 and 0x94D049BB133111EB)
* string hash: FNV-1a 64 over UTF-8 bytes
* seed derivation: derive_seed(seed, label) = mix64(seed XOR fnv1a64(label));
  the per-annotator seed is derive_seed(master_seed, annotator_id), and each
  permutation draws from its own stream ("item-order", or "outputs/<item id>")
* bounded draws use rejection sampling, so there is no modulo bias
* permutations are Fisher-Yates over the source order
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TypeVar

from .core import ChallengeSet, DocumentError, SystemOutputSet
from .scoring import Judgment, Verdict

SESSION_FORMAT = "annotation-session"
BLINDING_KEY_FORMAT = "blinding-key"
FORMAT_VERSION = 1

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

T = TypeVar("T")


def mix64(x: int) -> int:
    """splitmix64 output mix; a 64-bit bijection."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(seed: int, label: str) -> int:
    """Stable sub-seed for a named stream."""
    return mix64((seed ^ fnv1a64(label)) & _MASK64)


class SplitMix64:
    """Tiny deterministic 64-bit generator; one instance per stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return mix64(self._state)

    def below(self, bound: int) -> int:
        """Uniform draw from [0, bound) by rejection."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % bound


def shuffled(items: Sequence[T], rng: SplitMix64) -> list[T]:
    """Fisher-Yates permutation of ``items`` driven by ``rng``."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def blind_label(index: int) -> str:
    """0 -> "A", 1 -> "B", ..., 25 -> "Z", 26 -> "AA"."""
    if index < 0:
        raise ValueError(f"negative label index {index}")
    label = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        label = chr(ord("A") + rem) + label
    return label


# -- session types ------------------------------------------------------------


@dataclass(frozen=True)
class BlindedOutput:
    label: str
    translation: str


@dataclass(frozen=True)
class SessionItem:
    """One item as presented: its id plus anonymously labeled candidates."""

    item_id: str
    outputs: tuple[BlindedOutput, ...]

    def __post_init__(self):
        labels = [o.label for o in self.outputs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate blind labels in item {self.item_id}")


@dataclass(frozen=True)
class AnnotationSession:
    annotator_id: str
    master_seed: int
    items: tuple[SessionItem, ...]


@dataclass(frozen=True)
class BlindingKey:
    """(annotator, item, label) -> system. Sensitive: keep out of any
    annotator-facing payload or file."""

    entries: Mapping[tuple[str, str, str], str]

    def system_for(self, annotator_id: str, item_id: str, label: str) -> str:
        try:
            return self.entries[(annotator_id, item_id, label)]
        except KeyError:
            raise DocumentError(
                f"unknown blind triple ({annotator_id}, {item_id}, {label})"
            ) from None


@dataclass(frozen=True)
class BlindJudgment:
    """A judgment as annotators produce it: label instead of system."""

    annotator_id: str
    item_id: str
    blind_label: str
    verdict: Verdict
    revision: int = 0
    timestamp: float | None = None


# -- construction -------------------------------------------------------------


def build_sessions(
    challenge_set: ChallengeSet,
    outputs: SystemOutputSet,
    annotators: Sequence[str],
    master_seed: int,
) -> tuple[list[AnnotationSession], BlindingKey]:
    """Build one session per annotator plus the shared blinding key.

    Deterministic in all arguments; calling twice yields equal values.
    """
    if len(set(annotators)) != len(annotators):
        raise DocumentError("duplicate annotator ids")
    if not annotators:
        raise DocumentError("no annotators")
    systems = outputs.systems
    if not systems:
        raise DocumentError("no systems in output set")
    outputs.require_complete(challenge_set)

    sessions: list[AnnotationSession] = []
    key_entries: dict[tuple[str, str, str], str] = {}
    for annotator_id in annotators:
        annotator_seed = derive_seed(master_seed, annotator_id)
        item_rng = SplitMix64(derive_seed(annotator_seed, "item-order"))
        session_items = []
        for item in shuffled(challenge_set.items, item_rng):
            output_rng = SplitMix64(derive_seed(annotator_seed, "outputs/" + item.id))
            blinded = []
            for position, system_id in enumerate(shuffled(systems, output_rng)):
                label = blind_label(position)
                output = outputs.get(system_id, item.id)
                assert output is not None  # require_complete ran
                blinded.append(BlindedOutput(label, output.translation))
                key_entries[(annotator_id, item.id, label)] = system_id
            session_items.append(SessionItem(item.id, tuple(blinded)))
        sessions.append(AnnotationSession(annotator_id, master_seed, tuple(session_items)))
    return sessions, BlindingKey(key_entries)


def unblind(blind_judgments: Iterable[BlindJudgment], key: BlindingKey) -> list[Judgment]:
    """Replace blind labels with system ids; verdicts pass through.

    Duplicate (annotator, item, label) triples are an error here; revision
    resolution is the store's job, not this function's.
    """
    seen: set[tuple[str, str, str]] = set()
    judgments = []
    for bj in blind_judgments:
        triple = (bj.annotator_id, bj.item_id, bj.blind_label)
        if triple in seen:
            raise DocumentError(f"duplicate blind judgment for {triple}")
        seen.add(triple)
        judgments.append(Judgment(
            annotator_id=bj.annotator_id,
            item_id=bj.item_id,
            system_id=key.system_for(*triple),
            verdict=bj.verdict,
            revision=bj.revision,
            timestamp=bj.timestamp,
        ))
    return judgments


# -- serialization ------------------------------------------------------------


def session_to_dict(session: AnnotationSession) -> dict:
    return {
        "format": SESSION_FORMAT,
        "format_version": FORMAT_VERSION,
        "annotator_id": session.annotator_id,
        "master_seed": session.master_seed,
        "items": [
            {
                "item_id": si.item_id,
                "outputs": [
                    {"label": o.label, "translation": o.translation} for o in si.outputs
                ],
            }
            for si in session.items
        ],
    }


def serialize_session(session: AnnotationSession) -> str:
    return json.dumps(session_to_dict(session), ensure_ascii=False, indent=2) + "\n"


def parse_session(data: bytes | str) -> AnnotationSession:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != SESSION_FORMAT:
        raise DocumentError(f"expected format {SESSION_FORMAT!r}")
    try:
        items = tuple(
            SessionItem(
                item_id=si["item_id"],
                outputs=tuple(
                    BlindedOutput(o["label"], o["translation"]) for o in si["outputs"]
                ),
            )
            for si in doc["items"]
        )
        return AnnotationSession(doc["annotator_id"], doc["master_seed"], items)
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed session document: {exc}") from exc


def blinding_key_to_dict(key: BlindingKey) -> dict:
    return {
        "format": BLINDING_KEY_FORMAT,
        "format_version": FORMAT_VERSION,
        "sensitive": True,
        "entries": [
            {
                "annotator_id": annotator_id,
                "item_id": item_id,
                "blind_label": label,
                "system_id": system_id,
            }
            for (annotator_id, item_id, label), system_id in sorted(key.entries.items())
        ],
    }


def serialize_blinding_key(key: BlindingKey) -> str:
    return json.dumps(blinding_key_to_dict(key), ensure_ascii=False, indent=2) + "\n"


def parse_blinding_key(data: bytes | str) -> BlindingKey:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != BLINDING_KEY_FORMAT:
        raise DocumentError(f"expected format {BLINDING_KEY_FORMAT!r}")
    entries: dict[tuple[str, str, str], str] = {}
    try:
        for e in doc["entries"]:
            entries[(e["annotator_id"], e["item_id"], e["blind_label"])] = e["system_id"]
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"malformed blinding key: {exc}") from exc
    return BlindingKey(entries)
