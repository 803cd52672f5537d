"""Challenge-set data model, document parsing, validation and rendering.

A challenge set is an ordered collection of short probe sentences. Each item
targets one structural divergence between the source and target language,
carries a yes/no question for human judges, and a reference translation in
which the divergence locus is marked by highlight spans.

Documents are JSON. Highlight offsets count Unicode code points, never bytes,
so they are independent of the file encoding. Highlights are stored as spans
rather than inline markup; :func:`emphasize` re-inserts markers for display.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

CHALLENGE_SET_FORMAT = "challenge-set"
SYSTEM_OUTPUTS_FORMAT = "system-outputs"
FORMAT_VERSION = 1

#: Item identifiers: "S" + subcategory number + item letter + optional variant
#: digit, e.g. S1a, S4d2.
ITEM_ID_RE = re.compile(r"S[0-9]+[a-z][0-9]?")

CHECK_MARK = "✓"
CROSS_MARK = "✗"


class DocumentError(ValueError):
    """A document failed to parse or violates a hard invariant.

    ``path`` locates the offending field (e.g. ``items[3].reference``) and
    ``item_id`` names the item when one is known.
    """

    def __init__(self, message: str, path: str = "", item_id: str | None = None):
        self.path = path
        self.item_id = item_id
        super().__init__(f"{path}: {message}" if path else message)


class DivergenceCategory(enum.Enum):
    """The three top-level divergence types."""

    MORPHO_SYNTACTIC = "morpho-syntactic"
    LEXICO_SYNTACTIC = "lexico-syntactic"
    SYNTACTIC = "syntactic"

    @property
    def display_name(self) -> str:
        return self.value.capitalize()

    @classmethod
    def parse(cls, value: str, path: str = "") -> "DivergenceCategory":
        try:
            return cls(value)
        except ValueError:
            allowed = ", ".join(c.value for c in cls)
            raise DocumentError(
                f"unknown category {value!r} (allowed: {allowed})", path
            ) from None


@dataclass(frozen=True, order=True)
class HighlightSpan:
    """Half-open character span [start, end) over a host string."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def check_against(self, host: str) -> None:
        if self.end > len(host):
            raise ValueError(
                f"span [{self.start}, {self.end}) exceeds string of length {len(host)}"
            )

    def slice(self, host: str) -> str:
        return host[self.start:self.end]


def _check_spans(spans: tuple[HighlightSpan, ...], host: str) -> None:
    prev_end = -1
    for span in spans:
        span.check_against(host)
        if span.start < prev_end:
            raise ValueError(f"overlapping or unsorted span at [{span.start}, {span.end})")
        prev_end = span.end


@dataclass(frozen=True)
class ChallengeItem:
    """One probe sentence with its question and highlighted reference.

    ``reference_highlights`` marks the divergence locus the judgment is made
    on; sets whose items lack it are rejected by validation. Source-side
    highlights are optional (some probes have no meaningful source locus).
    """

    id: str
    category: DivergenceCategory
    subcategory: str
    question: str
    source: str
    source_highlights: tuple[HighlightSpan, ...]
    reference: str
    reference_highlights: tuple[HighlightSpan, ...]
    notes: str | None = None

    def __post_init__(self):
        if not ITEM_ID_RE.fullmatch(self.id):
            raise ValueError(f"malformed item id {self.id!r}")
        if not self.subcategory:
            raise ValueError("empty subcategory")
        for name in ("question", "source", "reference"):
            if not getattr(self, name):
                raise ValueError(f"empty {name}")
        _check_spans(self.source_highlights, self.source)
        _check_spans(self.reference_highlights, self.reference)


@dataclass(frozen=True)
class ChallengeSet:
    """An ordered, immutable collection of challenge items."""

    name: str
    version: str
    source_language: str
    target_language: str
    items: tuple[ChallengeItem, ...]

    def item(self, item_id: str) -> ChallengeItem:
        for it in self.items:
            if it.id == item_id:
                return it
        raise KeyError(item_id)

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(it.id for it in self.items)

    def subcategories(self) -> tuple[str, ...]:
        """Subcategory names in first-appearance (set) order."""
        seen: dict[str, None] = {}
        for it in self.items:
            seen.setdefault(it.subcategory, None)
        return tuple(seen)

    def items_in_subcategory(self, subcategory: str) -> tuple[ChallengeItem, ...]:
        return tuple(it for it in self.items if it.subcategory == subcategory)

    def category_of(self, subcategory: str) -> DivergenceCategory:
        for it in self.items:
            if it.subcategory == subcategory:
                return it.category
        raise KeyError(subcategory)


@dataclass(frozen=True)
class SystemOutput:
    """One candidate translation of one item by one system."""

    system_id: str
    item_id: str
    translation: str


@dataclass(frozen=True)
class SystemOutputSet:
    """Candidate translations indexed by (system, item).

    ``warnings`` carries ingest-time findings (missing pairs). Completeness
    is only enforced at scoring/session time via :meth:`require_complete`.
    """

    outputs: tuple[SystemOutput, ...]
    warnings: tuple[str, ...] = ()

    @property
    def by_pair(self) -> Mapping[tuple[str, str], SystemOutput]:
        index = self.__dict__.get("_by_pair")
        if index is None:
            index = {(o.system_id, o.item_id): o for o in self.outputs}
            self.__dict__["_by_pair"] = index
        return index

    @property
    def systems(self) -> tuple[str, ...]:
        """System ids in first-appearance order."""
        seen: dict[str, None] = {}
        for o in self.outputs:
            seen.setdefault(o.system_id, None)
        return tuple(seen)

    def get(self, system_id: str, item_id: str) -> SystemOutput | None:
        return self.by_pair.get((system_id, item_id))

    def missing_pairs(self, item_ids: Iterable[str]) -> list[tuple[str, str]]:
        return [
            (sys_id, item_id)
            for sys_id in self.systems
            for item_id in item_ids
            if (sys_id, item_id) not in self.by_pair
        ]

    def require_complete(self, challenge_set: ChallengeSet) -> None:
        missing = self.missing_pairs(challenge_set.item_ids)
        if missing:
            listed = ", ".join(f"({s}, {i})" for s, i in missing[:10])
            more = "" if len(missing) <= 10 else f" and {len(missing) - 10} more"
            raise DocumentError(f"incomplete output matrix; missing {listed}{more}")


@dataclass
class ValidationReport:
    """Findings from :func:`validate_challenge_set`; errors vs warnings."""

    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def as_lines(self) -> list[str]:
        return [f"error: {e}" for e in self.errors] + [f"warning: {w}" for w in self.warnings]


# -- parsing ------------------------------------------------------------------


def _as_obj(data: bytes | str, expected_format: str) -> dict:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DocumentError("top-level value must be an object")
    got = doc.get("format")
    if got != expected_format:
        raise DocumentError(f"expected format {expected_format!r}, got {got!r}", "format")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DocumentError(f"unsupported format_version {version!r}", "format_version")
    return doc


def _get_str(obj: dict, key: str, path: str, item_id: str | None = None) -> str:
    if key not in obj:
        raise DocumentError("missing required field", f"{path}.{key}", item_id)
    value = obj[key]
    if not isinstance(value, str):
        raise DocumentError(f"expected string, got {type(value).__name__}", f"{path}.{key}", item_id)
    return value


def _parse_spans(value: Any, path: str, item_id: str | None) -> tuple[HighlightSpan, ...]:
    if not isinstance(value, list):
        raise DocumentError("expected a list of [start, end] pairs", path, item_id)
    spans = []
    for i, pair in enumerate(value):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)
        ):
            raise DocumentError("expected [start, end] integer pair", f"{path}[{i}]", item_id)
        try:
            spans.append(HighlightSpan(pair[0], pair[1]))
        except ValueError as exc:
            raise DocumentError(str(exc), f"{path}[{i}]", item_id) from exc
    return tuple(spans)


def _parse_item(obj: Any, path: str) -> ChallengeItem:
    if not isinstance(obj, dict):
        raise DocumentError("expected an object", path)
    item_id = obj.get("id") if isinstance(obj.get("id"), str) else None
    id_value = _get_str(obj, "id", path)
    category = DivergenceCategory.parse(_get_str(obj, "category", path, item_id), f"{path}.category")
    kwargs = dict(
        id=id_value,
        category=category,
        subcategory=_get_str(obj, "subcategory", path, item_id),
        question=_get_str(obj, "question", path, item_id),
        source=_get_str(obj, "source", path, item_id),
        source_highlights=_parse_spans(
            obj.get("source_highlights", []), f"{path}.source_highlights", item_id
        ),
        reference=_get_str(obj, "reference", path, item_id),
        reference_highlights=_parse_spans(
            obj.get("reference_highlights", []), f"{path}.reference_highlights", item_id
        ),
        notes=obj.get("notes"),
    )
    if kwargs["notes"] is not None and not isinstance(kwargs["notes"], str):
        raise DocumentError("expected string or null", f"{path}.notes", item_id)
    try:
        return ChallengeItem(**kwargs)
    except ValueError as exc:
        raise DocumentError(str(exc), path, item_id) from exc


def parse_challenge_set(data: bytes | str) -> ChallengeSet:
    """Parse and hard-validate a challenge-set document.

    Raises :class:`DocumentError` on any malformed field, duplicate or
    malformed id, out-of-bounds or overlapping span, or missing divergence
    locus. The returned set satisfies every structural invariant; parsing is
    lossless, so ``parse(serialize(parse(doc)))`` equals ``parse(doc)``.
    """
    doc = _as_obj(data, CHALLENGE_SET_FORMAT)
    raw_items = doc.get("items")
    if not isinstance(raw_items, list):
        raise DocumentError("expected a list", "items")
    items = [_parse_item(obj, f"items[{i}]") for i, obj in enumerate(raw_items)]

    seen: set[str] = set()
    for i, it in enumerate(items):
        if it.id in seen:
            raise DocumentError(f"duplicate item id {it.id!r}", f"items[{i}].id", it.id)
        seen.add(it.id)
        if not it.reference_highlights:
            raise DocumentError(
                "missing divergence locus (reference_highlights is empty)",
                f"items[{i}].reference_highlights",
                it.id,
            )

    challenge_set = ChallengeSet(
        name=_get_str(doc, "name", ""),
        version=_get_str(doc, "version", ""),
        source_language=_get_str(doc, "source_language", ""),
        target_language=_get_str(doc, "target_language", ""),
        items=tuple(items),
    )
    report = validate_challenge_set(challenge_set)
    if not report.ok:
        raise DocumentError(report.errors[0])
    return challenge_set


def challenge_set_to_dict(challenge_set: ChallengeSet) -> dict:
    items = []
    for it in challenge_set.items:
        obj: dict[str, Any] = {
            "id": it.id,
            "category": it.category.value,
            "subcategory": it.subcategory,
            "question": it.question,
            "source": it.source,
            "source_highlights": [[s.start, s.end] for s in it.source_highlights],
            "reference": it.reference,
            "reference_highlights": [[s.start, s.end] for s in it.reference_highlights],
        }
        if it.notes is not None:
            obj["notes"] = it.notes
        items.append(obj)
    return {
        "format": CHALLENGE_SET_FORMAT,
        "format_version": FORMAT_VERSION,
        "name": challenge_set.name,
        "version": challenge_set.version,
        "source_language": challenge_set.source_language,
        "target_language": challenge_set.target_language,
        "items": items,
    }


def serialize_challenge_set(challenge_set: ChallengeSet) -> str:
    return json.dumps(challenge_set_to_dict(challenge_set), ensure_ascii=False, indent=2) + "\n"


def validate_challenge_set(challenge_set: ChallengeSet, max_source_tokens: int | None = None) -> ValidationReport:
    """Check set-level invariants; pure function of its inputs.

    Errors: empty set, duplicate ids, subcategory mapped to more than one
    category, items without a reference divergence locus. Warnings:
    subcategories with fewer than 3 items, and sources longer than the
    length-lint threshold (default taken from the lint module).
    """
    from . import lint  # runtime import; lint depends on core types

    report = ValidationReport()
    if not challenge_set.items:
        report.errors.append("empty challenge set")
        return report

    seen: set[str] = set()
    for it in challenge_set.items:
        if it.id in seen:
            report.errors.append(f"duplicate item id {it.id!r}")
        seen.add(it.id)
        if not it.reference_highlights:
            report.errors.append(f"item {it.id}: missing divergence locus")

    sub_category: dict[str, DivergenceCategory] = {}
    for it in challenge_set.items:
        known = sub_category.setdefault(it.subcategory, it.category)
        if known is not it.category:
            report.errors.append(
                f"subcategory {it.subcategory!r} maps to multiple categories "
                f"({known.value}, {it.category.value})"
            )

    for sub in challenge_set.subcategories():
        n = len(challenge_set.items_in_subcategory(sub))
        if n < 3:
            report.warnings.append(f"subcategory {sub!r} has {n} item(s), fewer than 3")

    limit = lint.DEFAULT_MAX_SOURCE_TOKENS if max_source_tokens is None else max_source_tokens
    for finding in lint.lint_length(challenge_set, max_tokens=limit).findings:
        report.warnings.append(f"item {finding.item_id}: {finding.detail}")
    return report


def parse_outputs(data: bytes | str, challenge_set: ChallengeSet) -> SystemOutputSet:
    """Parse a system-outputs document against a challenge set.

    Unknown item ids and duplicate (system, item) pairs are errors; pairs
    missing from the full systems x items matrix are recorded as warnings on
    the returned set.
    """
    doc = _as_obj(data, SYSTEM_OUTPUTS_FORMAT)
    raw = doc.get("outputs")
    if not isinstance(raw, list):
        raise DocumentError("expected a list", "outputs")

    known_ids = set(challenge_set.item_ids)
    outputs: list[SystemOutput] = []
    seen_pairs: set[tuple[str, str]] = set()
    for i, obj in enumerate(raw):
        path = f"outputs[{i}]"
        if not isinstance(obj, dict):
            raise DocumentError("expected an object", path)
        system_id = _get_str(obj, "system_id", path)
        item_id = _get_str(obj, "item_id", path)
        translation = _get_str(obj, "translation", path)
        if item_id not in known_ids:
            raise DocumentError(f"unknown item id {item_id!r}", f"{path}.item_id")
        pair = (system_id, item_id)
        if pair in seen_pairs:
            raise DocumentError(f"duplicate output for ({system_id}, {item_id})", path)
        seen_pairs.add(pair)
        outputs.append(SystemOutput(system_id, item_id, translation))

    output_set = SystemOutputSet(tuple(outputs))
    warnings = tuple(
        f"missing output for ({sys_id}, {item_id})"
        for sys_id, item_id in output_set.missing_pairs(challenge_set.item_ids)
    )
    if warnings:
        output_set = SystemOutputSet(tuple(outputs), warnings)
    return output_set


def outputs_to_dict(output_set: SystemOutputSet) -> dict:
    return {
        "format": SYSTEM_OUTPUTS_FORMAT,
        "format_version": FORMAT_VERSION,
        "outputs": [
            {"system_id": o.system_id, "item_id": o.item_id, "translation": o.translation}
            for o in output_set.outputs
        ],
    }


# -- rendering ----------------------------------------------------------------


def emphasize(text: str, spans: Iterable[HighlightSpan], marker: str = "**") -> str:
    """Re-insert highlight markers around each span of ``text``."""
    out = text
    for span in sorted(spans, reverse=True):
        out = out[:span.start] + marker + out[span.start:span.end] + marker + out[span.end:]
    return out


def _verdict_map(verdicts: Any) -> dict[tuple[str, str], bool]:
    if isinstance(verdicts, Mapping):
        return dict(verdicts)
    return {(v.system_id, v.item_id): v.bridged for v in verdicts}


def render_formatted(
    challenge_set: ChallengeSet,
    outputs: SystemOutputSet | None = None,
    verdicts: Any = None,
) -> str:
    """Render the whole set as one readable document: a section per
    subcategory, items with emphasized highlights, and per-system outputs
    marked with a check or cross when verdicts are supplied.

    ``verdicts`` may be a mapping ``(system_id, item_id) -> bridged`` or an
    iterable of objects with those attributes.
    """
    marks: dict[tuple[str, str], bool] | None = None
    if verdicts is not None:
        marks = _verdict_map(verdicts)
        known = None if outputs is None else set(outputs.by_pair)
        for pair in marks:
            if known is not None and pair not in known:
                raise DocumentError(f"verdict for unknown (system, item) pair {pair!r}")

    lines: list[str] = [
        f"# {challenge_set.name} "
        f"({challenge_set.source_language} → {challenge_set.target_language})",
        "",
    ]
    category: DivergenceCategory | None = None
    subcategory: str | None = None
    question: str | None = None
    for it in challenge_set.items:
        if it.category is not category:
            category = it.category
            lines += [f"## {category.display_name}", ""]
        if it.subcategory != subcategory:
            subcategory = it.subcategory
            question = None
            lines += [f"### {subcategory}", ""]
        if it.question != question:
            question = it.question
            lines += [f"_{question}_", ""]
        lines.append(f"**{it.id}**")
        lines.append(f"- Source: {emphasize(it.source, it.source_highlights)}")
        lines.append(f"- Reference: {emphasize(it.reference, it.reference_highlights)}")
        if it.notes:
            lines.append(f"- Note: {it.notes}")
        if outputs is not None:
            for sys_id in outputs.systems:
                out = outputs.get(sys_id, it.id)
                if out is None:
                    continue
                mark = ""
                if marks is not None and (sys_id, it.id) in marks:
                    mark = f" {CHECK_MARK}" if marks[(sys_id, it.id)] else f" {CROSS_MARK}"
                lines.append(f"- {sys_id}: {out.translation}{mark}")
        lines.append("")
    return "\n".join(lines)
