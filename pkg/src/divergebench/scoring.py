"""Judgment aggregation and all quantitative scores.

Judges answer one yes/no question per candidate translation, with a third
option, not-applicable, for outputs the question cannot be asked of. A panel
of judgments per (item, system) pair is aggregated into a single verdict:
bridged when a strict majority voted yes. Rates are kept as exact rationals
and rounded only for display (round half up, integer percent).

Abstentions are ambiguous by nature, so their handling is an explicit,
overridable policy (:class:`NaPolicy`) that reports surface in their header:
by default an abstention counts as non-positive when aggregating a panel and
is excluded entirely from judgment-level rates.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from .core import ChallengeSet, DocumentError, DivergenceCategory

JUDGMENTS_FORMAT = "judgments"
VERDICTS_FORMAT = "majority-verdicts"
FORMAT_VERSION = 1

DEFAULT_PANEL_SIZE = 3


class ScoringError(ValueError):
    """Judgment data cannot be scored (incomplete panel, missing pair,
    conflicting records)."""


class Verdict(enum.Enum):
    YES = "yes"
    NO = "no"
    NOT_APPLICABLE = "na"

    @classmethod
    def parse(cls, value: str) -> "Verdict":
        try:
            return cls(value)
        except ValueError:
            allowed = ", ".join(v.value for v in cls)
            raise ScoringError(f"invalid verdict {value!r} (allowed: {allowed})") from None


@dataclass(frozen=True)
class Judgment:
    """One annotator's answer for one (item, system) pair.

    ``revision`` supports revisions: the highest revision per
    (annotator, item, system) is the effective judgment.
    """

    annotator_id: str
    item_id: str
    system_id: str
    verdict: Verdict
    revision: int = 0
    timestamp: float | None = None

    def __post_init__(self):
        if self.revision < 0:
            raise ValueError(f"negative revision {self.revision}")


# -- abstention policy --------------------------------------------------------

NON_POSITIVE = "non-positive"
EXCLUDED = "excluded"


@dataclass(frozen=True)
class NaPolicy:
    """How not-applicable verdicts enter the arithmetic.

    ``item_level``: "non-positive" keeps abstentions in the panel (they can
    only block a majority); "excluded" drops them before the majority test.
    ``judgment_level``: "excluded" drops abstentions from both numerator and
    denominator; "non-positive" keeps them in the denominator.
    """

    item_level: str = NON_POSITIVE
    judgment_level: str = EXCLUDED

    def __post_init__(self):
        for field_name in ("item_level", "judgment_level"):
            value = getattr(self, field_name)
            if value not in (NON_POSITIVE, EXCLUDED):
                raise ValueError(f"{field_name} must be {NON_POSITIVE!r} or {EXCLUDED!r}")

    def describe(self) -> str:
        return (
            f"not-applicable verdicts: {self.item_level} at item level, "
            f"{self.judgment_level} at judgment level"
        )


DEFAULT_NA_POLICY = NaPolicy()


# -- rates --------------------------------------------------------------------


class Rate(NamedTuple):
    """Exact rational rate; display rounding happens in one place only."""

    numerator: int
    denominator: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def percent(self) -> int | None:
        """Integer percent, round half up; None for an empty denominator."""
        if self.denominator == 0:
            return None
        return (200 * self.numerator + self.denominator) // (2 * self.denominator)


# -- aggregation --------------------------------------------------------------


@dataclass(frozen=True)
class AggregatedVerdict:
    """Panel outcome for one (item, system) pair.

    Counts are None when the verdict was loaded from a published majority
    mark rather than aggregated from raw judgments.
    """

    item_id: str
    system_id: str
    bridged: bool
    yes_count: int | None = None
    no_count: int | None = None
    na_count: int | None = None
    panel_size: int | None = None

    def __post_init__(self):
        counts = (self.yes_count, self.no_count, self.na_count, self.panel_size)
        if any(c is not None for c in counts):
            if any(c is None for c in counts):
                raise ValueError("counts must be all present or all absent")
            if self.yes_count + self.no_count + self.na_count != self.panel_size:
                raise ValueError("yes + no + na must equal panel_size")


def effective_judgments(judgments: Iterable[Judgment]) -> dict[tuple[str, str, str], Judgment]:
    """Latest revision per (annotator, item, system).

    Two records with the same key and revision but different verdicts are a
    conflict; byte-identical duplicates (e.g. a retried append) are tolerated.
    """
    effective: dict[tuple[str, str, str], Judgment] = {}
    for j in judgments:
        key = (j.annotator_id, j.item_id, j.system_id)
        current = effective.get(key)
        if current is None or j.revision > current.revision:
            effective[key] = j
        elif j.revision == current.revision and j.verdict is not current.verdict:
            raise ScoringError(
                f"conflicting judgments at revision {j.revision} for "
                f"({j.annotator_id}, {j.item_id}, {j.system_id})"
            )
    return effective


def bridged_from_counts(
    yes: int, no: int, na: int, panel_size: int, na_policy: NaPolicy = DEFAULT_NA_POLICY
) -> bool:
    """Strict-majority rule, with abstentions handled per policy."""
    effective_panel = panel_size - na if na_policy.item_level == EXCLUDED else panel_size
    return 2 * yes > effective_panel


def _panels(
    judgments: Iterable[Judgment], panel_size: int
) -> dict[tuple[str, str], list[Judgment]]:
    """Group effective judgments per (item, system); enforce full panels."""
    panels: dict[tuple[str, str], list[Judgment]] = {}
    for j in effective_judgments(judgments).values():
        panels.setdefault((j.item_id, j.system_id), []).append(j)
    for (item_id, system_id), panel in panels.items():
        if len(panel) != panel_size:
            annotators = ", ".join(sorted(j.annotator_id for j in panel))
            raise ScoringError(
                f"incomplete panel for ({item_id}, {system_id}): "
                f"{len(panel)} of {panel_size} judgments (from {annotators})"
            )
        panel.sort(key=lambda j: j.annotator_id)
    return panels


def aggregate(
    judgments: Iterable[Judgment],
    panel_size: int = DEFAULT_PANEL_SIZE,
    na_policy: NaPolicy = DEFAULT_NA_POLICY,
) -> list[AggregatedVerdict]:
    """Collapse full panels into per-(item, system) verdicts."""
    verdicts = []
    for (item_id, system_id), panel in sorted(_panels(judgments, panel_size).items()):
        yes = sum(1 for j in panel if j.verdict is Verdict.YES)
        no = sum(1 for j in panel if j.verdict is Verdict.NO)
        na = sum(1 for j in panel if j.verdict is Verdict.NOT_APPLICABLE)
        verdicts.append(AggregatedVerdict(
            item_id=item_id,
            system_id=system_id,
            bridged=bridged_from_counts(yes, no, na, panel_size, na_policy),
            yes_count=yes,
            no_count=no,
            na_count=na,
            panel_size=panel_size,
        ))
    return verdicts


# -- item-level scores --------------------------------------------------------


def _verdict_index(
    verdicts: Sequence[AggregatedVerdict], challenge_set: ChallengeSet
) -> tuple[tuple[str, ...], dict[tuple[str, str], bool]]:
    """(systems in first-appearance order, (item, system) -> bridged); the
    matrix must be complete over systems x items."""
    systems: dict[str, None] = {}
    index: dict[tuple[str, str], bool] = {}
    known = set(challenge_set.item_ids)
    for v in verdicts:
        if v.item_id not in known:
            raise ScoringError(f"verdict for unknown item {v.item_id!r}")
        systems.setdefault(v.system_id, None)
        pair = (v.item_id, v.system_id)
        if pair in index:
            raise ScoringError(f"duplicate verdict for {pair}")
        index[pair] = v.bridged
    if not systems:
        raise ScoringError("no verdicts to score")
    for system_id in systems:
        for item_id in challenge_set.item_ids:
            if (item_id, system_id) not in index:
                raise ScoringError(f"missing verdict for ({item_id}, {system_id})")
    return tuple(systems), index


def subcategory_scores(
    verdicts: Sequence[AggregatedVerdict], challenge_set: ChallengeSet
) -> dict[tuple[str, str], Rate]:
    """Bridged-item rate per (subcategory, system)."""
    systems, index = _verdict_index(verdicts, challenge_set)
    scores: dict[tuple[str, str], Rate] = {}
    for subcategory in challenge_set.subcategories():
        items = challenge_set.items_in_subcategory(subcategory)
        for system_id in systems:
            bridged = sum(1 for it in items if index[(it.id, system_id)])
            scores[(subcategory, system_id)] = Rate(bridged, len(items))
    return scores


def category_scores_item_level(
    verdicts: Sequence[AggregatedVerdict], challenge_set: ChallengeSet
) -> tuple[dict[tuple[DivergenceCategory, str], Rate], dict[str, Rate]]:
    """Bridged-item rate per (category, system), plus per-system overall."""
    systems, index = _verdict_index(verdicts, challenge_set)
    by_category: dict[tuple[DivergenceCategory, str], Rate] = {}
    overall: dict[str, Rate] = {}
    for system_id in systems:
        total_bridged = 0
        for category in DivergenceCategory:
            items = [it for it in challenge_set.items if it.category is category]
            if not items:
                continue
            bridged = sum(1 for it in items if index[(it.id, system_id)])
            by_category[(category, system_id)] = Rate(bridged, len(items))
            total_bridged += bridged
        overall[system_id] = Rate(total_bridged, len(challenge_set.items))
    return by_category, overall


# -- judgment-level scores ----------------------------------------------------


def _judgment_universe(
    judgments: Iterable[Judgment],
    challenge_set: ChallengeSet,
    panel_size: int,
) -> tuple[tuple[str, ...], dict[tuple[str, str], list[Judgment]]]:
    panels = _panels(judgments, panel_size)
    systems: dict[str, None] = {}
    known = set(challenge_set.item_ids)
    for item_id, system_id in panels:
        if item_id not in known:
            raise ScoringError(f"judgment for unknown item {item_id!r}")
        systems.setdefault(system_id, None)
    if not systems:
        raise ScoringError("no judgments to score")
    for system_id in systems:
        for item_id in challenge_set.item_ids:
            if (item_id, system_id) not in panels:
                raise ScoringError(f"missing panel for ({item_id}, {system_id})")
    return tuple(systems), panels


def judgment_level_scores(
    judgments: Iterable[Judgment],
    challenge_set: ChallengeSet,
    panel_size: int = DEFAULT_PANEL_SIZE,
    na_policy: NaPolicy = DEFAULT_NA_POLICY,
) -> tuple[dict[tuple[DivergenceCategory, str], Rate], dict[str, Rate]]:
    """Positive-judgment rate per (category, system), plus per-system overall.

    Every individual judgment counts once; abstentions enter per the policy.
    """
    systems, panels = _judgment_universe(judgments, challenge_set, panel_size)
    category_of = {it.id: it.category for it in challenge_set.items}

    yes: dict[tuple[DivergenceCategory, str], int] = {}
    total: dict[tuple[DivergenceCategory, str], int] = {}
    for (item_id, system_id), panel in panels.items():
        key = (category_of[item_id], system_id)
        for j in panel:
            if j.verdict is Verdict.NOT_APPLICABLE and na_policy.judgment_level == EXCLUDED:
                continue
            total[key] = total.get(key, 0) + 1
            if j.verdict is Verdict.YES:
                yes[key] = yes.get(key, 0) + 1

    present = {it.category for it in challenge_set.items}
    by_category: dict[tuple[DivergenceCategory, str], Rate] = {}
    overall: dict[str, Rate] = {}
    for system_id in systems:
        all_yes = all_total = 0
        for category in DivergenceCategory:
            if category not in present:
                continue
            key = (category, system_id)
            by_category[key] = Rate(yes.get(key, 0), total.get(key, 0))
            all_yes += yes.get(key, 0)
            all_total += total.get(key, 0)
        overall[system_id] = Rate(all_yes, all_total)
    return by_category, overall


def agreement(
    judgments: Iterable[Judgment],
    challenge_set: ChallengeSet,
    panel_size: int = DEFAULT_PANEL_SIZE,
) -> tuple[dict[DivergenceCategory, Rate], Rate]:
    """Fraction of panels whose verdicts are unanimous (any verdict,
    including not-applicable), per category and overall. All systems'
    panels for a category's items are pooled."""
    _, panels = _judgment_universe(judgments, challenge_set, panel_size)
    category_of = {it.id: it.category for it in challenge_set.items}

    unanimous: dict[DivergenceCategory, int] = {}
    total: dict[DivergenceCategory, int] = {}
    for (item_id, _system_id), panel in panels.items():
        category = category_of[item_id]
        total[category] = total.get(category, 0) + 1
        if len({j.verdict for j in panel}) == 1:
            unanimous[category] = unanimous.get(category, 0) + 1

    by_category = {
        category: Rate(unanimous.get(category, 0), total[category])
        for category in DivergenceCategory
        if category in total
    }
    overall = Rate(sum(unanimous.values()), sum(total.values()))
    return by_category, overall


# -- combined report ----------------------------------------------------------


@dataclass(frozen=True)
class ScoreReport:
    """Everything the report module renders, rates kept exact.

    ``judgment_by_category``, ``judgment_overall`` and the agreement fields
    are None when the report was built from majority verdicts alone.
    """

    systems: tuple[str, ...]
    panel_size: int
    na_policy: NaPolicy
    items_per_subcategory: Mapping[str, int]
    subcategory: Mapping[tuple[str, str], Rate]
    category_item: Mapping[tuple[DivergenceCategory, str], Rate]
    overall_item: Mapping[str, Rate]
    judgment_by_category: Mapping[tuple[DivergenceCategory, str], Rate] | None = None
    judgment_overall: Mapping[str, Rate] | None = None
    agreement_by_category: Mapping[DivergenceCategory, Rate] | None = None
    agreement_overall: Rate | None = None

    @property
    def has_judgments(self) -> bool:
        return self.judgment_by_category is not None


def build_score_report(
    challenge_set: ChallengeSet,
    verdicts: Sequence[AggregatedVerdict] | None = None,
    judgments: Sequence[Judgment] | None = None,
    panel_size: int = DEFAULT_PANEL_SIZE,
    na_policy: NaPolicy = DEFAULT_NA_POLICY,
) -> ScoreReport:
    """Score either raw judgments (full report) or majority verdicts
    (item-level report only). Exactly one of the two must be given."""
    if (verdicts is None) == (judgments is None):
        raise ScoringError("provide either verdicts or judgments, not both")

    judgment_by_category = judgment_overall = None
    agreement_by_category = agreement_overall = None
    if judgments is not None:
        verdicts = aggregate(judgments, panel_size, na_policy)
        judgment_by_category, judgment_overall = judgment_level_scores(
            judgments, challenge_set, panel_size, na_policy
        )
        agreement_by_category, agreement_overall = agreement(
            judgments, challenge_set, panel_size
        )

    assert verdicts is not None
    systems, _ = _verdict_index(verdicts, challenge_set)
    category_item, overall_item = category_scores_item_level(verdicts, challenge_set)
    return ScoreReport(
        systems=systems,
        panel_size=panel_size,
        na_policy=na_policy,
        items_per_subcategory={
            s: len(challenge_set.items_in_subcategory(s))
            for s in challenge_set.subcategories()
        },
        subcategory=subcategory_scores(verdicts, challenge_set),
        category_item=category_item,
        overall_item=overall_item,
        judgment_by_category=judgment_by_category,
        judgment_overall=judgment_overall,
        agreement_by_category=agreement_by_category,
        agreement_overall=agreement_overall,
    )


# -- documents ----------------------------------------------------------------


def parse_judgments(data: bytes | str) -> list[Judgment]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != JUDGMENTS_FORMAT:
        raise DocumentError(f"expected format {JUDGMENTS_FORMAT!r}")
    judgments = []
    for i, obj in enumerate(doc.get("judgments", [])):
        path = f"judgments[{i}]"
        if not isinstance(obj, dict):
            raise DocumentError("expected an object", path)
        try:
            judgments.append(Judgment(
                annotator_id=obj["annotator_id"],
                item_id=obj["item_id"],
                system_id=obj["system_id"],
                verdict=Verdict.parse(obj["verdict"]),
                revision=obj.get("revision", 0),
                timestamp=obj.get("timestamp"),
            ))
        except KeyError as exc:
            raise DocumentError(f"missing field {exc.args[0]}", path) from exc
        except (ScoringError, ValueError, TypeError) as exc:
            raise DocumentError(str(exc), path) from exc
    return judgments


def judgments_to_dict(judgments: Iterable[Judgment]) -> dict:
    rows = []
    for j in judgments:
        row: dict[str, object] = {
            "annotator_id": j.annotator_id,
            "item_id": j.item_id,
            "system_id": j.system_id,
            "verdict": j.verdict.value,
            "revision": j.revision,
        }
        if j.timestamp is not None:
            row["timestamp"] = j.timestamp
        rows.append(row)
    return {"format": JUDGMENTS_FORMAT, "format_version": FORMAT_VERSION, "judgments": rows}


def parse_verdicts(data: bytes | str) -> list[AggregatedVerdict]:
    """Load bare majority verdicts (no vote counts)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != VERDICTS_FORMAT:
        raise DocumentError(f"expected format {VERDICTS_FORMAT!r}")
    verdicts = []
    for i, obj in enumerate(doc.get("verdicts", [])):
        path = f"verdicts[{i}]"
        if not isinstance(obj, dict) or not isinstance(obj.get("bridged"), bool):
            raise DocumentError("expected {system_id, item_id, bridged}", path)
        verdicts.append(AggregatedVerdict(
            item_id=obj["item_id"], system_id=obj["system_id"], bridged=obj["bridged"],
        ))
    return verdicts
