"""Embedded evaluation fixture and the reproduction check.

The package ships a complete worked example: the 108-item challenge set,
three systems' translations of every item, the majority verdicts a
three-judge panel reached on each output, and the published result tables
those verdicts were reported in. :func:`reproduce` re-scores the verdicts
from scratch and diffs the outcome against the published tables.

Two kinds of comparison are made. Fine-grained subcategory rows must match
exactly (same item counts, same integer percents). The published summary
table was computed judgment-level from the individual votes, which were
never released, so item-level scores cannot equal it exactly; those rates
are checked against it within fixed tolerance bands instead, plus the
qualitative finding that NMT beats PBMT-1 in every category.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .core import ChallengeSet, DivergenceCategory, SystemOutputSet, parse_challenge_set, parse_outputs
from .scoring import AggregatedVerdict, ScoreReport, build_score_report, parse_verdicts

OVERALL_TOLERANCE = 4
CATEGORY_TOLERANCE = 10

CHALLENGE_SET_RESOURCE = "challenge_set.json"
OUTPUTS_RESOURCE = "system_outputs.json"
VERDICTS_RESOURCE = "majority_verdicts.json"
EXPECTED_RESOURCE = "expected_tables.json"


def _read(name: str) -> bytes:
    return resources.files("divergebench.data").joinpath(name).read_bytes()


def load_challenge_set() -> ChallengeSet:
    return parse_challenge_set(_read(CHALLENGE_SET_RESOURCE))


def load_outputs(challenge_set: ChallengeSet | None = None) -> SystemOutputSet:
    if challenge_set is None:
        challenge_set = load_challenge_set()
    return parse_outputs(_read(OUTPUTS_RESOURCE), challenge_set)


def load_verdicts() -> list[AggregatedVerdict]:
    return parse_verdicts(_read(VERDICTS_RESOURCE))


def load_expected_tables() -> dict:
    return json.loads(_read(EXPECTED_RESOURCE))


def score_fixture() -> ScoreReport:
    return build_score_report(load_challenge_set(), verdicts=load_verdicts())


@dataclass
class ReproductionResult:
    """Outcome of the reproduction diff; ``lines`` is printable as-is."""

    lines: list[str] = field(default_factory=list)
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def reproduce() -> ReproductionResult:
    """Re-score the embedded verdicts and diff against the published tables."""
    challenge_set = load_challenge_set()
    expected = load_expected_tables()
    report = build_score_report(challenge_set, verdicts=load_verdicts())
    result = ReproductionResult()

    rows = expected["fine_grained"]
    matched = 0
    for row in rows:
        subcategory, label = row["subcategory"], row["label"]
        row_ok = True
        count = report.items_per_subcategory.get(subcategory)
        if count != row["items"]:
            row_ok = False
            result.mismatches.append(
                f"{label}: expected {row['items']} items, fixture has {count}"
            )
        for system, want in row["scores"].items():
            rate = report.subcategory.get((subcategory, system))
            got = None if rate is None else rate.percent
            if got != want:
                row_ok = False
                result.mismatches.append(f"{label} / {system}: expected {want}%, scored {got}%")
        matched += row_ok
    result.lines.append(f"{matched}/{len(rows)} subcategory rows match")

    by_category: dict[DivergenceCategory, int] = {}
    for row in rows:
        category = challenge_set.category_of(row["subcategory"])
        by_category[category] = by_category.get(category, 0) + row["items"]
    counts_ok = len(challenge_set.items) == sum(r["items"] for r in rows) and all(
        sum(1 for it in challenge_set.items if it.category is c) == n
        for c, n in by_category.items()
    )
    if not counts_ok:
        result.mismatches.append("fixture item counts disagree with the published table")
    result.lines.append(
        f"{len(challenge_set.items)} items in {len(rows)} subcategories ("
        + ", ".join(f"{by_category[c]} {c.value}" for c in DivergenceCategory if c in by_category)
        + ")"
    )

    summary = expected["summary"]
    systems = expected["systems"]
    overall_ok = 0
    for system in systems:
        got = report.overall_item[system].percent
        want = summary["overall"][system]
        if abs(got - want) <= OVERALL_TOLERANCE:
            overall_ok += 1
        else:
            result.mismatches.append(
                f"overall / {system}: item-level {got}% is more than "
                f"{OVERALL_TOLERANCE} points from published {want}%"
            )
    result.lines.append(
        f"overall item-level rates within {OVERALL_TOLERANCE} points of the "
        f"published summary for {overall_ok}/{len(systems)} systems"
    )

    cells = cells_ok = 0
    ordering_ok = True
    for name, row in summary["categories"].items():
        category = DivergenceCategory(name)
        for system in systems:
            cells += 1
            got = report.category_item[(category, system)].percent
            if abs(got - row[system]) <= CATEGORY_TOLERANCE:
                cells_ok += 1
            else:
                result.mismatches.append(
                    f"{category.display_name} / {system}: item-level {got}% is more "
                    f"than {CATEGORY_TOLERANCE} points from published {row[system]}%"
                )
        nmt = report.category_item[(category, "NMT")].fraction
        pbmt = report.category_item[(category, "PBMT-1")].fraction
        if not nmt > pbmt:
            ordering_ok = False
            result.mismatches.append(
                f"{category.display_name}: NMT does not beat PBMT-1 ({nmt} vs {pbmt})"
            )
    result.lines.append(
        f"category item-level rates within {CATEGORY_TOLERANCE} points of the "
        f"published summary for {cells_ok}/{cells} cells"
    )
    if ordering_ok:
        result.lines.append("NMT beats PBMT-1 in every category")
    return result
