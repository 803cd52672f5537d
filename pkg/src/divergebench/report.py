"""Rendering of score reports as tables.

Two shapes: a summary table (one row per divergence category plus Overall,
one column per system plus the unanimous-agreement fraction) and a
fine-grained table (one row per subcategory with its item count). Corpus
metrics such as BLEU are accepted as labeled pass-through numbers for the
summary footer, never computed here.

Integer percents are taken straight from the exact rationals in the score
report; unavailable cells render as an em dash.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Mapping

from .core import DivergenceCategory
from .scoring import Rate, ScoreReport

UNAVAILABLE = "—"

MARKDOWN = "markdown"
CSV = "csv"
JSON = "json"
FORMATS = (MARKDOWN, CSV, JSON)

ITEM_LEVEL = "item-level"
JUDGMENT_LEVEL = "judgment-level"


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class SummaryRow:
    label: str
    cells: tuple[int | None, ...]
    agreement: int | None


@dataclass(frozen=True)
class SummaryTable:
    """Category rows + Overall; columns are systems + Agreement."""

    level: str
    policy_note: str
    systems: tuple[str, ...]
    rows: tuple[SummaryRow, ...]
    metric_label: str | None = None
    metric_values: Mapping[str, float] | None = None


@dataclass(frozen=True)
class FineGrainedRow:
    category: DivergenceCategory
    subcategory: str
    items: int
    cells: tuple[int | None, ...]


@dataclass(frozen=True)
class FineGrainedTable:
    systems: tuple[str, ...]
    rows: tuple[FineGrainedRow, ...]


def _percent(rate: Rate | None) -> int | None:
    return None if rate is None else rate.percent


def summary_table(
    report: ScoreReport,
    metric_values: Mapping[str, float] | None = None,
    metric_label: str = "BLEU",
) -> SummaryTable:
    """Category/Overall percents per system.

    Judgment-level rates are shown when the report has raw judgments,
    item-level rates otherwise; the table says which. The optional metric
    footer must only name systems the report covers.
    """
    if not report.systems:
        raise RenderError("nothing to render")
    if metric_values:
        unknown = sorted(set(metric_values) - set(report.systems))
        if unknown:
            raise RenderError(f"metric values for unknown systems: {', '.join(unknown)}")

    level = JUDGMENT_LEVEL if report.has_judgments else ITEM_LEVEL
    if report.has_judgments:
        by_category = report.judgment_by_category
        overall = report.judgment_overall
    else:
        by_category = report.category_item
        overall = report.overall_item

    rows = []
    for category in DivergenceCategory:
        cells = tuple(
            _percent(by_category.get((category, system))) for system in report.systems
        )
        if all(c is None for c in cells):
            continue
        agreement = None
        if report.agreement_by_category is not None:
            agreement = _percent(report.agreement_by_category.get(category))
        rows.append(SummaryRow(category.display_name, cells, agreement))
    rows.append(SummaryRow(
        "Overall",
        tuple(_percent(overall.get(system)) for system in report.systems),
        _percent(report.agreement_overall),
    ))
    return SummaryTable(
        level=level,
        policy_note=report.na_policy.describe(),
        systems=report.systems,
        rows=tuple(rows),
        metric_label=metric_label if metric_values else None,
        metric_values=dict(metric_values) if metric_values else None,
    )


def fine_grained_table(report: ScoreReport, challenge_set) -> FineGrainedTable:
    """One row per subcategory, in challenge-set order."""
    if not report.systems:
        raise RenderError("nothing to render")
    rows = []
    for subcategory in challenge_set.subcategories():
        rows.append(FineGrainedRow(
            category=challenge_set.category_of(subcategory),
            subcategory=subcategory,
            items=report.items_per_subcategory[subcategory],
            cells=tuple(
                _percent(report.subcategory.get((subcategory, system)))
                for system in report.systems
            ),
        ))
    return FineGrainedTable(systems=report.systems, rows=tuple(rows))


# -- export -------------------------------------------------------------------


def _cell(value: int | None, suffix: str = "") -> str:
    return UNAVAILABLE if value is None else f"{value}{suffix}"


def _metric_cell(table: SummaryTable, system: str) -> str:
    assert table.metric_values is not None
    value = table.metric_values.get(system)
    return UNAVAILABLE if value is None else format(value, "g")


def _markdown(rows: list[list[str]]) -> str:
    header, *body = rows
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join(" --- " for _ in header) + "|",
    ]
    lines += ["| " + " | ".join(row) + " |" for row in body]
    return "\n".join(lines) + "\n"


def _summary_rows(table: SummaryTable, suffix: str) -> list[list[str]]:
    rows = [["Category", *table.systems, "Agreement"]]
    for row in table.rows:
        rows.append([
            row.label,
            *(_cell(c, suffix) for c in row.cells),
            _cell(row.agreement, suffix),
        ])
    if table.metric_values is not None:
        assert table.metric_label is not None
        rows.append([
            table.metric_label,
            *(_metric_cell(table, s) for s in table.systems),
            UNAVAILABLE,
        ])
    return rows


def _fine_grained_rows(table: FineGrainedTable, suffix: str) -> list[list[str]]:
    rows = [["Category", "Subcategory", "#", *table.systems]]
    for row in table.rows:
        rows.append([
            row.category.display_name,
            row.subcategory,
            str(row.items),
            *(_cell(c, suffix) for c in row.cells),
        ])
    return rows


def _summary_json(table: SummaryTable) -> dict:
    doc: dict = {
        "format": "summary-table",
        "level": table.level,
        "policy": table.policy_note,
        "systems": list(table.systems),
        "rows": [
            {
                "label": r.label,
                "percents": dict(zip(table.systems, r.cells)),
                "agreement": r.agreement,
            }
            for r in table.rows
        ],
    }
    if table.metric_values is not None:
        doc["metric"] = {"label": table.metric_label, "values": dict(table.metric_values)}
    return doc


def _fine_grained_json(table: FineGrainedTable) -> dict:
    return {
        "format": "fine-grained-table",
        "systems": list(table.systems),
        "rows": [
            {
                "category": r.category.value,
                "subcategory": r.subcategory,
                "items": r.items,
                "percents": dict(zip(table.systems, r.cells)),
            }
            for r in table.rows
        ],
    }


def export(table: SummaryTable | FineGrainedTable, format: str = MARKDOWN) -> bytes:
    """Deterministic bytes for a table; CSV is UTF-8 with LF endings."""
    if format not in FORMATS:
        raise RenderError(f"unknown format {format!r} (allowed: {', '.join(FORMATS)})")
    is_summary = isinstance(table, SummaryTable)
    if format == JSON:
        doc = _summary_json(table) if is_summary else _fine_grained_json(table)
        return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")

    if format == CSV:
        rows = _summary_rows(table, "") if is_summary else _fine_grained_rows(table, "")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(rows)
        return buf.getvalue().encode("utf-8")

    rows = _summary_rows(table, "%") if is_summary else _fine_grained_rows(table, "%")
    text = _markdown(rows)
    if is_summary:
        text = f"Scores are {table.level}; {table.policy_note}.\n\n" + text
    return text.encode("utf-8")


def score_report_to_dict(report: ScoreReport) -> dict:
    """Machine-readable mirror of every ScoreReport field."""

    def rate(r: Rate | None) -> dict | None:
        if r is None:
            return None
        return {"numerator": r.numerator, "denominator": r.denominator, "percent": r.percent}

    doc: dict = {
        "format": "score-report",
        "systems": list(report.systems),
        "panel_size": report.panel_size,
        "na_policy": {
            "item_level": report.na_policy.item_level,
            "judgment_level": report.na_policy.judgment_level,
        },
        "items_per_subcategory": dict(report.items_per_subcategory),
        "subcategory": [
            {"subcategory": sub, "system": system, **rate(r)}
            for (sub, system), r in report.subcategory.items()
        ],
        "category_item": [
            {"category": cat.value, "system": system, **rate(r)}
            for (cat, system), r in report.category_item.items()
        ],
        "overall_item": {system: rate(r) for system, r in report.overall_item.items()},
    }
    if report.judgment_by_category is not None:
        doc["judgment_by_category"] = [
            {"category": cat.value, "system": system, **rate(r)}
            for (cat, system), r in report.judgment_by_category.items()
        ]
        doc["judgment_overall"] = {
            system: rate(r) for system, r in (report.judgment_overall or {}).items()
        }
    if report.agreement_by_category is not None:
        doc["agreement_by_category"] = {
            cat.value: rate(r) for cat, r in report.agreement_by_category.items()
        }
        doc["agreement_overall"] = rate(report.agreement_overall)
    return doc
