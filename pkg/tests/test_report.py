import csv
import io
import json
import random

import pytest

from divergebench.report import (
    FineGrainedTable,
    RenderError,
    SummaryTable,
    export,
    fine_grained_table,
    score_report_to_dict,
    summary_table,
)
from divergebench.scoring import (
    NaPolicy,
    ScoreReport,
    Verdict,
    build_score_report,
)

from helpers import make_set, panel_judgments

Y, N, NA = Verdict.YES, Verdict.NO, Verdict.NOT_APPLICABLE


@pytest.fixture(scope="module")
def embedded_report():
    from divergebench import fixture

    return build_score_report(fixture.load_challenge_set(), verdicts=fixture.load_verdicts())


@pytest.fixture()
def judgment_report():
    challenge_set = make_set()
    rng = random.Random(13)
    judgments = panel_judgments(
        challenge_set, verdict_for=lambda *_: rng.choice((Y, Y, N, NA))
    )
    return build_score_report(challenge_set, judgments=judgments), challenge_set


def _rows(blob: bytes, fmt: str) -> list[list[str]]:
    text = blob.decode("utf-8")
    if fmt == "csv":
        return list(csv.reader(io.StringIO(text)))
    rows = []
    for line in text.splitlines():
        if not line.startswith("|") or set(line) <= {"|", "-", " "}:
            continue
        rows.append([cell.strip() for cell in line.strip("|").split("|")])
    return rows


def test_summary_table_item_level(embedded_report):
    table = summary_table(embedded_report)
    assert table.level == "item-level"
    assert table.systems == ("PBMT-1", "NMT", "Google")
    overall = table.rows[-1]
    assert overall.label == "Overall"
    assert overall.cells == (30, 50, 67)
    assert overall.agreement is None
    assert table.metric_values is None


def test_summary_table_judgment_level(judgment_report):
    report, _ = judgment_report
    table = summary_table(report)
    assert table.level == "judgment-level"
    assert all(row.agreement is not None for row in table.rows)
    assert "non-positive at item level" in table.policy_note


def test_metric_footer_rendered_verbatim(embedded_report):
    table = summary_table(
        embedded_report, metric_values={"PBMT-1": 34.2, "NMT": 36.9}
    )
    blob = export(table).decode("utf-8")
    line = next(l for l in blob.splitlines() if l.startswith("| BLEU"))
    assert line == "| BLEU | 34.2 | 36.9 | — | — |"


def test_metric_for_unknown_system_rejected(embedded_report):
    with pytest.raises(RenderError, match="unknown systems: mystery-mt"):
        summary_table(embedded_report, metric_values={"mystery-mt": 1.0})


def test_agreement_dash_when_item_level(embedded_report):
    rows = _rows(export(summary_table(embedded_report)), "markdown")
    header = rows[0]
    assert header[-1] == "Agreement"
    assert all(row[-1] == "—" for row in rows[1:])


def test_fine_grained_follows_set_order(embedded_report, embedded_set):
    table = fine_grained_table(embedded_report, embedded_set)
    assert len(table.rows) == 26
    assert [r.subcategory for r in table.rows] == list(embedded_set.subcategories())
    assert sum(r.items for r in table.rows) == 108


def test_fine_grained_cells_match_report_rates(embedded_report, embedded_set):
    table = fine_grained_table(embedded_report, embedded_set)
    for row in table.rows:
        for system_id, cell in zip(table.systems, row.cells):
            assert cell == embedded_report.subcategory[(row.subcategory, system_id)].percent


def test_markdown_round_trips_cell_values(embedded_report, embedded_set):
    table = fine_grained_table(embedded_report, embedded_set)
    rows = _rows(export(table, "markdown"), "markdown")
    assert rows[0] == ["Category", "Subcategory", "#", "PBMT-1", "NMT", "Google"]
    for parsed, row in zip(rows[1:], table.rows):
        assert parsed[1] == row.subcategory
        assert int(parsed[2]) == row.items
        assert [f"{c}%" for c in row.cells] == parsed[3:]


def test_csv_export_shape(embedded_report, embedded_set):
    blob = export(fine_grained_table(embedded_report, embedded_set), "csv")
    assert b"\r" not in blob
    lines = blob.decode("utf-8").splitlines()
    assert len(lines) == 27
    rows = _rows(blob, "csv")
    assert rows[0][0] == "Category"
    assert rows[1][3].isdigit()


def test_summary_csv_round_trip(judgment_report):
    report, _ = judgment_report
    table = summary_table(report)
    rows = _rows(export(table, "csv"), "csv")
    for parsed, row in zip(rows[1:], table.rows):
        assert parsed[0] == row.label
        assert [int(c) for c in parsed[1:-1]] == list(row.cells)


def test_json_export_mirrors_cells(embedded_report, embedded_set):
    doc = json.loads(export(fine_grained_table(embedded_report, embedded_set), "json"))
    assert doc["format"] == "fine-grained-table"
    assert len(doc["rows"]) == 26
    first = doc["rows"][0]
    assert first["percents"]["NMT"] == embedded_report.subcategory[
        (first["subcategory"], "NMT")
    ].percent
    summary_doc = json.loads(export(summary_table(embedded_report), "json"))
    assert summary_doc["rows"][-1]["label"] == "Overall"
    assert summary_doc["rows"][-1]["agreement"] is None


def test_export_deterministic(embedded_report, embedded_set):
    table = fine_grained_table(embedded_report, embedded_set)
    for fmt in ("markdown", "csv", "json"):
        assert export(table, fmt) == export(table, fmt)


def test_unknown_format_rejected(embedded_report):
    with pytest.raises(RenderError, match="unknown format 'tsv'"):
        export(summary_table(embedded_report), "tsv")


def test_empty_report_has_nothing_to_render():
    empty = ScoreReport(
        systems=(), panel_size=3, na_policy=NaPolicy(),
        items_per_subcategory={}, subcategory={}, category_item={}, overall_item={},
    )
    with pytest.raises(RenderError, match="nothing to render"):
        summary_table(empty)
    with pytest.raises(RenderError, match="nothing to render"):
        fine_grained_table(empty, make_set())


def test_no_rerounding_drift(judgment_report):
    report, challenge_set = judgment_report
    table = fine_grained_table(report, challenge_set)
    for row in table.rows:
        for system_id, cell in zip(table.systems, row.cells):
            rate = report.subcategory[(row.subcategory, system_id)]
            assert cell == rate.percent
    summary = summary_table(report)
    for row, category in zip(summary.rows, list(report.agreement_by_category)):
        if row.label == "Overall":
            continue
        assert row.agreement == report.agreement_by_category[category].percent


def test_markdown_header_states_level_and_policy(judgment_report):
    report, _ = judgment_report
    text = export(summary_table(report)).decode("utf-8")
    assert text.startswith("Scores are judgment-level; not-applicable verdicts:")


def test_score_report_to_dict_mirrors_fields(judgment_report):
    report, _ = judgment_report
    doc = score_report_to_dict(report)
    assert doc["format"] == "score-report"
    assert doc["systems"] == list(report.systems)
    assert doc["panel_size"] == 3
    assert doc["na_policy"] == {"item_level": "non-positive", "judgment_level": "excluded"}
    assert len(doc["subcategory"]) == len(report.subcategory)
    sample = doc["subcategory"][0]
    rate = report.subcategory[(sample["subcategory"], sample["system"])]
    assert (sample["numerator"], sample["denominator"]) == (rate.numerator, rate.denominator)
    assert sample["percent"] == rate.percent
    assert "agreement_overall" in doc
    item_only = ScoreReport(
        systems=report.systems, panel_size=3, na_policy=NaPolicy(),
        items_per_subcategory=report.items_per_subcategory,
        subcategory=report.subcategory, category_item=report.category_item,
        overall_item=report.overall_item,
    )
    trimmed = score_report_to_dict(item_only)
    assert "judgment_by_category" not in trimmed
    assert "agreement_overall" not in trimmed
