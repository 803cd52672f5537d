"""Command-line entry point.

Subcommands: validate, lint, sessions, serve, ingest, score, report,
reproduce. File arguments default to the bundled challenge set and fixture
so every command is runnable out of the box. Exit codes: 0 success, 1 for
findings or mismatches, 2 for usage errors.
"""

from __future__ import annotations

import functools
import json
from pathlib import Path

import click

from . import fixture, lint as lint_mod, report as report_mod
from .core import (
    ChallengeSet,
    DocumentError,
    SystemOutputSet,
    parse_challenge_set,
    parse_outputs,
    validate_challenge_set,
)
from .report import RenderError
from .scoring import (
    DEFAULT_PANEL_SIZE,
    EXCLUDED,
    NON_POSITIVE,
    NaPolicy,
    ScoringError,
    build_score_report,
    parse_judgments,
    parse_verdicts,
)
from .session import build_sessions, serialize_blinding_key, serialize_session
from .service.store import (
    ProjectStore,
    StoreError,
    parse_blind_judgments,
    parse_roster,
    resolve_data_dir,
)

_in_path = click.Path(exists=True, dir_okay=False, path_type=Path)
_dir_path = click.Path(file_okay=False, path_type=Path)


def _surfacing_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (DocumentError, ScoringError, StoreError, RenderError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _load_set(path: Path | None) -> ChallengeSet:
    if path is None:
        return fixture.load_challenge_set()
    return parse_challenge_set(path.read_bytes())


def _load_outputs(path: Path | None, challenge_set: ChallengeSet) -> SystemOutputSet:
    if path is None:
        return fixture.load_outputs(challenge_set)
    return parse_outputs(path.read_bytes(), challenge_set)


@click.group()
@click.version_option(package_name="divergebench")
def main():
    """Challenge-set evaluation for machine translation."""


@main.command()
@click.argument("challenge_set", required=False, type=_in_path)
@click.option("--max-tokens", type=int, default=None,
              help="Source-length warning threshold (tokens).")
@click.option("--strict", is_flag=True, help="Treat warnings as errors.")
@_surfacing_errors
def validate(challenge_set: Path | None, max_tokens: int | None, strict: bool):
    """Check a challenge-set document (default: the bundled set)."""
    loaded = _load_set(challenge_set)
    result = validate_challenge_set(loaded, max_source_tokens=max_tokens)
    click.echo(
        f"{len(loaded.items)} items, {len(loaded.subcategories())} subcategories, "
        f"{len(result.errors)} errors, {len(result.warnings)} warnings"
    )
    for line in result.as_lines():
        click.echo(line)
    if result.errors or (strict and result.warnings):
        raise SystemExit(1)


@main.command()
@click.argument("challenge_set", required=False, type=_in_path)
@click.option("--freq", "freq_path", type=_in_path,
              help="Frequency table (token<TAB>count lines).")
@click.option("--corpus", is_flag=True,
              help="Treat the --freq file as raw corpus text instead.")
@click.option("--min-count", default=lint_mod.DEFAULT_MIN_COUNT, show_default=True,
              help="Minimum training-corpus occurrences per source token.")
@click.option("--max-tokens", default=lint_mod.DEFAULT_MAX_SOURCE_TOKENS, show_default=True,
              help="Maximum source length in tokens.")
@click.option("--exception", "exceptions", multiple=True,
              help="Token exempt from the frequency check (repeatable).")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable findings.")
@_surfacing_errors
def lint(challenge_set, freq_path, corpus, min_count, max_tokens, exceptions, as_json):
    """Run authoring lints; exits 1 when anything is flagged."""
    loaded = _load_set(challenge_set)
    findings = []
    if freq_path is not None:
        table = lint_mod.load_frequency_table(
            freq_path.read_bytes(), mode="corpus" if corpus else "table"
        )
        findings += lint_mod.lint_vocabulary(loaded, table, min_count, exceptions).findings
    findings += lint_mod.lint_length(loaded, max_tokens).findings
    report = lint_mod.LintReport(findings)
    if as_json:
        click.echo(json.dumps(report.as_dicts(), ensure_ascii=False, indent=2))
    else:
        for line in report.as_lines():
            click.echo(line)
        click.echo(f"{len(findings)} finding(s)")
    if findings:
        raise SystemExit(1)


@main.command()
@click.argument("challenge_set", required=False, type=_in_path)
@click.option("--outputs", "outputs_path", type=_in_path,
              help="System-outputs document (default: bundled).")
@click.option("--annotator", "annotators", multiple=True, required=True,
              help="Annotator id (repeatable).")
@click.option("--seed", type=int, required=True, help="Master seed (64-bit).")
@click.option("--out", "out_dir", type=_dir_path, required=True,
              help="Directory for session and key files.")
@_surfacing_errors
def sessions(challenge_set, outputs_path, annotators, seed, out_dir):
    """Write per-annotator blinded session files plus the blinding key."""
    loaded = _load_set(challenge_set)
    outputs = _load_outputs(outputs_path, loaded)
    built, key = build_sessions(loaded, outputs, list(annotators), seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    for session in built:
        path = out_dir / f"session-{session.annotator_id}.json"
        path.write_text(serialize_session(session), encoding="utf-8")
        click.echo(f"wrote {path}")
    key_path = out_dir / "blinding_key.json"
    key_path.write_text(serialize_blinding_key(key), encoding="utf-8")
    click.echo(f"wrote {key_path} (sensitive: do not share with annotators)")
    slots = len(built) * len(loaded.items) * len(outputs.systems)
    click.echo(
        f"{len(built)} sessions x {len(loaded.items)} items x "
        f"{len(outputs.systems)} outputs = {slots} judgment slots"
    )


@main.command()
@click.option("--data-dir", type=_dir_path, default=None,
              help="Project storage directory (default: $DIVERGEBENCH_DATA).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8799, show_default=True)
def serve(data_dir, host, port):
    """Run the annotation service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(data_dir), host=host, port=port)


@main.command()
@click.argument("judgment_file", type=_in_path)
@click.option("--data-dir", type=_dir_path, default=None)
@click.option("--project", "project_id", required=True)
@click.option("--create", is_flag=True,
              help="Create the project first from --roster/--outputs/--seed.")
@click.option("--challenge-set", "set_path", type=_in_path,
              help="With --create: challenge set (default: bundled).")
@click.option("--outputs", "outputs_path", type=_in_path,
              help="With --create: outputs document (default: bundled).")
@click.option("--roster", "roster_path", type=_in_path,
              help="With --create: roster/token config.")
@click.option("--seed", type=int, default=None, help="With --create: master seed.")
@_surfacing_errors
def ingest(judgment_file, data_dir, project_id, create, set_path, outputs_path,
           roster_path, seed):
    """Append externally collected blind judgments to a project."""
    root = resolve_data_dir(data_dir)
    if create:
        if roster_path is None or seed is None:
            raise click.UsageError("--create requires --roster and --seed")
        loaded = _load_set(set_path)
        store = ProjectStore.create(
            root, loaded, _load_outputs(outputs_path, loaded),
            parse_roster(roster_path.read_bytes()), seed, project_id,
        )
        click.echo(f"created project {store.project_id} under {root}")
    else:
        store = ProjectStore.open(root, project_id)
    try:
        count = 0
        for annotator_id, item_id, blind_label, verdict in parse_blind_judgments(
            judgment_file.read_bytes()
        ):
            store.submit(annotator_id, item_id, blind_label, verdict)
            count += 1
    finally:
        store.close()
    click.echo(f"ingested {count} judgment(s) into project {project_id}")


def _na_options(fn):
    fn = click.option(
        "--na-item", type=click.Choice([NON_POSITIVE, EXCLUDED]),
        default=NON_POSITIVE, show_default=True,
        help="Abstentions at item level: count against the majority, or drop.",
    )(fn)
    fn = click.option(
        "--na-judgment", type=click.Choice([EXCLUDED, NON_POSITIVE]),
        default=EXCLUDED, show_default=True,
        help="Abstentions at judgment level: drop, or keep in the denominator.",
    )(fn)
    return fn


def _project_judgments(root: Path, project_id: str):
    """Effective judgments of a complete project; lists pending slots otherwise."""
    store = ProjectStore.open(root, project_id)
    try:
        judgments, pending = store.export()
    finally:
        store.close()
    if pending:
        shown = ", ".join(
            f"({p['annotator_id']}, {p['item_id']}, {p['system_id']})" for p in pending[:5]
        )
        more = "" if len(pending) <= 5 else f" and {len(pending) - 5} more"
        raise click.ClickException(
            f"project is incomplete: {len(pending)} unjudged slot(s): {shown}{more}"
        )
    return judgments, store.challenge_set


@main.command()
@click.option("--data-dir", type=_dir_path, default=None)
@click.option("--project", "project_id", help="Score a stored project.")
@click.option("--judgments", "judgments_path", type=_in_path,
              help="Score an unblinded judgments document instead.")
@click.option("--challenge-set", "set_path", type=_in_path,
              help="With --judgments: challenge set (default: bundled).")
@click.option("--panel", default=DEFAULT_PANEL_SIZE, show_default=True)
@_na_options
@_surfacing_errors
def score(data_dir, project_id, judgments_path, set_path, panel, na_item, na_judgment):
    """Aggregate judgments and print the score tables."""
    if (project_id is None) == (judgments_path is None):
        raise click.UsageError("provide exactly one of --project or --judgments")
    if project_id is not None:
        judgments, loaded = _project_judgments(resolve_data_dir(data_dir), project_id)
    else:
        judgments = parse_judgments(judgments_path.read_bytes())
        loaded = _load_set(set_path)
    score_report = build_score_report(
        loaded, judgments=judgments, panel_size=panel,
        na_policy=NaPolicy(item_level=na_item, judgment_level=na_judgment),
    )
    click.echo(report_mod.export(report_mod.summary_table(score_report)).decode("utf-8"))
    click.echo(
        report_mod.export(
            report_mod.fine_grained_table(score_report, loaded)
        ).decode("utf-8"),
        nl=False,
    )


@main.command("report")
@click.option("--embedded", is_flag=True, help="Use the bundled majority verdicts.")
@click.option("--data-dir", type=_dir_path, default=None)
@click.option("--project", "project_id")
@click.option("--judgments", "judgments_path", type=_in_path)
@click.option("--verdicts", "verdicts_path", type=_in_path,
              help="Majority-verdicts document (item-level report only).")
@click.option("--challenge-set", "set_path", type=_in_path)
@click.option("--table", type=click.Choice(["summary", "fine-grained", "both"]),
              default="both", show_default=True)
@click.option("--format", "fmt", type=click.Choice(report_mod.FORMATS),
              default=report_mod.MARKDOWN, show_default=True)
@click.option("--metric", "metrics", multiple=True, metavar="SYSTEM=VALUE",
              help="Corpus-metric footer cell, e.g. NMT=36.9 (repeatable).")
@click.option("--metric-label", default="BLEU", show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
              help="Write to a file instead of stdout.")
@click.option("--panel", default=DEFAULT_PANEL_SIZE, show_default=True)
@_na_options
@_surfacing_errors
def report_cmd(embedded, data_dir, project_id, judgments_path, verdicts_path, set_path,
               table, fmt, metrics, metric_label, out_path, panel, na_item, na_judgment):
    """Render score tables in markdown, CSV, or JSON."""
    sources = [embedded, project_id is not None, judgments_path is not None,
               verdicts_path is not None]
    if sum(sources) != 1:
        raise click.UsageError(
            "provide exactly one of --embedded, --project, --judgments, --verdicts"
        )
    na_policy = NaPolicy(item_level=na_item, judgment_level=na_judgment)
    if embedded:
        loaded = fixture.load_challenge_set()
        score_report = build_score_report(loaded, verdicts=fixture.load_verdicts())
    elif project_id is not None:
        judgments, loaded = _project_judgments(resolve_data_dir(data_dir), project_id)
        score_report = build_score_report(
            loaded, judgments=judgments, panel_size=panel, na_policy=na_policy
        )
    elif judgments_path is not None:
        loaded = _load_set(set_path)
        score_report = build_score_report(
            loaded, judgments=parse_judgments(judgments_path.read_bytes()),
            panel_size=panel, na_policy=na_policy,
        )
    else:
        loaded = _load_set(set_path)
        score_report = build_score_report(
            loaded, verdicts=parse_verdicts(verdicts_path.read_bytes())
        )

    metric_values = {}
    for spec_text in metrics:
        system, sep, value = spec_text.partition("=")
        if not sep:
            raise click.UsageError(f"--metric expects SYSTEM=VALUE, got {spec_text!r}")
        try:
            metric_values[system] = float(value)
        except ValueError:
            raise click.UsageError(f"--metric value must be numeric, got {value!r}")

    pieces = []
    if table in ("summary", "both"):
        pieces.append(report_mod.export(
            report_mod.summary_table(score_report, metric_values or None, metric_label),
            fmt,
        ))
    if table in ("fine-grained", "both"):
        pieces.append(report_mod.export(
            report_mod.fine_grained_table(score_report, loaded), fmt
        ))
    if len(pieces) > 1 and fmt != report_mod.MARKDOWN:
        raise click.UsageError(f"--format {fmt} requires --table summary or fine-grained")
    blob = b"\n".join(pieces)
    if out_path is not None:
        out_path.write_bytes(blob)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(blob.decode("utf-8"), nl=False)


@main.command()
@_surfacing_errors
def reproduce():
    """Re-score the bundled fixture and diff against the published tables."""
    result = fixture.reproduce()
    for line in result.lines:
        click.echo(line)
    if not result.ok:
        for mismatch in result.mismatches:
            click.echo(f"mismatch: {mismatch}", err=True)
        raise SystemExit(1)


if __name__ == "__main__":
    main()
