"""Command-line driver: ingestion, recommendation, evaluation, reports.

Report commands write delimited output to stdout (or ``--out``) and, when
``--out`` is given, render matplotlib figures next to the delimited files.
Exit codes: 0 success, 1 warnings escalated by ``--strict``, 2 fatal.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click

from . import analysis, engine, fixtures, plots, reports
from .errors import SiteRecError
from .hierarchy import Snapshot
from .ingest import build_snapshot, load_manifest, load_snapshot

JSON_KW = {"sort_keys": True, "indent": 2}


def _fail(message: str, code: int = 2) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(manifest_path: str):
    try:
        return load_snapshot(manifest_path)
    except SiteRecError as exc:
        _fail(str(exc))


def _read_profile(snapshot: Snapshot, urp_path: str, year: int | None):
    try:
        document = json.loads(Path(urp_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _fail(f"cannot read profile {urp_path}: {exc}")
    if year is not None:
        document["year"] = year
    try:
        return engine.parse_profile(document)
    except SiteRecError as exc:
        _fail(f"{urp_path}: {exc}")


def _pick_year(snapshot: Snapshot, year: int | None) -> int:
    if year is not None:
        return year
    if not snapshot.years:
        _fail("snapshot holds no observations; give --year explicitly")
    return max(snapshot.years)


def _csv_lines(rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def _write(out: str | None, name: str, text: str) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        target = Path(out) / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
        click.echo(f"wrote {target}")


@click.group()
@click.version_option(package_name="siterec")
def main() -> None:
    """Data-driven site selection toolkit."""


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--strict", is_flag=True, help="Exit 1 when the report has warnings.")
def ingest(manifest: str, strict: bool) -> None:
    """Validate a dataset manifest and print the ingestion report."""
    try:
        parsed = load_manifest(manifest)
    except SiteRecError as exc:
        _fail(str(exc))
    snapshot, report = build_snapshot(parsed)
    for line in report.summary_lines():
        click.echo(line)
    for warning in report.warnings:
        click.echo(f"warning: {warning}")
    for fatal in report.fatal:
        click.echo(f"fatal: {fatal}", err=True)
    if snapshot is None:
        sys.exit(2)
    click.echo(f"version: {snapshot.version}")
    if strict and report.warnings:
        sys.exit(1)


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--urp", "urp_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--top", "top_k", type=int, default=None, help="Keep only the best K sites.")
@click.option("--format", "fmt", type=click.Choice(["table", "csv", "json"]), default="table")
@click.option("--year", type=int, default=None, help="Override the profile year.")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def recommend(manifest, urp_path, top_k, fmt, year, out) -> None:
    """Rank candidate sites for a requirement profile."""
    snapshot, _, _ = _load(manifest)
    profile = _read_profile(snapshot, urp_path, year)
    try:
        ranked = engine.recommend(snapshot, profile, top_k)
    except SiteRecError as exc:
        _fail(str(exc))

    if fmt == "json":
        click.echo(engine.ranking_to_json(ranked, snapshot.version, profile.year))
    elif fmt == "csv":
        rows = [["rank", "site", "name", "score"]]
        rows += [
            [str(i + 1), r.site_code, snapshot.hierarchy.site(r.site_code).name, repr(r.total)]
            for i, r in enumerate(ranked)
        ]
        _write(out, "recommendations.csv", _csv_lines(rows))
    else:
        click.echo(f"snapshot {snapshot.version}  year {profile.year}  "
                   f"{len(ranked)} ranked sites")
        click.echo(f"{'rank':>4}  {'site':<24} {'score':>8}  name")
        for i, rec in enumerate(ranked):
            name = snapshot.hierarchy.site(rec.site_code).name
            click.echo(f"{i + 1:>4}  {rec.site_code:<24} {rec.total:8.4f}  {name}")

    if out is not None:
        if fmt != "csv":
            rows = [["rank", "site", "name", "score"]]
            rows += [
                [str(i + 1), r.site_code, snapshot.hierarchy.site(r.site_code).name, repr(r.total)]
                for i, r in enumerate(ranked)
            ]
            _write(out, "recommendations.csv", _csv_lines(rows))
        plots.save_score_bars(
            [(r.site_code, r.total) for r in ranked], Path(out) / "scores.png"
        )
        click.echo(f"wrote {Path(out) / 'scores.png'}")


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--urp", "urp_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--chain", "chain_labels", required=True, multiple=True,
              help="Chain label from the manifest, one per --urp.")
@click.option("--format", "fmt", type=click.Choice(["table", "csv", "json"]), default="table")
@click.option("--year", type=int, default=None, help="Override the profile year.")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def evaluate(manifest, urp_paths, chain_labels, fmt, year, out) -> None:
    """Cross-classify store presence against profile criteria per chain."""
    if len(urp_paths) != len(chain_labels):
        _fail("need exactly one --chain per --urp")
    snapshot, _, chains = _load(manifest)
    pairs = []
    for urp_path, label in zip(urp_paths, chain_labels):
        if label not in chains:
            _fail(f"unknown chain '{label}'; manifest defines {sorted(chains)}")
        pairs.append((_read_profile(snapshot, urp_path, year), chains[label]))

    occupied = frozenset().union(*(chain.sites for _, chain in pairs))
    try:
        evaluations = [
            reports.evaluate_chain(snapshot, profile, chain, occupied)
            for profile, chain in pairs
        ]
    except SiteRecError as exc:
        _fail(str(exc))
    overall = reports.overall_overlap(evaluations)

    if fmt == "json":
        payload = {
            "version": snapshot.version,
            "results": [reports.chain_evaluation_to_dict(e) for e in evaluations],
            "overall": overall,
        }
        click.echo(json.dumps(payload, **JSON_KW))
    elif fmt == "csv":
        _write(out, "evaluation.csv", _csv_lines(_evaluation_rows(evaluations, overall)))
    else:
        click.echo(f"snapshot {snapshot.version}")
        for evaluation in evaluations:
            click.echo(reports.contingency_text(evaluation))
            click.echo("")
        if overall["overlap_percent"] is not None:
            click.echo(
                f"overall overlap: {overall['overlap_percent']:.1f} % "
                f"({overall['matched']} of {overall['stores']} stores)"
            )

    if out is not None:
        if fmt != "csv":
            _write(out, "evaluation.csv", _csv_lines(_evaluation_rows(evaluations, overall)))
        rows = [
            (e.label, e.overlap_exact) for e in evaluations if e.overlap_exact is not None
        ]
        if rows:
            plots.save_overlap_bars(rows, Path(out) / "overlap.png")
            click.echo(f"wrote {Path(out) / 'overlap.png'}")


def _evaluation_rows(evaluations, overall) -> list[list[str]]:
    rows = [[
        "chain", "store_fulfilled", "store_unfulfilled", "nostore_fulfilled",
        "nostore_unfulfilled", "universe", "overlap_percent", "new_sites",
    ]]
    for e in evaluations:
        table = e.table
        rows.append([
            e.label,
            str(table.store_fulfilled), str(table.store_unfulfilled),
            str(table.nostore_fulfilled), str(table.nostore_unfulfilled),
            str(table.universe_size),
            "" if e.overlap_exact is None else f"{analysis.display_percent(e.overlap_exact):.1f}",
            str(e.new_sites),
        ])
    if overall["overlap_percent"] is not None:
        rows.append([
            "overall", str(overall["matched"]), "", "", "", "",
            f"{overall['overlap_percent']:.1f}", "",
        ])
    return rows


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--year", type=int, default=None, help="Default: latest year in the snapshot.")
@click.option("--level", default=None, help="Site level to correlate over (default: lowest).")
@click.option("--under", default=None, help="Restrict sites to one subtree.")
@click.option("--factor", "factor_ids", multiple=True,
              help="Factor ids to include (default: all).")
@click.option("--chain", "chain_labels", multiple=True,
              help="Chain labels to include as store counts (default: all).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def correlate(manifest, year, level, under, factor_ids, chain_labels, fmt, out) -> None:
    """Correlation matrix over chains' store counts and location factors."""
    snapshot, _, chains = _load(manifest)
    year = _pick_year(snapshot, year)
    level = level or snapshot.hierarchy.levels.bottom

    attributes: list[tuple[str, analysis.ValueSource]] = []
    labels = chain_labels or sorted(chains)
    for label in labels:
        if label not in chains:
            _fail(f"unknown chain '{label}'; manifest defines {sorted(chains)}")
        attributes.append((f"{label} stores", chains[label]))
    ids = factor_ids or [f.id for f in snapshot.factors()]
    for fid in ids:
        try:
            factor = snapshot.factor(fid)
        except SiteRecError as exc:
            _fail(str(exc))
        attributes.append((factor.name, fid))

    try:
        sites = snapshot.hierarchy.sites_at_level(level, under=under)
        matrix = analysis.correlation_matrix(snapshot, attributes, sites, year)
    except SiteRecError as exc:
        _fail(str(exc))

    if fmt == "json":
        payload = {"version": snapshot.version, "year": year, **reports.matrix_to_dict(matrix)}
        click.echo(json.dumps(payload, **JSON_KW))
    else:
        _write(out, "correlation_matrix.csv", _csv_lines(reports.matrix_to_csv_rows(matrix)))
    if out is not None:
        if fmt != "csv":
            _write(out, "correlation_matrix.csv", _csv_lines(reports.matrix_to_csv_rows(matrix)))
        plots.save_correlation_heatmap(matrix, Path(out) / "correlation_matrix.png")
        click.echo(f"wrote {Path(out) / 'correlation_matrix.png'}")


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--year", type=int, default=None, help="Default: latest year in the snapshot.")
@click.option("--level", default=None, help="Site level to profile (default: lowest).")
@click.option("--under", default=None, help="Restrict sites to one subtree.")
@click.option("--bounds", default="0,2500,5000,10000",
              help="Comma-separated bucket bounds on inhabitants; last bucket is open.")
@click.option("--metric", default="index",
              help="'index' (purchasing-power index) or a factor id.")
@click.option("--format", "fmt", type=click.Choice(["table", "csv", "json"]), default="table")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def profile(manifest, year, level, under, bounds, metric, fmt, out) -> None:
    """Population-bucket means and per-chain group profiles."""
    snapshot, _, chains = _load(manifest)
    year = _pick_year(snapshot, year)
    level = level or snapshot.hierarchy.levels.bottom
    try:
        edges = [float(b) for b in bounds.split(",") if b.strip() != ""]
    except ValueError:
        _fail(f"invalid --bounds '{bounds}'")
    edges.append(float("inf"))

    if metric == "index":
        metric_label = "purchasing-power index"
        source: analysis.ValueSource = analysis.power_index_source(snapshot, year)
    else:
        try:
            metric_label = snapshot.factor(metric).name
        except SiteRecError as exc:
            _fail(str(exc))
        source = metric

    try:
        universe = snapshot.hierarchy.sites_at_level(level, under=under)
        bucket_series = {"all": analysis.bucket_stats(snapshot, universe, edges, source, year)}
        for label in sorted(chains):
            members = chains[label].sites & frozenset(universe)
            bucket_series[label] = analysis.bucket_stats(snapshot, members, edges, source, year)
        groups = analysis.chain_profile(
            snapshot, [chains[label] for label in sorted(chains)], year, universe
        )
    except SiteRecError as exc:
        _fail(str(exc))

    bucket_rows = [["group", "bucket_low", "bucket_high", "count", "mean"]]
    for label, breakdown in bucket_series.items():
        for bucket in breakdown.buckets:
            bucket_rows.append([
                label,
                f"{bucket.lower:g}",
                "" if bucket.upper == float("inf") else f"{bucket.upper:g}",
                str(bucket.count),
                "" if bucket.mean is None else repr(bucket.mean),
            ])
    group_rows = [["group", "sites", "mean_power_index", "mean_unemployment"]]
    for entry in reports.group_profiles_to_dicts(groups):
        group_rows.append([
            entry["group"], str(entry["sites"]),
            "" if entry["mean_power_index"] is None else repr(entry["mean_power_index"]),
            "" if entry["mean_unemployment"] is None else repr(entry["mean_unemployment"]),
        ])

    if fmt == "json":
        payload = {
            "version": snapshot.version,
            "year": year,
            "metric": metric_label,
            "buckets": {label: reports.buckets_to_dict(b) for label, b in bucket_series.items()},
            "groups": reports.group_profiles_to_dicts(groups),
        }
        click.echo(json.dumps(payload, **JSON_KW))
    elif fmt == "csv":
        _write(out, "population_buckets.csv", _csv_lines(bucket_rows))
        _write(out, "chain_groups.csv", _csv_lines(group_rows))
    else:
        click.echo(f"snapshot {snapshot.version}  year {year}  metric {metric_label}")
        click.echo(f"\nmean {metric_label} by population bucket:")
        for row in bucket_rows:
            click.echo("  " + "  ".join(f"{cell:>14}" for cell in row))
        click.echo("\ngroup means:")
        for row in group_rows:
            click.echo("  " + "  ".join(f"{cell:>18}" for cell in row))

    if out is not None:
        if fmt != "csv":
            _write(out, "population_buckets.csv", _csv_lines(bucket_rows))
            _write(out, "chain_groups.csv", _csv_lines(group_rows))
        plots.save_bucket_chart(bucket_series, Path(out) / "population_buckets.png", metric_label)
        plots.save_group_chart(groups, Path(out) / "chain_groups.png")
        click.echo(f"wrote {Path(out) / 'population_buckets.png'}")
        click.echo(f"wrote {Path(out) / 'chain_groups.png'}")


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8080)
def serve(manifest: str, host: str, port: int) -> None:
    """Start the HTTP service for the given dataset."""
    import uvicorn

    from .service import build_app

    try:
        app = build_app(manifest)
    except SiteRecError as exc:
        _fail(str(exc))
    uvicorn.run(app, host=host, port=port)


@main.group()
def fixture() -> None:
    """Generate bundled datasets."""


@fixture.command()
@click.option("--out", required=True, type=click.Path(file_okay=False))
def supermarket(out: str) -> None:
    """Write the supermarket case-study dataset (1704 municipalities)."""
    manifest_path = fixtures.write_dataset(fixtures.supermarket_case(), out)
    click.echo(f"wrote {manifest_path}")


@fixture.command()
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--municipalities", type=int, default=200, show_default=True)
@click.option("--districts", type=int, default=12, show_default=True)
@click.option("--states", type=int, default=3, show_default=True)
@click.option("--threshold", type=int, default=5000, show_default=True)
def synthetic(out, seed, municipalities, districts, states, threshold) -> None:
    """Write a seeded synthetic country with rule-based store placement."""
    dataset = fixtures.synthetic_country(
        seed,
        municipalities=municipalities,
        districts=districts,
        states=states,
        threshold=threshold,
    )
    manifest_path = fixtures.write_dataset(dataset, out)
    click.echo(f"wrote {manifest_path}")
