"""Command-line entry points.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
failure in all requested models.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys

import click

from .errors import ConfigError, DataError, NumericalError
from .ingest import (join_weather, parse_name_map, parse_weather_csv,
                     parse_wide_csv, repair_cumulative, to_daily)
from .runner import load_config, reproduce, run


def _fail(exc) -> "SystemExit":
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, ConfigError):
        return SystemExit(1)
    if isinstance(exc, DataError):
        return SystemExit(2)
    if isinstance(exc, NumericalError):
        return SystemExit(3)
    return SystemExit(1)


@click.group()
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--jobs", type=int, default=None, help="Worker count for batch runs.")
@click.option("--verbose", is_flag=True, default=False)
@click.pass_context
def main(ctx, seed, jobs, verbose):
    """Epidemic case-count forecasting toolkit."""
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, jobs=jobs, verbose=verbose)


@main.command("ingest")
@click.option("--cases", "cases_path", required=True, type=click.Path())
@click.option("--deaths", "deaths_path", default="", type=click.Path())
@click.option("--weather", "weather_path", default="", type=click.Path())
@click.option("--name-map", "name_map_path", default="", type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def ingest_cmd(ctx, cases_path, deaths_path, weather_path, name_map_path, out_dir):
    """Normalize wide CSVs into tidy per-region daily series."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        weather = name_map = None
        if weather_path:
            with open(weather_path, "rb") as fh:
                weather = parse_weather_csv(fh.read())
        if name_map_path:
            with open(name_map_path, "rb") as fh:
                name_map = parse_name_map(fh.read())
        summary = []
        for measure, path in (("confirmed", cases_path), ("deaths", deaths_path)):
            if not path:
                continue
            with open(path, "rb") as fh:
                series_list = parse_wide_csv(fh.read(), measure)
            for series in series_list:
                repaired, n_rep = repair_cumulative(series)
                daily = to_daily(repaired)
                stem = "".join(c if c.isalnum() else "_"
                               for c in series.key.label.lower())
                out_path = os.path.join(out_dir, f"{stem}_{measure}.csv")
                with open(out_path, "w", encoding="utf-8") as fh:
                    fh.write("date,cumulative,daily\n")
                    for d, c, inc in zip(repaired.dates(), repaired.values,
                                         daily.values):
                        fh.write(f"{d.isoformat()},{c:.0f},{inc:.0f}\n")
                joined_note = ""
                if weather is not None and name_map is not None:
                    try:
                        rows, dropped = join_weather(daily, weather, name_map)
                        joined_note = f" joined={len(rows)} dropped={dropped}"
                    except DataError as exc:
                        joined_note = f" join-skipped ({exc})"
                summary.append(f"{series.key.label} [{measure}]: "
                               f"{len(series)} days, {n_rep} repairs{joined_note}")
        for line in summary:
            click.echo(line)
    except OSError as exc:
        raise _fail(DataError(str(exc)))
    except (ConfigError, DataError, NumericalError) as exc:
        raise _fail(exc)


def _load_config_with_overrides(ctx, config_path):
    cfg = load_config(config_path)
    updates = {}
    if ctx.obj.get("seed") is not None:
        updates["seed"] = ctx.obj["seed"]
    if ctx.obj.get("jobs") is not None:
        updates["jobs"] = ctx.obj["jobs"]
    return dataclasses.replace(cfg, **updates) if updates else cfg


@main.command("forecast")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.pass_context
def forecast_cmd(ctx, config_path):
    """Fit the configured models per region and write the report."""
    try:
        cfg = _load_config_with_overrides(ctx, config_path)
        report = run(cfg)
    except (ConfigError, DataError, NumericalError) as exc:
        raise _fail(exc)
    ok_rows = [r for r in report.rows if r.error == ""]
    if ctx.obj.get("verbose"):
        click.echo(report.to_csv(), nl=False)
    click.echo(f"wrote {os.path.join(cfg.out_dir, 'report.csv')} "
               f"({len(ok_rows)}/{len(report.rows)} rows ok)")
    if not ok_rows:
        raise _fail(NumericalError("every requested model failed"))


@main.command("classify")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.pass_context
def classify_cmd(ctx, config_path):
    """Train the weather classifiers and report test AUC."""
    from .classify import build_labels, weather_report
    from .runner import load_regions

    try:
        cfg = _load_config_with_overrides(ctx, config_path)
        if not cfg.weather_path or not cfg.name_map_path:
            raise ConfigError("classify needs data.weather and data.name_map")
        with open(cfg.weather_path, "rb") as fh:
            weather = parse_weather_csv(fh.read())
        with open(cfg.name_map_path, "rb") as fh:
            name_map = parse_name_map(fh.read())
        groups = []
        for series in load_regions(cfg):
            if series.measure != "confirmed":
                continue
            rows, dropped = join_weather(to_daily(series), weather, name_map)
            if ctx.obj.get("verbose"):
                click.echo(f"{series.key.label}: {len(rows)} joined, {dropped} dropped")
            groups.append(rows)
        table = build_labels(groups)
        rep = weather_report(table, seed=cfg.seed)
    except OSError as exc:
        raise _fail(DataError(str(exc)))
    except (ConfigError, DataError, NumericalError) as exc:
        raise _fail(exc)

    os.makedirs(cfg.out_dir, exist_ok=True)
    out_path = os.path.join(cfg.out_dir, "classification.csv")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("model,auc,n_train,n_test,seed\n")
        fh.write(f"logistic,{rep['logistic_auc']:.6f},{rep['n_train']},"
                 f"{rep['n_test']},{rep['seed']}\n")
        fh.write(f"forest,{rep['forest_auc']:.6f},{rep['n_train']},"
                 f"{rep['n_test']},{rep['seed']}\n")
    click.echo(json.dumps(rep, indent=2, sort_keys=True))
    click.echo(f"wrote {out_path}")


@main.command("reproduce")
@click.option("--case", "case", required=True,
              type=click.Choice(["table2", "table3-prophet", "table3-auc"]))
@click.option("--archive", "archive_dir", default=None, type=click.Path())
@click.pass_context
def reproduce_cmd(ctx, case, archive_dir):
    """Compare our metrics against the published tables (informational)."""
    try:
        lines, _ = reproduce(case.replace("-", "_"), archive_dir,
                             seed=ctx.obj.get("seed") or 0)
    except (ConfigError, DataError, NumericalError) as exc:
        raise _fail(exc)
    for line in lines:
        click.echo(line)


if __name__ == "__main__":
    main()
