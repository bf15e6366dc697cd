"""dps-qft <suite> --config <path> [--out <dir>] [--seed <u64>]

Exit codes: 0 all checks pass, 1 some check failed (report still written),
2 invalid invocation or configuration.
"""
from __future__ import annotations

import csv
import json
from dataclasses import fields
from pathlib import Path

import click

from . import __version__
from .suites import SUITES, RunConfig, _json_safe, emit_dispersion_table, run

REPORT_SCHEMA = 1


def load_config(path: Path, suite: str, seed: int | None) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config: {exc}") from exc
    if not isinstance(data, dict):
        raise click.UsageError("config must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise click.UsageError(f"unknown config keys: {sorted(unknown)}")
    data["suite"] = suite
    if seed is not None:
        data["seed"] = seed
    try:
        cfg = RunConfig(**data)
        return cfg.validate()
    except (TypeError, ValueError) as exc:
        raise click.UsageError(str(exc)) from exc


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.argument("suite", type=click.Choice(SUITES + ("all",)))
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="JSON run configuration.")
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False, path_type=Path),
              help="Directory for report.json and CSV tables.")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None, help="Seed for randomized spot checks.")
def main(suite, config_path, out_dir, seed):
    """Run a verification suite and write report.json."""
    cfg = load_config(config_path, suite, seed)
    result = run(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    passed = sum(r["pass"] for r in result.records)
    report = {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "config": cfg.to_dict(),
        "records": result.records,
        "measurements": result.measurements,
        "quantities": result.quantities,
        "summary": {"checks": len(result.records), "passed": passed, "failed": len(result.records) - passed},
    }
    (out_dir / "report.json").write_text(json.dumps(_json_safe(report), indent=2, sort_keys=True) + "\n")
    for name, (header, rows) in result.tables.items():
        _write_csv(out_dir / f"{name}.csv", header, rows)
    _write_csv(out_dir / "dispersion.csv", *emit_dispersion_table(cfg))
    for r in result.records:
        click.echo(f"{'PASS' if r['pass'] else 'FAIL'}  {r['name']}: {r['measured']:.3e} (tol {r['tolerance']:.1e})")
    click.echo(f"{passed}/{len(result.records)} checks passed")
    raise SystemExit(0 if passed == len(result.records) else 1)
