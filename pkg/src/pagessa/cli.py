"""Thin command-line client: run experiment configs locally or against a server."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .experiments import run_experiment


@click.group()
def main():
    """Page-matrix spectral analysis toolkit."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True, help="Experiment config (JSON).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True, help="Directory for report.csv / report.json / resolved-config.json.")
@click.option("--seed", type=int, default=0, show_default=True, help="Base seed mixed into every random draw.")
@click.option("--workers", type=int, default=1, show_default=True, help="Concurrent grid cells.")
@click.option("--missing-token", type=str, default=None, help="Override the CSV missing-value token.")
@click.option("--server", type=str, default=None, help="Run on a pagessa service at this base URL instead of locally.")
def run(config_path, out_dir, seed, workers, missing_token, server):
    """Execute an experiment config and write its reports."""
    config = json.loads(Path(config_path).read_text(encoding="utf-8"))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if server is None:
        report = run_experiment(config, out_dir=out, seed=seed, workers=workers, missing_token=missing_token)
        click.echo(f"{report.task}: {len(report.rows)} rows -> {out / 'report.csv'}")
        return
    import httpx

    payload = {"config": config, "seed": seed, "workers": workers, "missing_token": missing_token}
    resp = httpx.post(server.rstrip("/") + "/experiments/run", json=payload, timeout=600.0)
    if resp.status_code != 200:
        raise click.ClickException(f"server returned {resp.status_code}: {resp.text}")
    body = resp.json()
    (out / "report.csv").write_text(body["report_csv"], encoding="utf-8")
    (out / "report.json").write_text(body["report_json"], encoding="utf-8")
    (out / "resolved-config.json").write_text(body["resolved_config"], encoding="utf-8")
    click.echo(f"{body['task']}: {len(body['rows'])} rows -> {out / 'report.csv'}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("pagessa.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
