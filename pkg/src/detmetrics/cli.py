"""Thin command-line client for the evaluation service.

Commands talk HTTP to the FastAPI app: in-process by default, or to a
running server via --server. Every error path exits nonzero after printing a
single machine-parsable ``ERROR_CODE: message`` line.
"""
from __future__ import annotations

import sys

import click
import httpx

from .service.app import app as service_app


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    from fastapi.testclient import TestClient

    return TestClient(service_app)


def _post(server: str | None, path: str, payload: dict) -> dict:
    with _client(server) as client:
        response = client.post(path, json=payload)
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail")
    except ValueError:
        detail = None
    if isinstance(detail, dict) and "error_code" in detail:
        click.echo(f"{detail['error_code']}: {detail['message']}", err=True)
    else:
        click.echo(f"E_REQUEST: HTTP {response.status_code}: {response.text}", err=True)
    sys.exit(2)


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx, server):
    """Offline 3D detection metrics and online-offline correlation."""
    ctx.obj = server


@main.command()
@click.option("--out-dir", required=True, type=click.Path(), help="Directory for route logs.")
@click.option("--routes", "n_routes", default=12, show_default=True)
@click.option("--frames", "n_frames", default=150, show_default=True)
@click.option("--models", "n_models", default=16, show_default=True,
              help="Number of noise models (detectors) of increasing severity.")
@click.option("--density", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--timestep", default=0.1, show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.pass_obj
def synth(server, out_dir, n_routes, n_frames, n_models, density, seed, timestep, config_path):
    """Generate deterministic synthetic route logs."""
    data = _post(server, "/synth", {
        "out_dir": out_dir,
        "n_routes": n_routes,
        "n_frames": n_frames,
        "n_models": n_models,
        "density": density,
        "seed": seed,
        "timestep": timestep,
        "config_path": config_path,
    })
    s = data["summary"]
    click.echo(f"wrote {s['n_files']} route logs to {out_dir}")
    click.echo(f"detectors: {len(s['detectors'])}  routes: {len(s['routes'])}")
    click.echo(f"objects/frame: {s['mean_objects_per_frame']:.2f}  "
               f"realized miss rate: {s['realized_miss_rate']:.3f}")


@main.command()
@click.argument("log_paths", nargs=-1, type=click.Path())
@click.option("--log-dir", default=None, type=click.Path(), help="Evaluate every *.jsonl in a directory.")
@click.option("--out", "out_csv", default=None, type=click.Path(), help="Metric table CSV to write.")
@click.option("--jobs", default=1, show_default=True, help="Route-level parallelism.")
@click.option("--iou-kind", type=click.Choice(["bev", "3d"]), default=None,
              help="IoU flavor for the AP-family TP criterion.")
@click.option("--metrics", default=None, metavar="LIST",
              help="Comma-separated offline metrics to keep (default: all).")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.pass_obj
def evaluate(server, log_paths, log_dir, out_csv, jobs, iou_kind, metrics, config_path):
    """Compute all enabled metrics per route and emit a metric table."""
    data = _post(server, "/evaluate", {
        "log_paths": list(log_paths),
        "log_dir": log_dir,
        "out_csv": out_csv,
        "jobs": jobs,
        "iou_kind": iou_kind,
        "metrics": metrics.split(",") if metrics else None,
        "config_path": config_path,
    })
    click.echo(f"evaluated {len(data['rows'])} (detector, route) rows")
    if data["csv_path"]:
        click.echo(f"metric table: {data['csv_path']}")


@main.command()
@click.argument("table_csv", type=click.Path())
@click.option("--out-prefix", default=None, type=click.Path(),
              help="Write <prefix>.csv and <prefix>.txt (and plots under <prefix>_plots/).")
@click.option("--plots", is_flag=True, help="Emit one SVG scatter per metric pair.")
@click.option("--signed-correlations", "signed", is_flag=True,
              help="Report signed coefficients instead of absolute values.")
@click.pass_obj
def correlate(server, table_csv, out_prefix, plots, signed):
    """Aggregate per detector and correlate offline vs online metrics."""
    data = _post(server, "/correlate", {
        "table_csv": table_csv,
        "out_prefix": out_prefix,
        "plots": plots,
        "signed": signed,
    })
    click.echo(data["text_table"], nl=False)
    if data["report_csv"]:
        click.echo(f"report: {data['report_csv']}")
    for path in data["svg_paths"]:
        click.echo(f"plot: {path}")


@main.command()
@click.argument("table_csv", type=click.Path())
@click.pass_obj
def report(server, table_csv):
    """Print per-detector aggregates and the correlation summary."""
    data = _post(server, "/correlate", {"table_csv": table_csv})
    aggregates = data["detector_aggregates"]
    columns = sorted({c for row in aggregates.values() for c in row})
    click.echo("Per-detector aggregates (mean over routes):")
    header = "detector".ljust(12) + "".join(c.rjust(12) for c in columns)
    click.echo(header)
    for detector in sorted(aggregates):
        cells = []
        for c in columns:
            v = aggregates[detector].get(c)
            cells.append(("-" if v is None else f"{v:.4f}").rjust(12))
        click.echo(detector.ljust(12) + "".join(cells))
    click.echo("")
    click.echo(data["text_table"], nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the evaluation service."""
    import uvicorn

    uvicorn.run("detmetrics.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
