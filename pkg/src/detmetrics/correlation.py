"""Online-offline correlation protocol: per-detector aggregation, Pearson and
Spearman coefficients (reported as absolute values), and report emission as
CSV, aligned text, and optional SVG scatter plots."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

KEY_COLUMNS = ("detector_id", "route_id")

# Offline metric columns in a metric table, in default report order.
OFFLINE_COLUMNS = (
    "ap",
    "aos",
    "id_ap",
    "map_cd",
    "ate",
    "ase",
    "aoe",
    "ave",
    "nds",
    "id_nds",
    "ade",
    "fde",
)
ONLINE_COLUMNS = ("ds", "num_collisions", "rc", "infraction_score")
ALL_COLUMNS = OFFLINE_COLUMNS + ONLINE_COLUMNS

# Glyph coding for scatter plots: planner-centric metrics get a star,
# inverse-distance variants a triangle, everything else a circle.
PLANNER_CENTRIC = frozenset({"ade", "fde"})


class DegenerateInputError(ValueError):
    """A correlation input has zero variance (or too few samples)."""


class InsufficientDataError(ValueError):
    pass


@dataclass
class MetricTable:
    """Rows keyed by (detector_id, route_id); missing cells are None."""

    columns: tuple[str, ...]
    rows: dict[tuple[str, str], dict[str, float | None]] = field(default_factory=dict)

    def add_row(self, detector_id: str, route_id: str, values: Mapping[str, float | None]):
        key = (detector_id, route_id)
        if key in self.rows:
            raise ValueError(f"duplicate row for {key}")
        self.rows[key] = {c: values.get(c) for c in self.columns}

    @property
    def detectors(self) -> list[str]:
        seen: dict[str, None] = {}
        for det, _ in self.rows:
            seen.setdefault(det, None)
        return sorted(seen)


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and value.is_integer():
        return repr(value)
    return repr(float(value))


def write_metric_table(table: MetricTable, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(KEY_COLUMNS) + list(table.columns))
        for (det, route) in sorted(table.rows):
            row = table.rows[(det, route)]
            writer.writerow([det, route] + [_fmt(row[c]) for c in table.columns])
    return path


def read_metric_table(path) -> MetricTable:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != list(KEY_COLUMNS):
            raise ValueError(f"{path}: expected header starting with {KEY_COLUMNS}")
        columns = tuple(header[2:])
        table = MetricTable(columns=columns)
        for row in reader:
            if not row:
                continue
            values = {
                c: (float(v) if v != "" else None) for c, v in zip(columns, row[2:])
            }
            table.add_row(row[0], row[1], values)
    return table


def aggregate_per_detector(table: MetricTable) -> dict[str, dict[str, float | None]]:
    """Unweighted mean per metric across each detector's routes; missing
    cells are skipped, and an all-missing column stays missing."""
    out: dict[str, dict[str, float | None]] = {}
    for detector in table.detectors:
        rows = [v for (det, _), v in table.rows.items() if det == detector]
        agg: dict[str, float | None] = {}
        for col in table.columns:
            values = [r[col] for r in rows if r[col] is not None]
            agg[col] = sum(values) / len(values) if values else None
        out[detector] = agg
    return out


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation coefficient (signed)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two equal-length 1D sequences")
    if x.size < 3:
        raise DegenerateInputError(f"need at least 3 samples, got {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInputError("zero variance input")
    r = float(dx @ dy) / (sx * sy)
    return max(-1.0, min(1.0, r))


def _average_ranks(values: Sequence[float]) -> np.ndarray:
    """Ranks starting at 1; ties share the mean rank."""
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=float)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        mean_rank = 0.5 * (i + j) + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average-ranked data."""
    return pearson(_average_ranks(x), _average_ranks(y))


@dataclass(frozen=True)
class CorrelationEntry:
    offline_metric: str
    online_metric: str
    pearson_r: float  # signed
    spearman_rho: float  # signed
    n: int


@dataclass
class CorrelationReport:
    entries: list[CorrelationEntry]
    signed: bool = False

    def get(self, offline: str, online: str) -> CorrelationEntry:
        for e in self.entries:
            if e.offline_metric == offline and e.online_metric == online:
                return e
        raise KeyError((offline, online))


def build_report(
    detector_rows: Mapping[str, Mapping[str, float | None]],
    offline_columns: Sequence[str] = OFFLINE_COLUMNS,
    online_columns: Sequence[str] = ONLINE_COLUMNS,
    signed: bool = False,
) -> CorrelationReport:
    """Correlate every (offline, online) pair over detector-level aggregates.

    Uses pairwise-complete observations. Rows come out sorted by |Pearson r|
    against the first online column, descending.
    """
    if len(detector_rows) < 3:
        raise InsufficientDataError(
            f"need at least 3 detectors, got {len(detector_rows)}"
        )
    entries = []
    for offline in offline_columns:
        for online in online_columns:
            xs, ys = [], []
            for row in detector_rows.values():
                xv, yv = row.get(offline), row.get(online)
                if xv is not None and yv is not None:
                    xs.append(xv)
                    ys.append(yv)
            if len(xs) < 3:
                raise InsufficientDataError(
                    f"fewer than 3 complete pairs for ({offline}, {online})"
                )
            entries.append(
                CorrelationEntry(offline, online, pearson(xs, ys), spearman(xs, ys), len(xs))
            )
    anchor = online_columns[0]
    rank = {
        e.offline_metric: abs(e.pearson_r) for e in entries if e.online_metric == anchor
    }
    entries.sort(key=lambda e: (-rank[e.offline_metric], list(online_columns).index(e.online_metric)))
    return CorrelationReport(entries=entries, signed=signed)


def _coeff(value: float, signed: bool) -> float:
    return value if signed else abs(value)


def report_to_csv(report: CorrelationReport, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["offline_metric", "online_metric", "pearson_r", "spearman_rho", "n"])
        for e in report.entries:
            writer.writerow(
                [
                    e.offline_metric,
                    e.online_metric,
                    _fmt(_coeff(e.pearson_r, report.signed)),
                    _fmt(_coeff(e.spearman_rho, report.signed)),
                    e.n,
                ]
            )
    return path


def format_report_text(report: CorrelationReport) -> str:
    online = []
    for e in report.entries:
        if e.online_metric not in online:
            online.append(e.online_metric)
    offline = []
    for e in report.entries:
        if e.offline_metric not in offline:
            offline.append(e.offline_metric)
    label = "r" if report.signed else "|r|"
    out = io.StringIO()
    width = max(14, max(len(m) for m in offline) + 2)
    header = "Metric".ljust(width) + "".join(f"{label} vs {o}".rjust(22) for o in online)
    out.write(header + "\n")
    out.write("-" * len(header) + "\n")
    for metric in offline:
        cells = []
        for o in online:
            e = report.get(metric, o)
            cells.append(f"{_coeff(e.pearson_r, report.signed):.3f}".rjust(22))
        out.write(metric.ljust(width) + "".join(cells) + "\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Dependency-light SVG scatter plots, one per (offline, online) pair.


def _glyph_svg(x: float, y: float, metric: str) -> str:
    if metric in PLANNER_CENTRIC:
        pts = []
        for k in range(10):
            r = 6.0 if k % 2 == 0 else 2.6
            ang = -math.pi / 2 + k * math.pi / 5
            pts.append(f"{x + r * math.cos(ang):.2f},{y + r * math.sin(ang):.2f}")
        return f'<polygon points="{" ".join(pts)}" fill="#c0392b"/>'
    if metric.startswith("id_"):
        return (
            f'<polygon points="{x:.2f},{y - 6:.2f} {x - 5.2:.2f},{y + 4:.2f} '
            f'{x + 5.2:.2f},{y + 4:.2f}" fill="#27ae60"/>'
        )
    return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4.5" fill="#2c5aa0"/>'


def scatter_svg(
    xs: Sequence[float],
    ys: Sequence[float],
    offline_metric: str,
    online_metric: str,
    size: int = 420,
) -> str:
    pad = 50.0
    span = size - 2 * pad
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_rng = (x_hi - x_lo) or 1.0
    y_rng = (y_hi - y_lo) or 1.0

    def px(v):
        return pad + (v - x_lo) / x_rng * span

    def py(v):
        return size - pad - (v - y_lo) / y_rng * span

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="{pad}" y1="{size - pad}" x2="{size - pad}" y2="{size - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{size - pad}" stroke="black"/>',
        f'<text x="{size / 2:.0f}" y="{size - 12}" text-anchor="middle" font-size="13">'
        f"{offline_metric}</text>",
        f'<text x="14" y="{size / 2:.0f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 14 {size / 2:.0f})">{online_metric}</text>',
        f'<text x="{pad:.0f}" y="{size - pad + 18:.0f}" font-size="10">{x_lo:.3g}</text>',
        f'<text x="{size - pad:.0f}" y="{size - pad + 18:.0f}" text-anchor="end" '
        f'font-size="10">{x_hi:.3g}</text>',
        f'<text x="{pad - 4:.0f}" y="{size - pad:.0f}" text-anchor="end" font-size="10">{y_lo:.3g}</text>',
        f'<text x="{pad - 4:.0f}" y="{pad:.0f}" text-anchor="end" font-size="10">{y_hi:.3g}</text>',
    ]
    for xv, yv in zip(xs, ys):
        parts.append(_glyph_svg(px(xv), py(yv), offline_metric))
    parts.append("</svg>")
    return "\n".join(parts)


def write_scatter_svgs(
    detector_rows: Mapping[str, Mapping[str, float | None]],
    report: CorrelationReport,
    out_dir,
) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for e in report.entries:
        xs, ys = [], []
        for row in detector_rows.values():
            xv, yv = row.get(e.offline_metric), row.get(e.online_metric)
            if xv is not None and yv is not None:
                xs.append(xv)
                ys.append(yv)
        path = out_dir / f"scatter_{e.offline_metric}_vs_{e.online_metric}.svg"
        path.write_text(scatter_svg(xs, ys, e.offline_metric, e.online_metric))
        written.append(path)
    return written
