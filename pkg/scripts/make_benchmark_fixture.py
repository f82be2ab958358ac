"""Construct the checked-in 16-detector metric table fixture.

The fixture embeds exact target correlations between five offline metrics and
the two online outcomes (driving score, collision count). Construction works
in an orthonormal, mean-centered basis so that correlations are linear-algebra
exact: with centered orthonormal columns q1, q2, q3 and
x = a*q1 + b*q2 + c*q3, pearson(x, q1) = a / sqrt(a^2 + b^2 + c^2).

Run from the repository root:

    python3 scripts/make_benchmark_fixture.py
"""
from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from detmetrics.correlation import MetricTable, pearson, write_metric_table

N_DETECTORS = 16
RHO_DS_COL = -0.8  # correlation between driving score and collision count

# metric -> (signed r vs driving score, signed r vs collision count,
#            location, scale)
TARGETS = {
    "nds": (0.852, -0.907, 0.55, 0.15),
    "ap": (0.805, -0.903, 0.50, 0.18),
    "ade": (-0.784, 0.770, 1.30, 0.45),
    "aos": (0.742, -0.894, 0.45, 0.17),
    "fde": (-0.703, 0.653, 2.20, 0.70),
}
DS_LOC, DS_SCALE = 62.0, 16.0
COL_LOC, COL_SCALE = 1.1, 0.55


def centered_orthonormal_basis(n: int, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, k + 1))
    m -= m.mean(axis=0)
    q, _ = np.linalg.qr(m)
    q = q[:, :k]
    # QR of centered columns keeps every column centered
    assert np.allclose(q.mean(axis=0), 0.0, atol=1e-12)
    return q

def main() -> None:
    q = centered_orthonormal_basis(N_DETECTORS, 2 + len(TARGETS), seed=20240817)
    ds = DS_LOC + DS_SCALE * q[:, 0]
    col_dir = RHO_DS_COL * q[:, 0] + math.sqrt(1.0 - RHO_DS_COL**2) * q[:, 1]
    col = COL_LOC + COL_SCALE * col_dir

    columns = ("ap", "aos", "nds", "ade", "fde", "ds", "num_collisions")
    values = {"ds": ds, "num_collisions": col}
    for i, (metric, (r_ds, r_col, loc, scale)) in enumerate(TARGETS.items()):
        a = r_ds
        b = (r_col - RHO_DS_COL * a) / math.sqrt(1.0 - RHO_DS_COL**2)
        c2 = 1.0 - a * a - b * b
        assert c2 > 0.0, f"infeasible targets for {metric}"
        x = a * q[:, 0] + b * q[:, 1] + math.sqrt(c2) * q[:, 2 + i]
        values[metric] = loc + scale * x

    for metric in ("ap", "aos", "nds"):
        assert np.all((values[metric] > 0.0) & (values[metric] < 1.0)), metric
    for metric in ("ade", "fde", "num_collisions"):
        assert np.all(values[metric] >= 0.0), metric
    assert np.all((values["ds"] >= 0.0) & (values["ds"] <= 100.0))

    for metric, (r_ds, r_col, _, _) in TARGETS.items():
        got_ds = pearson(values[metric], ds)
        got_col = pearson(values[metric], col)
        assert abs(got_ds - r_ds) < 1e-9, (metric, got_ds, r_ds)
        assert abs(got_col - r_col) < 1e-9, (metric, got_col, r_col)
        print(f"{metric:>4}: r(ds) = {got_ds:+.6f}  r(col) = {got_col:+.6f}")

    table = MetricTable(columns=columns)
    for d in range(N_DETECTORS):
        table.add_row(
            f"ref_{d:02d}",
            "route_000",
            {c: float(values[c][d]) for c in columns},
        )
    out = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "benchmark_detectors.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_metric_table(table, out)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
