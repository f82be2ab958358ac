import math

import pytest
import scipy.stats
from hypothesis import given, settings, strategies as st

from detmetrics.correlation import (
    DegenerateInputError,
    InsufficientDataError,
    MetricTable,
    aggregate_per_detector,
    build_report,
    format_report_text,
    pearson,
    read_metric_table,
    report_to_csv,
    spearman,
    write_metric_table,
    write_scatter_svgs,
)


class TestAggregate:
    def _table(self):
        t = MetricTable(columns=("ds", "ade"))
        t.add_row("d0", "r0", {"ds": 40.0, "ade": 1.0})
        t.add_row("d0", "r1", {"ds": 60.0, "ade": None})
        t.add_row("d1", "r0", {"ds": 10.0, "ade": 2.0})
        return t

    def test_mean_and_missing_skip(self):
        agg = aggregate_per_detector(self._table())
        assert agg["d0"]["ds"] == pytest.approx(50.0)
        assert agg["d0"]["ade"] == pytest.approx(1.0)  # missing cell skipped

    def test_single_route_identity(self):
        agg = aggregate_per_detector(self._table())
        assert agg["d1"] == {"ds": 10.0, "ade": 2.0}

    def test_all_missing_stays_missing(self):
        t = MetricTable(columns=("ade",))
        t.add_row("d0", "r0", {"ade": None})
        assert aggregate_per_detector(t)["d0"]["ade"] is None

    def test_duplicate_row_rejected(self):
        t = self._table()
        with pytest.raises(ValueError, match="duplicate"):
            t.add_row("d0", "r0", {"ds": 1.0})


class TestPearson:
    def test_affine(self):
        x = [1.0, 2.0, 5.0, 7.0, 11.0]
        y = [2 * v + 1 for v in x]
        assert pearson(x, y) == pytest.approx(1.0, abs=1e-12)

    def test_negation(self):
        x = [1.0, 2.0, 3.0, 5.0]
        assert pearson(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-12)

    def test_hand_case(self):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)

    def test_zero_variance(self):
        with pytest.raises(DegenerateInputError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_too_few_samples(self):
        with pytest.raises(DegenerateInputError):
            pearson([1.0, 2.0], [1.0, 2.0])

    @given(
        st.lists(st.integers(-100, 100), min_size=3, max_size=20, unique=True),
        st.floats(0.1, 10),
        st.floats(-5, 5),
    )
    @settings(max_examples=60)
    def test_positive_affine_invariance(self, x, scale, shift):
        x = [float(v) for v in x]
        y = [3.0 * v - 2.0 for v in x]
        base = pearson(x, y)
        assert pearson([scale * v + shift for v in x], y) == pytest.approx(base, abs=1e-9)


class TestSpearman:
    def test_monotone_nonlinear(self):
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        assert spearman(x, [v**3 for v in x]) == pytest.approx(1.0, abs=1e-12)

    def test_reversed(self):
        x = [1.0, 2.0, 3.0, 4.0]
        assert spearman(x, list(reversed(x))) == pytest.approx(-1.0, abs=1e-12)

    def test_ties_match_scipy(self):
        x = [1.0, 2.0, 2.0, 4.0]
        y = [1.0, 2.0, 3.0, 4.0]
        expected = scipy.stats.spearmanr(x, y).statistic
        assert spearman(x, y) == pytest.approx(expected, abs=1e-12)

    @given(
        st.lists(
            st.tuples(st.floats(-50, 50), st.floats(-50, 50)),
            min_size=3,
            max_size=15,
        )
    )
    @settings(max_examples=60)
    def test_matches_scipy(self, pts):
        x = [p[0] for p in pts]
        y = [p[1] for p in pts]
        try:
            ours = spearman(x, y)
        except DegenerateInputError:
            return
        expected = scipy.stats.spearmanr(x, y).statistic
        assert ours == pytest.approx(expected, abs=1e-9)

    @given(st.lists(st.integers(-20, 20), min_size=4, max_size=12, unique=True))
    @settings(max_examples=40)
    def test_monotone_transform_invariance(self, x):
        x = [float(v) for v in x]
        y = [2.0 * v + 1.0 for v in x]
        transformed = [math.exp(v / 10.0) for v in x]
        assert spearman(transformed, y) == pytest.approx(spearman(x, y), abs=1e-9)


def _detector_rows(n=5):
    rows = {}
    for i in range(n):
        ap = 0.2 + 0.15 * i
        rows[f"d{i}"] = {
            "ap": ap,
            "ade": 2.0 - 0.3 * i,
            "ds": 100.0 * ap - 3.0 * (i % 2),
            "num_collisions": float(n - i),
        }
    return rows


class TestBuildReport:
    def test_needs_three_detectors(self):
        with pytest.raises(InsufficientDataError, match="3 detectors"):
            build_report({"a": {}, "b": {}}, ("ap",), ("ds",))

    def test_identical_detectors_degenerate(self):
        rows = {d: {"ap": 0.5, "ds": 50.0} for d in "abc"}
        with pytest.raises(DegenerateInputError):
            build_report(rows, ("ap",), ("ds",))

    def test_three_detector_hand_case(self):
        rows = {
            "a": {"ap": 1.0, "ds": 1.0},
            "b": {"ap": 2.0, "ds": 3.0},
            "c": {"ap": 3.0, "ds": 2.0},
        }
        report = build_report(rows, ("ap",), ("ds",))
        assert report.get("ap", "ds").pearson_r == pytest.approx(0.5, abs=1e-12)

    def test_rows_sorted_by_anchor_correlation(self):
        report = build_report(_detector_rows(), ("ap", "ade"), ("ds", "num_collisions"))
        order = []
        for e in report.entries:
            if e.offline_metric not in order:
                order.append(e.offline_metric)
        anchors = {
            m: abs(report.get(m, "ds").pearson_r) for m in order
        }
        assert order == sorted(order, key=lambda m: -anchors[m])

    def test_pairwise_complete(self):
        rows = _detector_rows()
        rows["d0"]["ap"] = None
        report = build_report(rows, ("ap",), ("ds",))
        assert report.get("ap", "ds").n == 4


class TestCsvRoundTrip:
    def test_metric_table_round_trip(self, tmp_path):
        t = MetricTable(columns=("ap", "ds"))
        t.add_row("d0", "r0", {"ap": 1 / 3, "ds": None})
        t.add_row("d1", "r0", {"ap": 0.5, "ds": 12.25})
        path = write_metric_table(t, tmp_path / "t.csv")
        back = read_metric_table(path)
        assert back.rows == t.rows
        assert back.columns == t.columns

    def test_write_deterministic(self, tmp_path):
        t = MetricTable(columns=("ap",))
        t.add_row("b", "r0", {"ap": 0.1})
        t.add_row("a", "r0", {"ap": 0.2})
        a = write_metric_table(t, tmp_path / "a.csv").read_text()
        b = write_metric_table(t, tmp_path / "b.csv").read_text()
        assert a == b
        assert a.splitlines()[1].startswith("a,")  # sorted by keys

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("foo,bar\n1,2\n")
        with pytest.raises(ValueError, match="expected header"):
            read_metric_table(path)

    def test_report_csv(self, tmp_path):
        report = build_report(_detector_rows(), ("ap", "ade"), ("ds",))
        path = report_to_csv(report, tmp_path / "report.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "offline_metric,online_metric,pearson_r,spearman_rho,n"
        assert len(lines) == 3
        # absolute values by default
        for line in lines[1:]:
            assert float(line.split(",")[2]) >= 0.0


class TestReportText:
    def test_contains_all_pairs(self):
        report = build_report(_detector_rows(), ("ap", "ade"), ("ds", "num_collisions"))
        text = format_report_text(report)
        assert "|r| vs ds" in text
        assert "|r| vs num_collisions" in text
        assert text.count("\n") == 4  # header, rule, two metric rows

    def test_signed_flag(self):
        report = build_report(
            _detector_rows(), ("ade",), ("ds",), signed=True
        )
        text = format_report_text(report)
        assert "r vs ds" in text
        assert "-0." in text  # ade anti-correlates with ds


class TestScatterSvgs:
    def test_glyph_coding(self, tmp_path):
        rows = _detector_rows()
        for r in rows.values():
            r["id_ap"] = r["ap"] * 0.9
        report = build_report(rows, ("ap", "ade", "id_ap"), ("ds",))
        paths = write_scatter_svgs(rows, report, tmp_path / "plots")
        assert len(paths) == 3
        by_name = {p.name: p.read_text() for p in paths}
        assert "<circle" in by_name["scatter_ap_vs_ds.svg"]
        assert "<polygon" in by_name["scatter_ade_vs_ds.svg"]  # star
        assert "<polygon" in by_name["scatter_id_ap_vs_ds.svg"]  # triangle
        star_points = by_name["scatter_ade_vs_ds.svg"].count(",")
        tri_points = by_name["scatter_id_ap_vs_ds.svg"].count(",")
        assert star_points > tri_points  # 10-vertex star vs 3-vertex triangle
