from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from detmetrics import __version__
from detmetrics.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture(scope="module")
def small_study(client, tmp_path_factory):
    """Tiny end-to-end corpus shared by evaluate/correlate tests."""
    root = tmp_path_factory.mktemp("study")
    logs = root / "logs"
    r = client.post(
        "/synth",
        json={
            "out_dir": str(logs),
            "n_routes": 2,
            "n_frames": 150,
            "n_models": 4,
            "density": 1.0,
            "seed": 1,
            "timestep": 0.1,
        },
    )
    assert r.status_code == 200
    table_csv = root / "table.csv"
    r = client.post(
        "/evaluate",
        json={"log_dir": str(logs), "out_csv": str(table_csv), "jobs": 2},
    )
    assert r.status_code == 200
    return {"logs": logs, "table_csv": table_csv, "root": root}


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "version": __version__}


class TestSynth:
    def test_summary_and_files(self, client, small_study):
        data = client.post(
            "/synth",
            json={
                "out_dir": str(small_study["root"] / "logs2"),
                "n_routes": 1,
                "n_frames": 20,
                "n_models": 2,
                "seed": 1,
            },
        ).json()
        assert data["summary"]["n_files"] == 2
        assert data["summary"]["detectors"] == ["det_00", "det_01"]
        assert len(data["files"]) == 2

    def test_bad_params_rejected(self, client, tmp_path):
        # out-of-range body fields are caught by request validation
        r = client.post(
            "/synth", json={"out_dir": str(tmp_path), "n_routes": 0, "n_models": 1}
        )
        assert r.status_code == 422


class TestEvaluate:
    def test_rows_and_csv(self, client, small_study):
        r = client.post("/evaluate", json={"log_dir": str(small_study["logs"])})
        data = r.json()
        assert len(data["rows"]) == 8  # 4 detectors x 2 routes
        assert "ap" in data["columns"] and "ds" in data["columns"]

    def test_metric_selection_masks_other_offline(self, client, small_study):
        r = client.post(
            "/evaluate",
            json={"log_dir": str(small_study["logs"]), "metrics": ["ap"]},
        )
        row = r.json()["rows"][0]["values"]
        assert row["ap"] is not None
        assert row["nds"] is None  # masked
        assert row["ds"] is not None  # online columns always kept

    def test_iou_kind_changes_ap(self, client, small_study):
        def ap_sum(kind):
            r = client.post(
                "/evaluate",
                json={"log_dir": str(small_study["logs"]), "iou_kind": kind},
            )
            return sum(row["values"]["ap"] for row in r.json()["rows"])

        # BEV matching is never stricter than 3D matching
        assert ap_sum("bev") >= ap_sum("3d")

    def test_no_logs_is_invalid(self, client, tmp_path):
        r = client.post("/evaluate", json={"log_dir": str(tmp_path)})
        assert r.status_code == 400
        assert r.json()["detail"]["error_code"] == "E_INVALID"

    def test_missing_file_reported(self, client):
        r = client.post("/evaluate", json={"log_paths": ["/nonexistent/x.jsonl"]})
        assert r.status_code == 400
        assert r.json()["detail"]["error_code"] == "E_NOT_FOUND"

    def test_corrupt_log_reported(self, client, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{not json\n")
        r = client.post("/evaluate", json={"log_paths": [str(bad)]})
        assert r.status_code == 400
        assert r.json()["detail"]["error_code"] == "E_PARSE"

    def test_bad_config_reported(self, client, small_study, tmp_path):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("tracker:\n  bogus: 1\n")
        r = client.post(
            "/evaluate",
            json={"log_dir": str(small_study["logs"]), "config_path": str(cfg)},
        )
        assert r.status_code == 400
        assert r.json()["detail"]["error_code"] == "E_CONFIG"


FIXTURE_CSV = Path(__file__).parent / "fixtures" / "benchmark_detectors.csv"


class TestCorrelate:
    def test_entries_and_artifacts(self, client, tmp_path):
        prefix = tmp_path / "report"
        r = client.post(
            "/correlate",
            json={
                "table_csv": str(FIXTURE_CSV),
                "out_prefix": str(prefix),
                "plots": True,
            },
        )
        data = r.json()
        assert r.status_code == 200
        assert data["report_csv"] == str(prefix.with_suffix(".csv"))
        assert prefix.with_suffix(".txt").exists()
        assert data["svg_paths"]
        assert all(c["pearson"] >= 0 for c in data["entries"])
        assert "|r| vs ds" in data["text_table"]

    def test_signed(self, client):
        r = client.post(
            "/correlate", json={"table_csv": str(FIXTURE_CSV), "signed": True}
        )
        assert any(c["pearson"] < 0 for c in r.json()["entries"])

    def test_degenerate_table_column_reported(self, client, small_study):
        # tiny studies leave route completion flat across detectors
        r = client.post(
            "/correlate", json={"table_csv": str(small_study["table_csv"])}
        )
        assert r.status_code == 400
        assert r.json()["detail"]["error_code"] == "E_DEGENERATE_INPUT"

    def test_explicit_columns_avoid_flat_ones(self, client, small_study):
        r = client.post(
            "/correlate",
            json={
                "table_csv": str(small_study["table_csv"]),
                "offline_metrics": ["ap", "nds"],
                "online_metrics": ["ds"],
            },
        )
        assert r.status_code == 200
        assert len(r.json()["entries"]) == 2

    def test_insufficient_detectors(self, client, tmp_path):
        csv = tmp_path / "two.csv"
        csv.write_text(
            "detector_id,route_id,ap,ds\n"
            "a,r0,0.5,50.0\n"
            "b,r0,0.7,70.0\n"
        )
        r = client.post("/correlate", json={"table_csv": str(csv)})
        assert r.status_code == 400
        assert r.json()["detail"]["error_code"] == "E_INSUFFICIENT_DETECTORS"

    def test_degenerate_input(self, client, tmp_path):
        csv = tmp_path / "flat.csv"
        csv.write_text(
            "detector_id,route_id,ap,ds\n"
            + "".join(f"{d},r0,0.5,50.0\n" for d in "abc")
        )
        r = client.post("/correlate", json={"table_csv": str(csv)})
        assert r.status_code == 400
        assert r.json()["detail"]["error_code"] == "E_DEGENERATE_INPUT"

    def test_missing_table(self, client):
        r = client.post("/correlate", json={"table_csv": "/nope.csv"})
        assert r.status_code == 400
        assert r.json()["detail"]["error_code"] == "E_NOT_FOUND"
