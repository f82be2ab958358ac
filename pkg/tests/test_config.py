import pytest
import yaml

from detmetrics.config import (
    ConfigError,
    EvalConfig,
    config_to_dict,
    load_config,
    merge_config,
)
from detmetrics.driving_eval import DEFAULT_PENALTIES


class TestDefaults:
    def test_pipeline_constants(self):
        cfg = EvalConfig()
        assert cfg.tracker.conf_threshold == 0.3
        assert cfg.tracker.nms_iou == 0.2
        assert cfg.tracker.confirm_frames == 4
        assert cfg.tracker.gate_m == 5.0
        assert cfg.matching.iou_threshold == 0.7
        assert cfg.nds.threshold_m == 1.0
        assert cfg.nds.v_cap == 10.0
        assert cfg.penalties == DEFAULT_PENALTIES

    def test_load_without_file(self):
        assert load_config() == EvalConfig()


class TestYamlLoading:
    def test_nested_values(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            yaml.safe_dump(
                {
                    "matching": {"iou_kind": "bev", "iou_threshold": 0.5},
                    "synth": {"n_routes": 3, "seed": 7},
                }
            )
        )
        cfg = load_config(path)
        assert cfg.matching.iou_kind == "bev"
        assert cfg.matching.iou_threshold == 0.5
        assert cfg.synth.n_routes == 3
        # untouched sections keep defaults
        assert cfg.tracker == EvalConfig().tracker

    def test_empty_file_is_defaults(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config(path) == EvalConfig()

    def test_non_mapping_file_rejected(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            load_config(path)

    def test_overrides_win_over_file(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump({"synth": {"n_routes": 3}}))
        cfg = load_config(path, {"synth": {"n_routes": 5}})
        assert cfg.synth.n_routes == 5


class TestMergeErrors:
    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="unknown config section 'plannr'"):
            merge_config(EvalConfig(), {"plannr": {}})

    def test_unknown_key_names_section_and_key(self):
        with pytest.raises(ConfigError, match=r"unknown config key tracker\.gate"):
            merge_config(EvalConfig(), {"tracker": {"gate": 1.0}})

    def test_tp_weights_length(self):
        with pytest.raises(ConfigError, match="4 entries"):
            merge_config(EvalConfig(), {"nds": {"tp_weights": [1, 1, 1]}})

    def test_section_must_be_mapping(self):
        with pytest.raises(ConfigError, match="must be a mapping"):
            merge_config(EvalConfig(), {"tracker": 3})


class TestPenalties:
    def test_partial_update_keeps_rest(self):
        cfg = merge_config(EvalConfig(), {"penalties": {"red_light": 0.9}})
        assert cfg.penalties["red_light"] == 0.9
        assert cfg.penalties["stop_sign"] == DEFAULT_PENALTIES["stop_sign"]

    def test_non_mapping_rejected(self):
        with pytest.raises(ConfigError, match="penalties"):
            merge_config(EvalConfig(), {"penalties": [0.5]})


class TestRoundTrip:
    def test_dict_round_trip(self):
        cfg = merge_config(
            EvalConfig(),
            {"nds": {"tp_weights": [1, 0, 0, 2]}, "penalties": {"stop_sign": 0.75}},
        )
        again = merge_config(EvalConfig(), config_to_dict(cfg))
        assert again == cfg

    def test_dict_is_yaml_serializable(self):
        yaml.safe_dump(config_to_dict(EvalConfig()))
