import math

import pytest
from hypothesis import given, settings, strategies as st

from detmetrics.ap_metrics import ZeroGroundTruthError, route_ap
from detmetrics.config import NdsConfig
from detmetrics.nds_metrics import (
    TPErrors,
    TPPair,
    center_distance_ap,
    id_nds,
    nds,
    route_nds,
    route_tp_pairs,
    tp_errors,
)
from helpers import box, det, frame, gt


class TestCenterDistanceAp:
    def test_perfect(self):
        frames = [frame(0, [gt(x=5.0)], [det(x=5.0, conf=1.0)])]
        assert center_distance_ap(frames) == 1.0

    def test_offset_beyond_threshold(self):
        frames = [frame(0, [gt(x=5.0)], [det(x=6.5, conf=1.0)])]
        assert center_distance_ap(frames, threshold=1.0) == 0.0

    def test_criterion_decoupling_from_iou(self):
        # 0.9 m offset with tiny predicted boxes: center criterion matches,
        # IoU criterion cannot
        g = gt(box(x=5.0, length=4, width=2, height=2))
        d = det(box(x=5.9, length=0.2, width=0.2, height=0.2), conf=1.0)
        frames = [frame(0, [g], [d])]
        assert center_distance_ap(frames, threshold=1.0) == 1.0
        assert route_ap(frames) == 0.0

    def test_zero_gt(self):
        with pytest.raises(ZeroGroundTruthError):
            center_distance_ap([frame(0, [], [det()])])

    def test_threshold_validated(self):
        with pytest.raises(ValueError):
            center_distance_ap([], threshold=0.0)


class TestTpErrors:
    def test_exact_pairs(self):
        g = gt(x=5.0, velocity=(2.0, 0.0))
        d = det(x=5.0, velocity=(2.0, 0.0))
        errors = tp_errors([TPPair(g, d)])
        assert (errors.ate, errors.ase, errors.aoe, errors.ave) == (0.0, 0.0, 0.0, 0.0)
        assert not errors.no_tp

    def test_single_pair_values(self):
        g = gt(box(x=5.0, yaw=0.0), velocity=(3.0, 0.0))
        d = det(box(x=5.5, yaw=math.pi / 2), velocity=(5.0, 0.0))
        errors = tp_errors([TPPair(g, d)])
        assert errors.ate == pytest.approx(0.5)
        assert errors.ase == pytest.approx(0.0)
        assert errors.aoe == pytest.approx(math.pi / 2)
        assert errors.ave == pytest.approx(2.0)

    def test_scale_error_half(self):
        g = gt(box(length=4, width=2, height=2))
        d = det(box(length=2, width=2, height=2))
        assert tp_errors([TPPair(g, d)]).ase == pytest.approx(0.5)

    def test_no_pairs_reports_caps(self):
        errors = tp_errors([], threshold=1.0, v_cap=10.0)
        assert errors.no_tp
        assert errors.ate == 1.0
        assert errors.ase == 1.0
        assert errors.aoe == pytest.approx(math.pi)
        assert errors.ave == 10.0

    def test_pairs_without_velocity_excluded_from_ave(self):
        g = gt(x=5.0, velocity=(2.0, 0.0))
        pairs = [
            TPPair(g, det(x=5.0, velocity=(1.0, 0.0))),
            TPPair(g, det(x=5.0, velocity=None)),
        ]
        assert tp_errors(pairs).ave == pytest.approx(1.0)

    def test_all_velocities_missing_scores_cap(self):
        pairs = [TPPair(gt(x=5.0), det(x=5.0))]
        assert tp_errors(pairs, v_cap=10.0).ave == 10.0


class TestNds:
    def test_perfect(self):
        assert nds(1.0, TPErrors(0, 0, 0, 0)) == 1.0

    def test_floor(self):
        assert nds(0.0, TPErrors(5.0, 1.0, math.pi, 50.0)) == 0.0

    def test_hand_case(self):
        # normalized errors 0.2, 0.5, 0.1, 0.4 with map 0.8
        errors = TPErrors(ate=0.2, ase=0.5, aoe=0.1 * math.pi, ave=4.0)
        assert nds(0.8, errors) == pytest.approx(0.75)

    def test_zero_weights_reduce_to_map(self):
        cfg = NdsConfig(tp_weights=(0.0, 0.0, 0.0, 0.0))
        errors = TPErrors(ate=0.7, ase=0.3, aoe=1.0, ave=5.0)
        assert nds(0.6180339, errors, cfg) == pytest.approx(0.6180339, abs=1e-15)

    def test_map_validated(self):
        with pytest.raises(ValueError):
            nds(1.2, TPErrors(0, 0, 0, 0))

    @given(
        st.floats(0, 1),
        st.floats(0, 3),
        st.floats(0, 1),
        st.floats(0, math.pi),
        st.floats(0, 30),
    )
    @settings(max_examples=100)
    def test_range_and_monotonicity(self, map_cd, ate, ase, aoe, ave):
        base = nds(map_cd, TPErrors(ate, ase, aoe, ave))
        assert 0.0 <= base <= 1.0
        worse = nds(map_cd, TPErrors(ate + 0.1, ase, aoe, ave))
        assert worse <= base + 1e-12
        better_map = nds(min(1.0, map_cd + 0.1), TPErrors(ate, ase, aoe, ave))
        assert better_map >= base - 1e-12


def _uniform_frames(err_on=None):
    """Two objects; optionally perturb the near or the far one."""
    near = gt(x=5.0, object_id="near", velocity=(0.0, 0.0))
    far = gt(x=50.0, object_id="far", velocity=(0.0, 0.0))
    def d(g, off):
        return det(box(x=g.box.center[0] + off), conf=1.0, velocity=(0.0, 0.0))
    off_near = 0.8 if err_on == "near" else 0.0
    off_far = 0.8 if err_on == "far" else 0.0
    return [frame(0, [near, far], [d(near, off_near), d(far, off_far)])]


class TestIdNds:
    def test_equidistant_equals_plain(self):
        g1 = gt(x=10.0, object_id="a", velocity=(0.0, 0.0))
        g2 = gt(x=-10.0, object_id="b", velocity=(0.0, 0.0))
        # detections share the GT centers so GT and detection weights agree
        frames = [
            frame(0, [g1, g2], [det(box(x=10.0, yaw=0.3), conf=1.0, velocity=(0.0, 0.0)),
                                det(box(x=-10.0, yaw=0.2), conf=0.9, velocity=(0.0, 0.0))])
        ]
        family = route_nds(frames)
        assert id_nds(frames) == pytest.approx(family["nds"], abs=1e-12)

    def test_far_errors_discounted(self):
        plain = route_nds(_uniform_frames("far"))["nds"]
        weighted = id_nds(_uniform_frames("far"))
        assert weighted > plain

    def test_near_errors_emphasized(self):
        plain = route_nds(_uniform_frames("near"))["nds"]
        weighted = id_nds(_uniform_frames("near"))
        assert weighted < plain


class TestRouteNds:
    def test_family_keys(self):
        frames = _uniform_frames()
        family = route_nds(frames)
        assert set(family) == {"map_cd", "ate", "ase", "aoe", "ave", "nds", "id_nds"}
        assert family["nds"] == 1.0

    def test_recall_sweep_mode_runs(self):
        cfg = NdsConfig(recall_sweep_mode=True)
        frames = _uniform_frames("far")
        sweep = route_nds(frames, cfg)
        assert 0.0 <= sweep["nds"] <= 1.0

    def test_route_tp_pairs_weighted(self):
        pairs = route_tp_pairs(_uniform_frames(), weighted=True)
        weights = sorted(p.weight for p in pairs)
        assert weights == [pytest.approx(1 / 50), pytest.approx(1 / 5)]
