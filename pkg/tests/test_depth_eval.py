import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgbd360.depth_eval import (
    ScaleShift,
    align_and_invert,
    compute_validity_mask,
    depth_metrics,
    evaluate_pair,
    fit_scale_shift,
    sample_fit_points,
    summarize,
)
from rgbd360.errors import (
    DegenerateFit,
    DimensionMismatch,
    EmptyIntersection,
    NoValidPixels,
)


class TestValidityMask:
    def test_all_positive(self):
        assert compute_validity_mask(np.ones((3, 3))).all()

    def test_negative_pixel_invalid(self):
        d = np.ones((2, 2))
        d[0, 1] = -1.0
        mask = compute_validity_mask(d)
        assert not mask[0, 1]
        assert mask.sum() == 3

    def test_nan_and_inf_invalid(self):
        d = np.array([[np.nan, np.inf, 0.0, 1.0]])
        assert list(compute_validity_mask(d)[0]) == [False, False, True, True]


class TestSampleFitPoints:
    def test_exhaustive_when_n_equals_total(self):
        mask = np.ones((4, 5), bool)
        idx = sample_fit_points(mask, mask, n=20, seed=1)
        assert sorted(idx) == list(range(20))

    def test_seed_determinism(self):
        mask = np.ones((30, 30), bool)
        a = sample_fit_points(mask, mask, n=50, seed=7)
        b = sample_fit_points(mask, mask, n=50, seed=7)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        mask = np.ones((30, 30), bool)
        a = sample_fit_points(mask, mask, n=50, seed=7)
        b = sample_fit_points(mask, mask, n=50, seed=8)
        assert not np.array_equal(a, b)

    def test_disjoint_masks(self):
        a = np.zeros((2, 2), bool)
        b = np.ones((2, 2), bool)
        a[0, 0] = True
        b[0, 0] = False
        with pytest.raises(EmptyIntersection):
            sample_fit_points(a, b, n=4, seed=0)

    def test_respects_intersection(self):
        a = np.zeros((10, 10), bool)
        b = np.zeros((10, 10), bool)
        a[:5] = True
        b[3:8] = True
        idx = sample_fit_points(a, b, n=1000, seed=0)
        both = np.flatnonzero((a & b).ravel())
        assert set(idx) <= set(both)
        assert len(idx) == len(both)

    def test_no_replacement(self):
        mask = np.ones((8, 8), bool)
        idx = sample_fit_points(mask, mask, n=40, seed=3)
        assert len(set(idx.tolist())) == len(idx)


class TestFitScaleShift:
    def test_identity_fit(self):
        v = np.array([[1.0, 2.0, 3.0, 4.0]])
        st_ = fit_scale_shift(v, v, np.arange(4))
        assert st_.scale == pytest.approx(1.0, abs=1e-12)
        assert st_.shift == pytest.approx(0.0, abs=1e-12)

    def test_hand_solved_normal_equations(self):
        # est=(1,2,3), ref=(3,5,7): centered sums give s = 4/2 = 2,
        # t = 5 - 2*2 = 1, both exact in binary floating point
        est = np.array([[1.0, 2.0, 3.0]])
        ref = np.array([[3.0, 5.0, 7.0]])
        st_ = fit_scale_shift(est, ref, np.arange(3))
        assert st_.scale == 2.0
        assert st_.shift == 1.0

    def test_exact_halving(self):
        ref = np.array([[1.0, 2.0, 5.0, 9.0]])
        est = 2.0 * ref
        st_ = fit_scale_shift(est, ref, np.arange(4))
        assert st_.scale == pytest.approx(0.5, abs=1e-15)
        assert st_.shift == pytest.approx(0.0, abs=1e-15)

    def test_degenerate_constant_estimate(self):
        est = np.full((1, 5), 3.0)
        ref = np.array([[1.0, 2.0, 3.0, 4.0, 5.0]])
        with pytest.raises(DegenerateFit):
            fit_scale_shift(est, ref, np.arange(5))

    def test_too_few_points(self):
        with pytest.raises(DegenerateFit):
            fit_scale_shift(np.array([[1.0]]), np.array([[2.0]]), np.array([0]))

    @given(
        st.floats(0.1, 10.0),
        st.floats(-5.0, 5.0),
        st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=100)
    def test_noiseless_recovery(self, a, b, seed):
        rng = np.random.default_rng(seed)
        ref = rng.uniform(0.5, 10.0, size=200)
        est = a * ref + b
        st_ = fit_scale_shift(est, ref, np.arange(200))
        assert st_.scale == pytest.approx(1.0 / a, rel=1e-9)
        assert st_.shift == pytest.approx(-b / a, rel=1e-9, abs=1e-9)

    def test_optimality_against_perturbations(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            est = rng.uniform(0, 5, size=100)
            ref = 2.0 * est + 1.0 + rng.normal(0, 0.3, size=100)
            st_ = fit_scale_shift(est, ref, np.arange(100))

            def sse(s, t):
                r = s * est + t - ref
                return float(r @ r)

            best = sse(st_.scale, st_.shift)
            for ds in (-1e-3, 1e-3):
                for dt in (-1e-3, 0.0, 1e-3):
                    assert best <= sse(st_.scale + ds, st_.shift + dt) + 1e-12


class TestAlignAndInvert:
    def test_reciprocal(self):
        depth, ok = align_and_invert(np.array([[2.0]]), ScaleShift(1.0, 0.0))
        assert depth[0, 0] == 0.5
        assert ok[0, 0]

    def test_zero_disparity_floored_and_flagged(self):
        depth, ok = align_and_invert(np.array([[0.0]]), ScaleShift(1.0, 0.0), eps=1e-6)
        assert depth[0, 0] == 1e6
        assert not ok[0, 0]

    def test_quarter(self):
        depth, _ = align_and_invert(np.array([[4.0]]), ScaleShift(1.0, 0.0))
        assert depth[0, 0] == 0.25


class TestDepthMetrics:
    def test_identical_maps(self):
        d = np.random.default_rng(0).uniform(1, 5, (6, 6))
        m = depth_metrics(d, d, np.ones_like(d, bool))
        assert m.abs_rel == 0.0
        assert m.rmse == 0.0
        assert m.n_valid == 36

    def test_constant_offset_case(self):
        # |3-2|/2 = 0.5 everywhere; rmse = sqrt(mean(1)) = 1
        ref = np.full((4, 4), 2.0)
        pred = np.full((4, 4), 3.0)
        m = depth_metrics(pred, ref, np.ones((4, 4), bool))
        assert m.abs_rel == 0.5
        assert m.rmse == 1.0

    def test_no_valid_pixels(self):
        with pytest.raises(NoValidPixels):
            depth_metrics(np.ones((2, 2)), np.ones((2, 2)), np.zeros((2, 2), bool))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            depth_metrics(np.ones((2, 2)), np.ones((2, 3)), np.ones((2, 2), bool))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30)
    def test_invariant_to_masked_pixel_values(self, seed):
        rng = np.random.default_rng(seed)
        ref = rng.uniform(1, 5, (8, 8))
        pred = ref + rng.normal(0, 0.2, (8, 8))
        mask = rng.random((8, 8)) < 0.6
        if not mask.any():
            mask[0, 0] = True
        base = depth_metrics(pred, ref, mask)
        fuzzed_pred = pred.copy()
        fuzzed_pred[~mask] = rng.uniform(-100, 100, (~mask).sum())
        fuzzed = depth_metrics(fuzzed_pred, ref, mask)
        assert fuzzed.abs_rel == base.abs_rel
        assert fuzzed.rmse == base.rmse

    def test_zero_iff_identical_on_valid_set(self):
        ref = np.full((3, 3), 2.0)
        pred = ref.copy()
        pred[0, 0] = 2.5
        mask = np.ones((3, 3), bool)
        m = depth_metrics(pred, ref, mask)
        assert m.abs_rel > 0 and m.rmse > 0


class TestEvaluatePair:
    def test_full_protocol_recovers_linear_relation(self):
        rng = np.random.default_rng(42)
        ref = rng.uniform(0.2, 2.0, (64, 64))
        est = 3.0 * ref + 0.5
        result = evaluate_pair(est, ref, seed=11)
        assert result.scale == pytest.approx(1 / 3.0, rel=1e-9)
        assert result.shift == pytest.approx(-0.5 / 3.0, rel=1e-9)
        assert result.abs_rel == pytest.approx(0.0, abs=1e-9)
        assert result.rmse == pytest.approx(0.0, abs=1e-9)

    def test_invalid_pixels_are_excluded(self):
        rng = np.random.default_rng(1)
        ref = rng.uniform(0.2, 2.0, (32, 32))
        est = ref.copy()
        est[0, :] = -1.0  # invalid stripe
        result = evaluate_pair(est, ref, seed=3)
        assert result.n_valid <= 32 * 31

    def test_summarize_means(self):
        rng = np.random.default_rng(2)
        ref = rng.uniform(0.2, 2.0, (16, 16))
        r1 = evaluate_pair(2 * ref, ref, seed=5)
        r2 = evaluate_pair(2 * ref + 0.1, ref, seed=5)
        summary = summarize({"a.png": r1, "b.png": r2})
        assert summary["n_images"] == 2
        assert summary["abs_rel"] == pytest.approx((r1.abs_rel + r2.abs_rel) / 2)
