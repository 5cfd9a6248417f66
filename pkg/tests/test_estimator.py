import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from extgranger.core import TimeSeriesPanel
from extgranger.estimator import (
    ConditioningSpec,
    EstimationError,
    Variant,
    build_index_sets,
    default_q_Z,
    gamma_hat,
    gamma_pair,
    n_extremes,
    recommended_defaults,
)
from helpers import VARIANTS, random_case, spec_from


def one_based(idx):
    return [int(i) + 1 for i in idx]


class TestSpec:
    def test_recommended_defaults(self):
        s = recommended_defaults()
        assert s.variant is Variant.THRESHOLD
        assert s.nu == pytest.approx(1 / 3)
        assert (s.q_F, s.q_Y, s.p_x, s.p_y) == (0.5, 0.8, 1, 1)
        assert recommended_defaults(hidden_confounding=True).nu == 0.5

    def test_default_q_Z_rule(self):
        assert default_q_Z(1) == 0.9
        assert default_q_Z(2) == pytest.approx(0.9)
        assert default_q_Z(4) == pytest.approx(0.95)

    @pytest.mark.parametrize(
        "kw",
        [
            {"nu": 0.0},
            {"nu": 1.0},
            {"q_F": 1.0},
            {"q_Y": 1.0},
            {"p_x": 0},
            {"p_y": 0},
            {"q_Z": 1.2},
            {"variant": "ball"},
            {"variant": "ball", "radius": 1.0},
            {"variant": "both_tails", "y_band": (0.8, 0.2)},
            {"variant": "nope"},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ConditioningSpec(**kw)

    @pytest.mark.parametrize("size,nu,k", [(64, 1 / 3, 4), (27, 1 / 3, 3), (5, 0.5, 2), (1, 0.5, 1), (125, 1 / 3, 5)])
    def test_n_extremes_exact_powers(self, size, nu, k):
        assert n_extremes(size, nu) == k


class TestIndexSets:
    def test_threshold_example(self):
        spec = ConditioningSpec(variant="threshold", q_Y=0.8, nu=0.5)
        sets = build_index_sets([1, 2, 3, 4, 5, 6], [0] * 6, None, spec)
        assert one_based(sets.S_tilde) == [1, 2, 3, 4, 5]
        assert sets.tau_X == 4
        assert one_based(sets.S) == [4, 5]

    def test_unadjusted_example(self):
        spec = ConditioningSpec(variant="unadjusted", nu=0.5)
        sets = build_index_sets([9, 1, 1], [1, 2, 3], None, spec)
        assert one_based(sets.S_tilde) == [1, 2]
        assert one_based(sets.S) == [1]

    def test_lagged_p1_equals_threshold(self):
        rng = np.random.default_rng(1)
        x, y, Z = rng.standard_normal(300), rng.standard_normal(300), rng.standard_normal((300, 2))
        a = build_index_sets(x, y, Z, ConditioningSpec(variant="threshold"))
        b = build_index_sets(x, y, Z, ConditioningSpec(variant="lagged", p_x=1))
        np.testing.assert_array_equal(a.S, b.S)
        np.testing.assert_array_equal(a.S_tilde, b.S_tilde)

    def test_lagged_window(self):
        # y is extreme at index 3 only; with p_x = 2 indices 3 and 4 drop out
        y = np.array([0, 0, 0, 9, 0, 0, 0, 0, 0, 0], float)
        x = np.arange(10, dtype=float)
        spec = ConditioningSpec(variant="lagged", p_x=2, q_Y=0.9, nu=0.5)
        sets = build_index_sets(x, y, None, spec)
        assert list(sets.S_tilde) == [1, 2, 5, 6, 7, 8]

    def test_invariants(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(400)
        y = rng.standard_normal(400)
        for v in VARIANTS:
            _, _, _, kw = random_case(rng, v)
            kw.pop("center", None), kw.pop("radius", None)
            if v == "ball":
                kw.update(center=(0.0,), radius=1.5)
            kw.pop("q_Z", None), kw.pop("z_bands", None)
            spec = spec_from(kw)
            sets = build_index_sets(x, y, None, spec)
            assert set(sets.S) <= set(sets.S_tilde)
            assert np.all(sets.S_tilde + spec.p_y < 400)
            if v != "both_tails":
                assert sets.S.size == min(n_extremes(sets.S_tilde.size, spec.nu), sets.S_tilde.size)

    def test_empty_baseline(self):
        spec = ConditioningSpec(variant="ball", radius=0.1, center=(100.0,))
        with pytest.raises(EstimationError, match="baseline set empty"):
            build_index_sets(np.arange(10.0), np.arange(10.0), None, spec)

    def test_empty_extremes(self):
        # x constant inside the band: nothing falls outside [lo, hi]
        spec = ConditioningSpec(variant="both_tails", x_band=(0.1, 0.9))
        with pytest.raises(EstimationError, match="no extreme events"):
            build_index_sets(np.ones(50), np.arange(50.0), None, spec)

    def test_too_short(self):
        with pytest.raises(ValueError):
            build_index_sets([1.0, 2.0], [1.0, 2.0], None, ConditioningSpec(variant="unadjusted"))


class TestGammaHat:
    def test_hand_computed(self):
        spec = ConditioningSpec(variant="unadjusted", nu=0.5, q_F=0.0)
        est = gamma_hat([1, 2, 3, 4, 5, 6], [0.1, 0.2, 0.3, 0.4, 0.5, 0.9], None, spec)
        assert est.gamma_hat == pytest.approx(11 / 12, abs=1e-15)
        assert (est.n_extreme, est.n_baseline) == (2, 5)

    @pytest.mark.parametrize("variant", ["unadjusted", "threshold", "lagged"])
    def test_constant_effect(self, variant):
        rng = np.random.default_rng(3)
        est = gamma_hat(rng.standard_normal(100), np.full(100, 2.0), None, ConditioningSpec(variant=variant, q_F=0))
        assert est.gamma_hat == est.baseline_hat == 1.0

    def test_equal_sets_equal_values(self):
        # nu close to 1 with a 4-point baseline: k = floor(4 ** 0.99) = 3 < 4, so use x ties
        x = np.ones(5)
        est = gamma_hat(x, [0.3, 0.1, 0.4, 0.2, 0.5], None, ConditioningSpec(variant="unadjusted", nu=0.5))
        assert est.n_extreme == est.n_baseline
        assert est.gamma_hat == est.baseline_hat

    def test_bounds(self):
        rng = np.random.default_rng(4)
        for v in VARIANTS:
            x, y, Z, kw = random_case(rng, v)
            try:
                est = gamma_hat(x, y, Z, spec_from(kw))
            except EstimationError:
                continue
            assert 0 <= est.gamma_hat <= 1 and 0 <= est.baseline_hat <= 1
            assert est.n_extreme <= est.n_baseline

    @pytest.mark.parametrize("variant", VARIANTS)
    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_matches_brute_force(self, variant, seed):
        x, y, Z, kw = random_case(np.random.default_rng(seed), variant)
        try:
            ref = oracle.gamma(list(x), list(y), Z.tolist(), **kw)
        except LookupError:
            with pytest.raises(EstimationError):
                gamma_hat(x, y, Z, spec_from(kw))
            return
        est = gamma_hat(x, y, Z, spec_from(kw))
        assert abs(est.gamma_hat - ref[0]) <= 1e-12
        assert abs(est.baseline_hat - ref[1]) <= 1e-12
        assert (est.n_extreme, est.n_baseline) == (len(ref[2]), len(ref[3]))

    def test_lagged_p1_bitwise_equal(self):
        rng = np.random.default_rng(6)
        x, y, Z = rng.standard_normal(250), rng.standard_normal(250), rng.standard_normal((250, 1))
        a = gamma_hat(x, y, Z, ConditioningSpec(variant="threshold"))
        b = gamma_hat(x, y, Z, ConditioningSpec(variant="lagged", p_x=1))
        assert (a.gamma_hat, a.baseline_hat, a.n_extreme, a.n_baseline) == (
            b.gamma_hat,
            b.baseline_hat,
            b.n_extreme,
            b.n_baseline,
        )

    def test_both_tails_symmetric_equals_threshold_on_abs(self):
        # sign-symmetric samples: every value appears with both signs
        rng = np.random.default_rng(8)
        h = 150
        base = rng.permutation(np.abs(rng.standard_normal((h, 3))) + 0.01)

        def symmetric(col):
            return np.concatenate([col, -col])

        x, y, z = (symmetric(base[:, i]) for i in range(3))
        perm = rng.permutation(2 * h)
        x, y, z = x[perm], y[perm], z[perm]
        n = 2 * h
        # y: level h + j selects v_j from above, h + 1 - j from below, 2 j for |y|
        j_y, j_z = 100, 130
        band = lambda j: ((h + 1 - j) / n, (h + j) / n)
        spm = ConditioningSpec(variant="both_tails", y_band=band(j_y), z_bands=(band(j_z),))
        thr = ConditioningSpec(variant="threshold", q_Y=2 * j_y / n, q_Z=2 * j_z / n)
        a = gamma_hat(x, y, z, spm)
        b = gamma_hat(np.abs(x), np.abs(y), np.abs(z), thr)
        lo, hi = a.thresholds["tau_Y"]
        assert lo == -hi
        assert (a.gamma_hat, a.baseline_hat, a.n_extreme, a.n_baseline) == (
            b.gamma_hat,
            b.baseline_hat,
            b.n_extreme,
            b.n_baseline,
        )


TRANSFORMS = {
    "affine": lambda v: 2.5 * v - 1.0,
    "cube": lambda v: v**3,
    "exp": lambda v: np.exp(v / np.max(np.abs(v))),
    "arctan": np.arctan,
}


def _transform_ok(v, g):
    w = g(v)
    return np.array_equal(np.argsort(v, kind="stable"), np.argsort(w, kind="stable")) and np.unique(
        v
    ).size == np.unique(w).size


@pytest.mark.parametrize("variant", ["unadjusted", "threshold", "lagged"])
@pytest.mark.parametrize("tname", list(TRANSFORMS))
@pytest.mark.parametrize("which", ["x", "y", "z"])
def test_rank_invariance(variant, tname, which):
    rng = np.random.default_rng(hash((variant, tname, which)) % 2**32)
    g = TRANSFORMS[tname]
    for _ in range(5):
        x, y, Z, kw = random_case(rng, variant)
        if which == "z" and Z.shape[1] == 0:
            Z = rng.standard_normal((x.size, 1))
            kw.pop("q_Z", None)
        if Z.shape[1] == 0:
            Z = np.empty((x.size, 0))
        spec = spec_from(kw)
        x2, y2, Z2 = x.copy(), y.copy(), Z.copy()
        if which == "x":
            target, dest = x, x2
        elif which == "y":
            target, dest = y, y2
        else:
            target, dest = Z[:, 0], Z2[:, 0]
        if not _transform_ok(target, g):
            continue
        dest[:] = g(target)
        try:
            a = gamma_hat(x, y, Z, spec)
        except EstimationError:
            with pytest.raises(EstimationError):
                gamma_hat(x2, y2, Z2, spec)
            continue
        b = gamma_hat(x2, y2, Z2, spec)
        assert (a.gamma_hat, a.baseline_hat, a.n_extreme) == (b.gamma_hat, b.baseline_hat, b.n_extreme)


@pytest.mark.parametrize("g", [lambda v: v**3, lambda v: 3.0 * v, np.sinh])
def test_both_tails_invariant_under_odd_maps(g):
    rng = np.random.default_rng(12)
    x, y, Z, kw = random_case(rng, "both_tails")
    a = gamma_hat(x, y, Z, spec_from(kw))
    b = gamma_hat(g(x), g(y), g(Z), spec_from(kw))
    assert (a.gamma_hat, a.baseline_hat) == (b.gamma_hat, b.baseline_hat)


class TestGammaPair:
    @pytest.fixture
    def panel(self):
        rng = np.random.default_rng(9)
        return TimeSeriesPanel(rng.standard_normal((200, 3)), ["X", "Y", "Z"])

    def test_delegates(self, panel):
        a = gamma_pair(panel, "X", "Y", ["Z"])
        b = gamma_hat(panel.column("X"), panel.column("Y"), panel.columns(["Z"]))
        assert (a.gamma_hat, a.baseline_hat) == (b.gamma_hat, b.baseline_hat)

    def test_no_conditioners(self, panel):
        a = gamma_pair(panel, "X", "Y")
        b = gamma_hat(panel.column("X"), panel.column("Y"), np.empty((200, 0)))
        assert a.gamma_hat == b.gamma_hat

    def test_errors(self, panel):
        with pytest.raises(ValueError):
            gamma_pair(panel, "X", "X")
        with pytest.raises(KeyError):
            gamma_pair(panel, "X", "W")
        with pytest.raises(ValueError):
            gamma_pair(panel, "X", "Y", ["Y"])
