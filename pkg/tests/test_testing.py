import numpy as np
import pytest

from extgranger.core import TimeSeriesPanel
from extgranger.estimator import ConditioningSpec
from extgranger.testing import (
    BootstrapConfig,
    DegenerateBootstrapError,
    block_bootstrap_resample,
    reject_rule,
    tail_causality_test,
)


def _panel(n, m=3, seed=0):
    return TimeSeriesPanel(np.random.default_rng(seed).standard_normal((n, m)), ["X", "Y", "Z"][:m])


class TestResample:
    def test_single_block_is_identity(self):
        p = _panel(4)
        assert block_bootstrap_resample(p, 4, np.random.default_rng(0)) == p

    def test_blocks_are_contiguous_runs(self):
        p = TimeSeriesPanel(np.arange(12.0).reshape(6, 2) * [1, 10], ["a", "b"])
        out = block_bootstrap_resample(p, 2, np.random.default_rng(3)).values
        # rows carry their full column vector
        for row in out:
            assert any(np.array_equal(row, r) for r in p.values)
        idx = (out[:, 0] / 2).astype(int)
        for blk in idx.reshape(3, 2):
            assert blk[1] == blk[0] + 1

    def test_truncation(self):
        p = _panel(5)
        out = block_bootstrap_resample(p, 2, np.random.default_rng(1))
        assert out.n == 5

    def test_block_too_long(self):
        with pytest.raises(ValueError):
            block_bootstrap_resample(_panel(5), 6, np.random.default_rng(0))

    def test_rows_exact(self):
        p = _panel(97)
        out = block_bootstrap_resample(p, 9, np.random.default_rng(2))
        orig = {tuple(r) for r in p.values}
        assert all(tuple(r) in orig for r in out.values)


class TestRejectRule:
    def test_positive(self):
        assert reject_rule([0.2, 0.3, 0.25, 0.4], 0.25) == (True, 0.2)

    def test_negative(self):
        assert reject_rule([-0.1, 0.0, 0.3], 0.05) == (False, -0.1)

    def test_zero_is_not_positive(self):
        assert reject_rule([0.0, 0.1], 0.5)[0] is False


class TestConfig:
    def test_default_block_length(self):
        assert BootstrapConfig().block_length(1000) == 31

    @pytest.mark.parametrize("kw", [{"B": 0}, {"b": 0}, {"alpha": 0.0}, {"alpha": 1.0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            BootstrapConfig(**kw)

    def test_b_exceeds_n(self):
        with pytest.raises(ValueError):
            BootstrapConfig(b=50).block_length(10)


class TestTailCausalityTest:
    def test_deterministic(self):
        p = _panel(400)
        cfg = BootstrapConfig(B=40, seed=9)
        a = tail_causality_test(p, "X", "Y", ["Z"], None, cfg)
        b = tail_causality_test(p, "X", "Y", ["Z"], None, cfg)
        assert a.reject == b.reject
        np.testing.assert_array_equal(a.deltas, b.deltas)

    def test_parallel_matches_sequential(self):
        p = _panel(400)
        cfg = BootstrapConfig(B=40, seed=10)
        a = tail_causality_test(p, "X", "Y", ["Z"], None, cfg, n_jobs=1)
        b = tail_causality_test(p, "X", "Y", ["Z"], None, cfg, n_jobs=4)
        assert a.deltas.tobytes() == b.deltas.tobytes()

    def test_reject_recomputed(self):
        p = _panel(300)
        res = tail_causality_test(p, "X", "Y", (), None, BootstrapConfig(B=50, alpha=0.1, seed=1))
        expected = np.sort(res.deltas)[int(np.ceil(0.1 * res.deltas.size)) - 1]
        assert res.alpha_quantile_of_delta == expected
        assert res.reject == (expected > 0)
        assert res.deltas.size + res.n_failed_draws == 50
        assert res.p_hat == np.mean(res.deltas <= 0)

    def test_partial_failures_counted(self):
        # with a tiny ball, some resamples lose every baseline point
        rng = np.random.default_rng(4)
        y = np.r_[np.full(5, 0.0), rng.uniform(5, 10, 95)]
        p = TimeSeriesPanel(np.c_[rng.standard_normal(100), y], ["X", "Y"])
        spec = ConditioningSpec(variant="ball", radius=0.5, center=(0.0,))
        res = tail_causality_test(p, "X", "Y", (), spec, BootstrapConfig(B=60, b=5, seed=2))
        assert 0 < res.n_failed_draws <= 30 and res.reliable
        assert res.deltas.size + res.n_failed_draws == 60

    def test_unreliable_warns(self):
        rng = np.random.default_rng(4)
        y = np.r_[np.zeros(1), rng.uniform(5, 10, 99)]
        p = TimeSeriesPanel(np.c_[rng.standard_normal(100), y], ["X", "Y"])
        spec = ConditioningSpec(variant="ball", radius=0.5, center=(0.0,))
        with pytest.warns(RuntimeWarning):
            res = tail_causality_test(p, "X", "Y", (), spec, BootstrapConfig(B=60, b=10, seed=2))
        assert not res.reliable

    def test_all_failures(self):
        p = _panel(100, m=2)
        spec = ConditioningSpec(variant="ball", radius=0.01, center=(50.0,))
        with pytest.raises(DegenerateBootstrapError, match="bootstrap degenerate"):
            tail_causality_test(p, "X", "Y", (), spec, BootstrapConfig(B=5))

    def test_to_dict_fields(self):
        res = tail_causality_test(_panel(200), "X", "Y", (), None, BootstrapConfig(B=10))
        assert set(res.to_dict()) == {"reject", "alpha_quantile_of_delta", "B", "b", "alpha", "n_failed_draws", "p_hat"}
