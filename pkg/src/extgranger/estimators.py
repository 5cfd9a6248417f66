"""scikit-learn style estimators over the functional API.

Each estimator takes an ``(n_samples, n_series)`` array or DataFrame whose
rows are consecutive time steps. Hyperparameters follow the recommended
defaults and are exposed through ``get_params``/``set_params``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_random_state

from .core import TimeSeriesPanel
from .discovery import BootstrapTest, Classifier, classify_pair, estimate_summary_graph
from .estimator import ConditioningSpec
from .testing import BootstrapConfig, tail_causality_test

__all__ = ["check_panel", "CausalTailCoefficient", "TailCausalityTest", "ExtremalCausalityGraph"]


def check_panel(X, names=None) -> TimeSeriesPanel:
    """Validate ``X`` and wrap it as a panel, keeping DataFrame column names."""
    if isinstance(X, TimeSeriesPanel):
        return X
    if names is None and hasattr(X, "columns"):
        names = [str(c) for c in X.columns]
    arr = check_array(X, dtype=float, ensure_min_samples=2, ensure_all_finite=True)
    return TimeSeriesPanel(arr, names)


class _SpecMixin:
    def _spec(self) -> ConditioningSpec:
        return ConditioningSpec(
            variant=self.variant,
            nu=self.nu,
            q_F=self.q_F,
            q_Y=self.q_Y,
            q_Z=self.q_Z,
            radius=self.radius,
            center=self.center,
            p_x=self.p_x,
            p_y=self.p_y,
            x_band=self.x_band,
            y_band=self.y_band,
            z_bands=self.z_bands,
        )


class CausalTailCoefficient(_SpecMixin, BaseEstimator):
    """Causal tail coefficient of one column on another, with the extreme-causality decision.

    Attributes
    ----------
    gamma_ : float
    baseline_ : float
    threshold_ : float
        ``(1 + baseline_) / 2``.
    causes_ : bool
        ``gamma_ > threshold_``.
    estimate_ : GammaEstimate
    """

    def __init__(
        self,
        cause=0,
        effect=1,
        conditioners=(),
        variant="threshold",
        nu=1.0 / 3.0,
        q_F=0.5,
        q_Y=0.8,
        q_Z=None,
        radius=None,
        center=None,
        p_x=1,
        p_y=1,
        x_band=None,
        y_band=None,
        z_bands=None,
    ):
        self.cause = cause
        self.effect = effect
        self.conditioners = conditioners
        self.variant = variant
        self.nu = nu
        self.q_F = q_F
        self.q_Y = q_Y
        self.q_Z = q_Z
        self.radius = radius
        self.center = center
        self.p_x = p_x
        self.p_y = p_y
        self.x_band = x_band
        self.y_band = y_band
        self.z_bands = z_bands

    def fit(self, X, y=None):
        panel = check_panel(X)
        self.n_features_in_ = panel.m
        decision = classify_pair(panel, self.cause, self.effect, tuple(self.conditioners), self._spec())
        self.estimate_ = decision.gamma
        self.gamma_ = decision.gamma.gamma_hat
        self.baseline_ = decision.gamma.baseline_hat
        self.threshold_ = decision.threshold
        self.causes_ = decision.causes
        return self

    def score(self, X=None, y=None) -> float:
        check_is_fitted(self, "gamma_")
        return self.gamma_


class TailCausalityTest(_SpecMixin, BaseEstimator):
    """Block-bootstrap test of no tail causality from ``cause`` to ``effect``.

    Attributes
    ----------
    reject_ : bool
    alpha_quantile_ : float
    deltas_ : ndarray
    p_hat_ : float
    result_ : TestResult
    """

    def __init__(
        self,
        cause=0,
        effect=1,
        conditioners=(),
        alpha=0.05,
        n_boot=200,
        block_length=None,
        random_state=None,
        n_jobs=None,
        variant="threshold",
        nu=1.0 / 3.0,
        q_F=0.5,
        q_Y=0.8,
        q_Z=None,
        radius=None,
        center=None,
        p_x=1,
        p_y=1,
        x_band=None,
        y_band=None,
        z_bands=None,
    ):
        self.cause = cause
        self.effect = effect
        self.conditioners = conditioners
        self.alpha = alpha
        self.n_boot = n_boot
        self.block_length = block_length
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.variant = variant
        self.nu = nu
        self.q_F = q_F
        self.q_Y = q_Y
        self.q_Z = q_Z
        self.radius = radius
        self.center = center
        self.p_x = p_x
        self.p_y = p_y
        self.x_band = x_band
        self.y_band = y_band
        self.z_bands = z_bands

    def fit(self, X, y=None):
        panel = check_panel(X)
        self.n_features_in_ = panel.m
        cfg = BootstrapConfig(
            B=self.n_boot, b=self.block_length, alpha=self.alpha, seed=_seed_from(self.random_state)
        )
        res = tail_causality_test(
            panel, self.cause, self.effect, tuple(self.conditioners), self._spec(), cfg, self.n_jobs
        )
        self.result_ = res
        self.reject_ = res.reject
        self.alpha_quantile_ = res.alpha_quantile_of_delta
        self.deltas_ = res.deltas
        self.p_hat_ = res.p_hat
        return self


class ExtremalCausalityGraph(_SpecMixin, BaseEstimator):
    """Summary graph of causality in extremes among all columns of ``X``.

    Parameters
    ----------
    backend : {"classifier", "bootstrap"}
        How each edge is decided. ``"bootstrap"`` uses ``alpha``, ``n_boot``,
        ``block_length`` and ``random_state``.

    Attributes
    ----------
    adjacency_ : ndarray of bool, shape (n_series, n_series)
        ``adjacency_[i, j]`` is an edge ``i -> j``.
    pairwise_adjacency_ : ndarray of bool
        The graph after the unconditioned pairwise step.
    graph_ : SummaryGraph
    feature_names_in_ : ndarray of str
    warnings_ : list of str
        Edges kept because they could not be decided.
    """

    def __init__(
        self,
        backend="classifier",
        alpha=0.05,
        n_boot=200,
        block_length=None,
        random_state=None,
        n_jobs=None,
        variant="threshold",
        nu=1.0 / 3.0,
        q_F=0.5,
        q_Y=0.8,
        q_Z=None,
        p_x=1,
        p_y=1,
    ):
        self.backend = backend
        self.alpha = alpha
        self.n_boot = n_boot
        self.block_length = block_length
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.variant = variant
        self.nu = nu
        self.q_F = q_F
        self.q_Y = q_Y
        self.q_Z = q_Z
        self.p_x = p_x
        self.p_y = p_y

    radius = center = x_band = y_band = z_bands = None

    def _backend(self):
        if self.backend == "classifier":
            return Classifier()
        if self.backend == "bootstrap":
            return BootstrapTest(
                alpha=self.alpha, B=self.n_boot, b=self.block_length, seed=_seed_from(self.random_state)
            )
        raise ValueError(f"backend must be 'classifier' or 'bootstrap', got {self.backend!r}")

    def fit(self, X, y=None):
        panel = check_panel(X)
        if panel.m < 2:
            raise ValueError("need at least two series")
        graph, pairwise = estimate_summary_graph(
            panel, self._spec(), self._backend(), n_jobs=self.n_jobs, return_pairwise=True
        )
        self.graph_ = graph
        self.adjacency_ = np.array(graph.adjacency)
        self.pairwise_adjacency_ = np.array(pairwise.adjacency)
        self.feature_names_in_ = np.array(panel.names, dtype=object)
        self.n_features_in_ = panel.m
        self.warnings_ = list(graph.notes)
        return self

    def predict(self, X=None):
        """Adjacency of the fitted graph (refits first when ``X`` is given)."""
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "adjacency_")
        return self.adjacency_


def _seed_from(random_state) -> int:
    if isinstance(random_state, (int, np.integer)) and not isinstance(random_state, bool):
        return int(random_state)
    return int(check_random_state(random_state).randint(0, 2**31 - 1))
