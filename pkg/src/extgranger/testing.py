"""Moving-block bootstrap test of the no-tail-causality hypothesis.

Each draw concatenates ``ceil(n / b)`` overlapping length-``b`` blocks of
the panel (rows move together), truncates to ``n`` rows and re-estimates
``delta = gamma_hat - baseline_hat``. The null is rejected when the
``alpha``-quantile of the draws is strictly positive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .core import TimeSeriesPanel, empirical_quantile
from .estimator import ConditioningSpec, EstimationError, gamma_pair, recommended_defaults

__all__ = [
    "BootstrapConfig",
    "TestResult",
    "DegenerateBootstrapError",
    "block_bootstrap_resample",
    "draw_rng",
    "reject_rule",
    "tail_causality_test",
]


class DegenerateBootstrapError(EstimationError):
    """Every bootstrap draw failed to produce an estimate."""


@dataclass(frozen=True)
class BootstrapConfig:
    """``B`` draws of block length ``b`` (``None`` means ``floor(sqrt(n))``)."""

    B: int = 200
    b: int | None = None
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if int(self.B) != self.B or self.B < 1:
            raise ValueError(f"B must be a positive integer, got {self.B}")
        if self.b is not None and (int(self.b) != self.b or self.b < 1):
            raise ValueError(f"block length must be a positive integer, got {self.b}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    def block_length(self, n: int) -> int:
        b = self.b if self.b is not None else max(1, math.isqrt(n))
        if b > n:
            raise ValueError(f"block length {b} exceeds series length {n}")
        return b


@dataclass(frozen=True)
class TestResult:
    reject: bool
    alpha_quantile_of_delta: float
    deltas: np.ndarray
    n_failed_draws: int
    config: BootstrapConfig
    block_length: int

    __test__ = False  # keep pytest from collecting this class

    @property
    def p_hat(self) -> float:
        """Share of draws with ``delta <= 0``; descriptive only."""
        return float(np.mean(self.deltas <= 0.0))

    @property
    def reliable(self) -> bool:
        return self.n_failed_draws <= self.config.B / 2

    def to_dict(self) -> dict:
        return {
            "reject": self.reject,
            "alpha_quantile_of_delta": self.alpha_quantile_of_delta,
            "B": self.config.B,
            "b": self.block_length,
            "alpha": self.config.alpha,
            "n_failed_draws": self.n_failed_draws,
            "p_hat": self.p_hat,
        }


def draw_rng(seed: int, k: int) -> np.random.Generator:
    """Generator for draw ``k``, independent of how draws are scheduled."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(k,)))


def block_bootstrap_resample(
    panel: TimeSeriesPanel, b: int, rng: np.random.Generator
) -> TimeSeriesPanel:
    n = panel.n
    if not 1 <= b <= n:
        raise ValueError(f"block length must satisfy 1 <= b <= n={n}, got {b}")
    starts = rng.integers(0, n - b + 1, size=-(-n // b))
    rows = (starts[:, None] + np.arange(b)).ravel()[:n]
    return panel.take_rows(rows)


def reject_rule(deltas, alpha: float) -> tuple[bool, float]:
    """``(alpha-quantile > 0, alpha-quantile)`` with the order-statistic quantile."""
    q = empirical_quantile(deltas, alpha)
    return q > 0.0, q


def _one_draw(panel, cause, effect, conditioners, spec, b, seed, k):
    boot = block_bootstrap_resample(panel, b, draw_rng(seed, k))
    try:
        return gamma_pair(boot, cause, effect, conditioners, spec).delta
    except EstimationError:
        return None


def tail_causality_test(
    panel: TimeSeriesPanel,
    cause,
    effect,
    conditioners: Sequence = (),
    spec: ConditioningSpec | None = None,
    config: BootstrapConfig | None = None,
    n_jobs: int | None = None,
) -> TestResult:
    """Bootstrap test of ``H0: gamma - baseline = 0`` for ``cause -> effect``.

    Draws failing to estimate (empty index sets) are excluded from the
    quantile and counted in ``n_failed_draws``.

    Raises
    ------
    DegenerateBootstrapError
        If all ``B`` draws fail.
    """
    spec = spec or recommended_defaults()
    config = config or BootstrapConfig()
    b = config.block_length(panel.n)
    conditioners = tuple(conditioners)
    args = (panel, cause, effect, conditioners, spec, b, config.seed)
    # validate column arguments once, outside the draws
    for c in (cause, effect, *conditioners):
        panel.index_of(c)
    if n_jobs is None or n_jobs == 1:
        raw = [_one_draw(*args, k) for k in range(config.B)]
    else:
        raw = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_one_draw)(*args, k) for k in range(config.B)
        )
    deltas = np.array([d for d in raw if d is not None], dtype=float)
    failed = config.B - deltas.size
    if deltas.size == 0:
        raise DegenerateBootstrapError("bootstrap degenerate; thresholds too strict")
    reject, q = reject_rule(deltas, config.alpha)
    result = TestResult(bool(reject), float(q), deltas, int(failed), config, b)
    if not result.reliable:
        warnings.warn(
            f"{failed} of {config.B} bootstrap draws failed; test is unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    return result
