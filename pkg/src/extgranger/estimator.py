"""Covariate-adjusted causal tail coefficient.

For a cause series ``x``, an effect ``y`` and optional conditioning series
``Z`` the estimator averages ``max_j F(y[t + j])`` (``j = 1..p_y``) over the
time indices ``S`` where ``x`` is extreme while ``y`` and ``Z`` are not. The
same average over the larger, non-extreme set ``S_tilde`` gives the baseline.
``F`` is the truncated ECDF of ``y`` from :mod:`extgranger.core`.

All time indices in this module are 0-based.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import TimeSeriesPanel, ecdf_fit, empirical_quantile, kth_largest

__all__ = [
    "Variant",
    "EstimationError",
    "ConditioningSpec",
    "IndexSets",
    "GammaEstimate",
    "recommended_defaults",
    "default_q_Z",
    "n_extremes",
    "build_index_sets",
    "gamma_hat",
    "gamma_pair",
]


class Variant(str, enum.Enum):
    """Which conditioning index set to use."""

    UNADJUSTED = "unadjusted"
    THRESHOLD = "threshold"  # S1: (y_t, Z_t) below upper quantile thresholds
    BALL = "ball"  # S2: (y_t, Z_t) inside a sup-norm ball
    BOTH_TAILS = "both_tails"  # S+-: |x_t| extreme, (y_t, Z_t) inside quantile bands
    LAGGED = "lagged"  # S1 required over the past p_x steps


class EstimationError(ValueError):
    """An index set came out empty, so the coefficient is undefined."""


Band = tuple[float, float]


@dataclass(frozen=True)
class ConditioningSpec:
    """Index-set variant plus every estimator hyperparameter.

    Parameters
    ----------
    variant : Variant or str
    nu : float in (0, 1)
        Number of extremes ``k = floor(|S_tilde| ** nu)``.
    q_F : float in [0, 1)
        ECDF truncation quantile.
    q_Y : float in (0, 1)
        Quantile level of the effect's non-extremeness threshold.
    q_Z : float, sequence of float, or None
        Quantile level(s) for conditioning series. ``None`` uses 0.9 for a
        single series and ``1 - 0.2 / d`` for ``d > 1`` series.
    radius, center :
        Ball radius and center ``(y0, z0_1, ..., z0_d)``; ``ball`` only.
    p_x, p_y : int
        Past window that must be non-extreme (``lagged`` only) and horizon over
        which the effect response is maximised.
    x_band, y_band, z_bands :
        ``(lower, upper)`` quantile levels for ``both_tails``. Without
        ``x_band`` the ``k`` largest ``|x_t|`` are extreme; without
        ``y_band``/``z_bands`` the bands are ``(1 - q, q)``.
    """

    variant: Variant = Variant.THRESHOLD
    nu: float = 1.0 / 3.0
    q_F: float = 0.5
    q_Y: float = 0.8
    q_Z: float | tuple[float, ...] | None = None
    radius: float | None = None
    center: tuple[float, ...] | None = None
    p_x: int = 1
    p_y: int = 1
    x_band: Band | None = None
    y_band: Band | None = None
    z_bands: tuple[Band, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        if not 0.0 <= self.q_F < 1.0:
            raise ValueError(f"q_F must lie in [0, 1), got {self.q_F}")
        if not 0.0 < self.q_Y < 1.0:
            raise ValueError(f"q_Y must lie in (0, 1), got {self.q_Y}")
        if self.q_Z is not None:
            if np.ndim(self.q_Z) == 0:
                object.__setattr__(self, "q_Z", float(self.q_Z))
            else:
                object.__setattr__(self, "q_Z", tuple(float(q) for q in self.q_Z))
            if not all(0.0 < q < 1.0 for q in np.atleast_1d(self.q_Z)):
                raise ValueError(f"q_Z levels must lie in (0, 1), got {self.q_Z}")
        if int(self.p_x) != self.p_x or self.p_x < 1:
            raise ValueError(f"p_x must be a positive integer, got {self.p_x}")
        if int(self.p_y) != self.p_y or self.p_y < 1:
            raise ValueError(f"p_y must be a positive integer, got {self.p_y}")
        object.__setattr__(self, "p_x", int(self.p_x))
        object.__setattr__(self, "p_y", int(self.p_y))
        if self.variant is Variant.BALL:
            if self.radius is None or not self.radius > 0:
                raise ValueError("ball variant needs a positive radius")
            if self.center is None:
                raise ValueError("ball variant needs a center (y0, z0...)")
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        for name in ("x_band", "y_band"):
            band = getattr(self, name)
            if band is not None:
                object.__setattr__(self, name, _check_band(band, name))
        if self.z_bands is not None:
            object.__setattr__(
                self, "z_bands", tuple(_check_band(b, "z_bands") for b in self.z_bands)
            )

    def with_(self, **changes) -> "ConditioningSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for key in self.__dataclass_fields__:
            val = getattr(self, key)
            if isinstance(val, Variant):
                val = val.value
            elif isinstance(val, tuple):
                val = [list(v) if isinstance(v, tuple) else v for v in val]
            out[key] = val
        return out


def _check_band(band, name) -> Band:
    lo, hi = (float(v) for v in band)
    if not 0.0 <= lo < hi <= 1.0:
        raise ValueError(f"{name} needs quantile levels 0 <= lower < upper <= 1, got {band}")
    return (lo, hi)


def recommended_defaults(hidden_confounding: bool = False) -> ConditioningSpec:
    """Recommended hyperparameters; ``nu = 1/2`` if hidden confounding is suspected."""
    return ConditioningSpec(nu=0.5 if hidden_confounding else 1.0 / 3.0)


def default_q_Z(d: int) -> float:
    return 0.9 if d <= 1 else 1.0 - 0.2 / d


def _resolve_q_Z(spec: ConditioningSpec, d: int) -> np.ndarray:
    if spec.q_Z is None:
        return np.full(d, default_q_Z(d))
    if isinstance(spec.q_Z, float):
        return np.full(d, spec.q_Z)
    if len(spec.q_Z) != d:
        raise ValueError(f"q_Z has {len(spec.q_Z)} levels for {d} conditioning series")
    return np.asarray(spec.q_Z, dtype=float)


def n_extremes(size: int, nu: float) -> int:
    """``floor(size ** nu)``, robust to ``64 ** (1/3) == 3.999...``."""
    return max(1, math.floor(round(size**nu, 9)))


@dataclass(frozen=True)
class IndexSets:
    S: np.ndarray
    S_tilde: np.ndarray
    tau_X: float | tuple[float, float]
    tau_vec: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GammaEstimate:
    gamma_hat: float
    baseline_hat: float
    n_extreme: int
    n_baseline: int
    spec: ConditioningSpec
    thresholds: dict

    @property
    def delta(self) -> float:
        return self.gamma_hat - self.baseline_hat


def _as_inputs(x, y, Z):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n = x.size
    if y.size != n:
        raise ValueError(f"x and y lengths differ ({n} vs {y.size})")
    if Z is None:
        Z = np.empty((n, 0))
    else:
        Z = np.asarray(Z, dtype=float)
        if Z.ndim == 1:
            Z = Z[:, None]
        if Z.shape[0] != n:
            if Z.size == 0:
                Z = np.empty((n, 0))
            else:
                raise ValueError(f"Z has {Z.shape[0]} rows, expected {n}")
    return x, y, Z


def _between(v, lo, hi):
    return (v >= lo) & (v <= hi)


def build_index_sets(x, y, Z, spec: ConditioningSpec) -> IndexSets:
    """Extreme-conditioning set ``S`` and baseline set ``S_tilde`` for one pair.

    Thresholds on ``y`` and ``Z`` are quantiles over the full sample; the
    threshold on ``x`` is taken within ``S_tilde``. Only indices ``t`` with
    ``t + p_y < n`` are eligible.

    Raises
    ------
    EstimationError
        If ``S_tilde`` or ``S`` is empty.
    """
    x, y, Z = _as_inputs(x, y, Z)
    n, d = Z.shape
    if n < spec.p_x + spec.p_y + 1:
        raise ValueError(f"need n >= p_x + p_y + 1 = {spec.p_x + spec.p_y + 1}, got n={n}")
    eligible = np.arange(n) + spec.p_y < n
    tau_vec: dict = {}
    v = spec.variant

    if v is Variant.UNADJUSTED:
        ok = np.ones(n, dtype=bool)
    elif v in (Variant.THRESHOLD, Variant.LAGGED):
        q_z = _resolve_q_Z(spec, d)
        tau_y = empirical_quantile(y, spec.q_Y)
        tau_z = [empirical_quantile(Z[:, i], q_z[i]) for i in range(d)]
        ok = y <= tau_y
        for i in range(d):
            ok &= Z[:, i] <= tau_z[i]
        tau_vec = {"tau_Y": tau_y, "tau_Z": tau_z}
        if v is Variant.LAGGED and spec.p_x > 1:
            window = ok.copy()
            window[: spec.p_x - 1] = False
            for s in range(1, spec.p_x):
                window[s:] &= ok[:-s]
            ok = window
    elif v is Variant.BALL:
        if len(spec.center) != 1 + d:
            raise ValueError(f"center needs {1 + d} coordinates, got {len(spec.center)}")
        r = spec.radius
        ok = np.abs(y - spec.center[0]) < r
        for i in range(d):
            ok &= np.abs(Z[:, i] - spec.center[1 + i]) < r
        tau_vec = {"center": list(spec.center), "radius": r}
    elif v is Variant.BOTH_TAILS:
        y_band = spec.y_band or (1.0 - spec.q_Y, spec.q_Y)
        if spec.z_bands is not None:
            if len(spec.z_bands) != d:
                raise ValueError(f"z_bands has {len(spec.z_bands)} bands for {d} series")
            z_bands = spec.z_bands
        else:
            z_bands = [(1.0 - q, q) for q in _resolve_q_Z(spec, d)]
        ty = (empirical_quantile(y, y_band[0]), empirical_quantile(y, y_band[1]))
        ok = _between(y, *ty)
        tz = []
        for i in range(d):
            band = (
                empirical_quantile(Z[:, i], z_bands[i][0]),
                empirical_quantile(Z[:, i], z_bands[i][1]),
            )
            ok &= _between(Z[:, i], *band)
            tz.append(band)
        tau_vec = {"tau_Y": ty, "tau_Z": tz}
    else:  # pragma: no cover
        raise ValueError(f"unknown variant {v}")

    S_tilde = np.flatnonzero(ok & eligible)
    if S_tilde.size == 0:
        raise EstimationError("baseline set empty; loosen thresholds")
    xs = x[S_tilde]
    k = n_extremes(S_tilde.size, spec.nu)
    if v is Variant.BOTH_TAILS:
        if spec.x_band is not None:
            tau_x = (
                empirical_quantile(xs, spec.x_band[0]),
                empirical_quantile(xs, spec.x_band[1]),
            )
            extreme = ~_between(xs, *tau_x)
        else:
            tau_x = kth_largest(np.abs(xs), k)
            extreme = np.abs(xs) >= tau_x
    else:
        tau_x = kth_largest(xs, k)
        extreme = xs >= tau_x
    S = S_tilde[extreme]
    if S.size == 0:
        raise EstimationError("no extreme events under spec")
    return IndexSets(S=S, S_tilde=S_tilde, tau_X=tau_x, tau_vec=tau_vec)


def _response(y, spec: ConditioningSpec) -> np.ndarray:
    """``max_{1<=j<=p_y} F(y[t+j])`` for every ``t`` with ``t + p_y < n``."""
    target = np.abs(y) if spec.variant is Variant.BOTH_TAILS else y
    fy = ecdf_fit(target, spec.q_F).evaluate(target)
    n = y.size
    p = spec.p_y
    out = fy[1 : n - p + 1].copy()
    for j in range(2, p + 1):
        np.maximum(out, fy[j : n - p + j], out=out)
    return out


def gamma_hat(x, y, Z=None, spec: ConditioningSpec | None = None) -> GammaEstimate:
    """Estimate the causal tail coefficient of ``x`` on ``y`` given ``Z``.

    Parameters
    ----------
    x, y : array-like of shape (n,)
        Cause and effect series.
    Z : array-like of shape (n, d), optional
        Conditioning series; ``None`` or zero columns for none.
    spec : ConditioningSpec, optional
        Defaults to :func:`recommended_defaults`.

    Returns
    -------
    GammaEstimate
        ``gamma_hat`` is the mean response over ``S``, ``baseline_hat`` the
        mean response over ``S_tilde``.
    """
    spec = spec or recommended_defaults()
    x, y, Z = _as_inputs(x, y, Z)
    sets = build_index_sets(x, y, Z, spec)
    resp = _response(y, spec)
    thresholds = {"tau_X": sets.tau_X, **sets.tau_vec}
    return GammaEstimate(
        gamma_hat=float(np.mean(resp[sets.S])),
        baseline_hat=float(np.mean(resp[sets.S_tilde])),
        n_extreme=int(sets.S.size),
        n_baseline=int(sets.S_tilde.size),
        spec=spec,
        thresholds=thresholds,
    )


def gamma_pair(
    panel: TimeSeriesPanel,
    cause,
    effect,
    conditioners: Sequence = (),
    spec: ConditioningSpec | None = None,
) -> GammaEstimate:
    """:func:`gamma_hat` on columns of ``panel`` selected by name or position."""
    ci, ei = panel.index_of(cause), panel.index_of(effect)
    if ci == ei:
        raise ValueError("cause and effect must be different columns")
    zi = [panel.index_of(c) for c in conditioners]
    if ci in zi or ei in zi:
        raise ValueError("conditioners must exclude the cause and the effect")
    vals = panel.values
    return gamma_hat(vals[:, ci], vals[:, ei], vals[:, zi], spec)
