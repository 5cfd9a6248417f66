"""Seeded data generators for the simulation study.

Trivariate models (columns ``X, Y, Z``):

* ``var3``:   ``Z_t = 0.5 Z_{t-1} + e``, ``X_t = 0.5 X_{t-1} + aZ Z_{t-1} + e``,
  ``Y_t = aY Y_{t-1} + aZ Z_{t-1} + aX X_{t-1} + e``.
* ``garch3``: ``Z_t = (0.1 + 0.1 Z^2)^{1/2} e``, ``X_t = (0.1 + 0.1 X^2 + aZ Z^2)^{1/2} e``,
  ``Y_t = (0.1 + aY/5 Y^2 + aZ Z^2 + aX X^2)^{1/2} e`` (all lagged by one step).

Graph-driven models over ``m`` series, with ``delta[j, i] = 1`` for an edge ``j -> i``:

* ``var_graph``:   ``X^i_{t+1} = 0.3 X^i_t + sum_j delta[j, i] 0.3 X^j_t + e^i_t``.
* ``garch_graph``: ``X^i_{t+1} = (0.1 + 0.5 sum_j delta[j, i] (X^j_t)^2)^{1/2} e^i_t``.

All recursions start from zero and the first ``burn_in`` rows are dropped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import TimeSeriesPanel
from .discovery import SummaryGraph

__all__ = ["Noise", "ModelKind", "SimulationRecipe", "draw_noise", "simulate", "random_graph"]


class Noise(str, enum.Enum):
    GAUSSIAN = "gaussian"
    PARETO = "pareto"  # x_min = 1, tail index 1
    CAUCHY = "cauchy"


class ModelKind(str, enum.Enum):
    VAR3 = "var3"
    GARCH3 = "garch3"
    VAR_GRAPH = "var_graph"
    GARCH_GRAPH = "garch_graph"

    @property
    def is_graph(self) -> bool:
        return self in (ModelKind.VAR_GRAPH, ModelKind.GARCH_GRAPH)


def draw_noise(noise: Noise | str, size, rng: np.random.Generator) -> np.ndarray:
    noise = Noise(noise)
    if noise is Noise.GAUSSIAN:
        return rng.standard_normal(size)
    u = rng.random(size)
    if noise is Noise.PARETO:
        return 1.0 / (1.0 - u)
    return np.tan(np.pi * (u - 0.5))


@dataclass(frozen=True)
class SimulationRecipe:
    """What to simulate.

    ``alpha = (alpha_X, alpha_Y, alpha_Z)`` is used by the trivariate kinds,
    ``graph`` (or ``m`` plus a random draw upstream) by the graph kinds.
    ``burn_in=None`` means 100 for trivariate kinds and 0 for graph kinds.
    """

    kind: ModelKind = ModelKind.VAR3
    n: int = 500
    noise: Noise = Noise.PARETO
    alpha: tuple[float, float, float] = (0.5, 0.5, 0.5)
    graph: SummaryGraph | None = None
    burn_in: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "noise", Noise(self.noise))
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if len(self.alpha) != 3:
            raise ValueError("alpha must hold (alpha_X, alpha_Y, alpha_Z)")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.kind.is_graph:
            if self.graph is None:
                raise ValueError(f"{self.kind.value} needs a graph")
            if self.graph.m < 2:
                raise ValueError("graph kinds need m >= 2")

    @property
    def effective_burn_in(self) -> int:
        if self.burn_in is not None:
            return int(self.burn_in)
        return 0 if self.kind.is_graph else 100

    @property
    def width(self) -> int:
        return self.graph.m if self.kind.is_graph else 3


def simulate(recipe: SimulationRecipe, innovations=None) -> TimeSeriesPanel:
    """Generate the panel described by ``recipe``.

    ``innovations`` (shape ``(n + burn_in, width)``) replaces the random
    noise, mainly for testing the recursions.
    """
    total = recipe.n + recipe.effective_burn_in
    k = recipe.width
    if innovations is None:
        rng = np.random.default_rng(recipe.seed)
        eps = draw_noise(recipe.noise, (total, k), rng)
    else:
        eps = np.asarray(innovations, dtype=float)
        if eps.shape != (total, k):
            raise ValueError(f"innovations must have shape {(total, k)}, got {eps.shape}")

    kind = recipe.kind
    if kind is ModelKind.VAR3:
        out = _var3(eps, *recipe.alpha)
        names = ("X", "Y", "Z")
    elif kind is ModelKind.GARCH3:
        out = _garch3(eps, *recipe.alpha)
        names = ("X", "Y", "Z")
    else:
        delta = recipe.graph.adjacency.astype(float)
        out = _var_graph(eps, delta) if kind is ModelKind.VAR_GRAPH else _garch_graph(eps, delta)
        names = recipe.graph.names
    return TimeSeriesPanel(out[recipe.effective_burn_in :], names)


def _var3(eps, a_x, a_y, a_z):
    total = eps.shape[0]
    out = np.zeros((total, 3))
    x = y = z = 0.0
    ex, ey, ez = eps[:, 0], eps[:, 1], eps[:, 2]
    for t in range(1, total):
        x, y, z = (
            0.5 * x + a_z * z + ex[t],
            a_y * y + a_z * z + a_x * x + ey[t],
            0.5 * z + ez[t],
        )
        out[t] = (x, y, z)
    return out


def _garch3(eps, a_x, a_y, a_z):
    total = eps.shape[0]
    out = np.zeros((total, 3))
    x = y = z = 0.0
    ex, ey, ez = eps[:, 0], eps[:, 1], eps[:, 2]
    for t in range(1, total):
        x2, y2, z2 = x * x, y * y, z * z
        x, y, z = (
            np.sqrt(0.1 + 0.1 * x2 + a_z * z2) * ex[t],
            np.sqrt(0.1 + a_y / 5.0 * y2 + a_z * z2 + a_x * x2) * ey[t],
            np.sqrt(0.1 + 0.1 * z2) * ez[t],
        )
        out[t] = (x, y, z)
    return out


def _var_graph(eps, delta):
    total, m = eps.shape
    out = np.zeros((total, m))
    for t in range(1, total):
        prev = out[t - 1]
        out[t] = 0.3 * prev + 0.3 * (prev @ delta) + eps[t]
    return out


def _garch_graph(eps, delta):
    total, m = eps.shape
    out = np.zeros((total, m))
    for t in range(1, total):
        prev = out[t - 1]
        out[t] = np.sqrt(0.1 + 0.5 * ((prev * prev) @ delta)) * eps[t]
    return out


def random_graph(m: int, edge_prob: float, rng: np.random.Generator, names=None) -> SummaryGraph:
    """Each ordered pair ``i != j`` carries an edge independently with ``edge_prob``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    adj = rng.random((m, m)) < edge_prob
    np.fill_diagonal(adj, False)
    names = tuple(names) if names is not None else tuple(f"X{i + 1}" for i in range(m))
    return SummaryGraph(names, adj)
