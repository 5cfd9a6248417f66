"""Normalized edit distance and the Monte-Carlo benchmark harness."""

from __future__ import annotations

import csv
import io
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .discovery import Classifier, SummaryGraph, estimate_summary_graph
from .estimator import ConditioningSpec, recommended_defaults
from .simulation import ModelKind, Noise, SimulationRecipe, random_graph, simulate

__all__ = [
    "edit_distance",
    "BenchmarkGrid",
    "BenchmarkRow",
    "BenchmarkReport",
    "run_benchmark",
    "cell_seed_sequence",
]

METHODS = ("extremes", "random")


def edit_distance(g_est: SummaryGraph, g_true: SummaryGraph) -> float:
    """Share of ordered pairs ``i != j`` whose edge status differs."""
    a, b = np.asarray(g_est.adjacency, bool), np.asarray(g_true.adjacency, bool)
    if a.shape != b.shape:
        raise ValueError(f"graph sizes differ: {a.shape} vs {b.shape}")
    m = a.shape[0]
    if m < 2:
        raise ValueError("edit distance needs m >= 2")
    off = ~np.eye(m, dtype=bool)
    return float(np.count_nonzero((a != b) & off)) / (m * (m - 1))


@dataclass(frozen=True)
class BenchmarkGrid:
    m_values: Sequence[int] = (3, 5, 7)
    n_values: Sequence[int] = (500, 5000)
    models: Sequence[tuple[str, str]] = (("var_graph", "pareto"), ("var_graph", "gaussian"))
    R: int = 100
    spec: ConditioningSpec = field(default_factory=recommended_defaults)
    methods: Sequence[str] = METHODS
    backend: object = field(default_factory=Classifier)
    seed: int = 0

    def __post_init__(self):
        if self.R < 1:
            raise ValueError("R must be >= 1")
        if any(m < 2 for m in self.m_values):
            raise ValueError("every m must be >= 2")
        for kind, noise in self.models:
            if not ModelKind(kind).is_graph:
                raise ValueError(f"benchmark models must be graph kinds, got {kind}")
            Noise(noise)
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")

    def cells(self):
        for kind, noise in self.models:
            for n in self.n_values:
                for m in self.m_values:
                    yield (int(m), int(n), ModelKind(kind).value, Noise(noise).value)


@dataclass(frozen=True)
class BenchmarkRow:
    m: int
    n: int
    model: str
    noise: str
    method: str
    mean_error: float
    stderr: float
    mean_runtime_seconds: float
    R: int
    n_failed: int = 0


@dataclass
class BenchmarkReport:
    rows: list[BenchmarkRow]
    scores: dict = field(default_factory=dict)  # (m, n, model, noise, method) -> per-rep errors

    def row(self, m, n, model, noise, method) -> BenchmarkRow:
        for r in self.rows:
            if (r.m, r.n, r.model, r.noise, r.method) == (m, n, model, noise, method):
                return r
        raise KeyError((m, n, model, noise, method))

    def to_csv(self, include_runtime: bool = True) -> str:
        """One row per cell and method; runtimes are the only non-reproducible column."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(BenchmarkRow.__dataclass_fields__)
        if not include_runtime:
            names.remove("mean_runtime_seconds")
        w.writerow(names)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, k)) for k in names])
        return buf.getvalue()

    def to_text(self, include_runtime: bool = True) -> str:
        head = ["m", "n", "model", "noise", "method", "mean_error", "stderr"]
        if include_runtime:
            head.append("runtime_s")
        head += ["R", "failed"]
        body = []
        for r in self.rows:
            cells = [r.m, r.n, r.model, r.noise, r.method, f"{r.mean_error:.4f}", f"{r.stderr:.4f}"]
            if include_runtime:
                cells.append(f"{r.mean_runtime_seconds:.4f}")
            cells += [r.R, r.n_failed]
            body.append([str(c) for c in cells])
        widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(head)]
        lines = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
        lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
        return "\n".join(lines) + "\n"


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def _code(s: str) -> int:
    return zlib.crc32(s.encode())


def cell_seed_sequence(seed: int, m: int, n: int, model: str, noise: str, rep: int) -> np.random.SeedSequence:
    """Seed stream for one replication; depends only on the cell and ``rep``."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(m, n, _code(model), _code(noise), rep))


def _replication(grid: BenchmarkGrid, cell, rep):
    m, n, model, noise = cell
    truth_ss, sim_ss, rand_ss = cell_seed_sequence(grid.seed, *cell, rep).spawn(3)
    truth = random_graph(m, 1.0 / m, np.random.default_rng(truth_ss))
    sim_seed = int(sim_ss.generate_state(1, dtype=np.uint64)[0])
    out = {}
    panel = None
    if "extremes" in grid.methods:
        try:
            panel = simulate(SimulationRecipe(kind=model, n=n, noise=noise, graph=truth, seed=sim_seed))
        except ValueError:
            return None
    for method in grid.methods:
        t0 = time.perf_counter()
        try:
            if method == "extremes":
                est = estimate_summary_graph(panel, grid.spec, grid.backend)
            else:
                est = random_graph(m, 0.5, np.random.default_rng(rand_ss), names=truth.names)
        except ValueError:
            out[method] = None
            continue
        out[method] = (edit_distance(est, truth), time.perf_counter() - t0)
    return out


def run_benchmark(grid: BenchmarkGrid, n_jobs: int | None = None) -> BenchmarkReport:
    """Score every method on ``grid.R`` random truth graphs per cell.

    Replications whose simulation or estimation fails are excluded from the
    means and counted in ``n_failed``.
    """
    cells = list(grid.cells())
    jobs = [(cell, rep) for cell in cells for rep in range(grid.R)]
    if n_jobs is None or n_jobs == 1:
        results = [_replication(grid, c, r) for c, r in jobs]
    else:
        results = Parallel(n_jobs=n_jobs)(delayed(_replication)(grid, c, r) for c, r in jobs)

    rows, scores = [], {}
    by_cell: dict = {}
    for (cell, _), res in zip(jobs, results):
        by_cell.setdefault(cell, []).append(res)
    for cell in cells:
        reps = by_cell[cell]
        for method in grid.methods:
            ok = [r[method] for r in reps if r is not None and r.get(method) is not None]
            errs = np.array([e for e, _ in ok], dtype=float)
            times = np.array([t for _, t in ok], dtype=float)
            failed = len(reps) - len(ok)
            if errs.size:
                mean = float(errs.mean())
                se = float(errs.std(ddof=1) / math.sqrt(errs.size)) if errs.size > 1 else 0.0
                rt = float(times.mean())
            else:
                mean = se = rt = float("nan")
            rows.append(BenchmarkRow(*cell, method, mean, se, rt, grid.R, failed))
            scores[(*cell, method)] = errs
    return BenchmarkReport(rows, scores)
