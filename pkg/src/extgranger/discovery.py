"""Pairwise extreme-causality decisions and the two-step summary-graph estimator."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .core import TimeSeriesPanel
from .estimator import ConditioningSpec, EstimationError, GammaEstimate, gamma_pair, recommended_defaults
from .testing import BootstrapConfig, tail_causality_test

__all__ = [
    "NotDecidable",
    "PairDecision",
    "SummaryGraph",
    "Classifier",
    "BootstrapTest",
    "classify_pair",
    "estimate_summary_graph",
    "to_dot",
    "from_dot",
]


class NotDecidable(EstimationError):
    """The estimator could not be evaluated for a pair; ``reason`` holds the cause."""

    def __init__(self, cause, effect, reason: Exception):
        super().__init__(f"{cause} -> {effect}: {reason}")
        self.pair = (cause, effect)
        self.reason = reason


@dataclass(frozen=True)
class PairDecision:
    causes: bool
    gamma: GammaEstimate

    @property
    def threshold(self) -> float:
        return (1.0 + self.gamma.baseline_hat) / 2.0


def classify_pair(
    panel: TimeSeriesPanel,
    cause,
    effect,
    conditioners: Sequence = (),
    spec: ConditioningSpec | None = None,
) -> PairDecision:
    """Declare ``cause -> effect`` when ``gamma_hat > (1 + baseline_hat) / 2``.

    Raises
    ------
    NotDecidable
        When the estimator fails on this pair (distinct from ``causes=False``).
    """
    try:
        est = gamma_pair(panel, cause, effect, conditioners, spec)
    except EstimationError as exc:
        raise NotDecidable(cause, effect, exc) from exc
    return PairDecision(causes=est.gamma_hat > (1.0 + est.baseline_hat) / 2.0, gamma=est)


@dataclass(frozen=True)
class Classifier:
    """Decide each edge with the threshold rule of :func:`classify_pair`."""

    def decide(self, panel, cause, effect, conditioners, spec, key) -> bool:
        return classify_pair(panel, cause, effect, conditioners, spec).causes


@dataclass(frozen=True)
class BootstrapTest:
    """Decide each edge by the bootstrap tail-causality test.

    Every edge gets its own seed stream derived from ``seed`` and the edge's
    position, so the graph does not depend on evaluation order.
    """

    alpha: float = 0.05
    B: int = 200
    b: int | None = None
    seed: int = 0

    def decide(self, panel, cause, effect, conditioners, spec, key) -> bool:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        sub_seed = int(seq.generate_state(1, dtype=np.uint64)[0])
        cfg = BootstrapConfig(B=self.B, b=self.b, alpha=self.alpha, seed=sub_seed)
        try:
            return tail_causality_test(panel, cause, effect, conditioners, spec, cfg).reject
        except EstimationError as exc:
            raise NotDecidable(cause, effect, exc) from exc


@dataclass(frozen=True)
class SummaryGraph:
    """Directed graph over series; ``adjacency[i, j]`` means an edge ``i -> j``."""

    names: tuple[str, ...]
    adjacency: np.ndarray
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool)
        m = len(self.names)
        if adj.shape != (m, m):
            raise ValueError(f"adjacency must be {m}x{m}, got {adj.shape}")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        adj.setflags(write=False)
        object.__setattr__(self, "names", tuple(str(s) for s in self.names))
        object.__setattr__(self, "adjacency", adj)

    @property
    def m(self) -> int:
        return len(self.names)

    def edges(self) -> list[tuple[str, str]]:
        return [(self.names[i], self.names[j]) for i, j in zip(*np.nonzero(self.adjacency))]

    def parents(self, j: int) -> set[int]:
        return set(np.flatnonzero(self.adjacency[:, j]).tolist())

    def __eq__(self, other):
        if not isinstance(other, SummaryGraph):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash((self.names, self.adjacency.tobytes()))

    def to_json(self) -> str:
        return json.dumps(
            {
                "names": list(self.names),
                "adjacency": self.adjacency.astype(int).tolist(),
                "edges": [list(e) for e in self.edges()],
                "warnings": list(self.notes),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "SummaryGraph":
        obj = json.loads(text)
        return cls(tuple(obj["names"]), np.array(obj["adjacency"], dtype=bool), tuple(obj.get("warnings", ())))

    @classmethod
    def complete(cls, names) -> "SummaryGraph":
        m = len(names)
        return cls(tuple(names), ~np.eye(m, dtype=bool))


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: SummaryGraph, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    lines += [f"  {_dot_id(s)};" for s in graph.names]
    lines += [f"  {_dot_id(a)} -> {_dot_id(b)};" for a, b in graph.edges()]
    lines.append("}")
    return "\n".join(lines) + "\n"


_QUOTED = r'"((?:[^"\\]|\\.)*)"'
_NODE_RE = re.compile(rf"^\s*{_QUOTED}\s*;?\s*$")
_EDGE_RE = re.compile(rf"^\s*{_QUOTED}\s*->\s*{_QUOTED}\s*;?\s*$")


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s)


def from_dot(text: str) -> SummaryGraph:
    """Parse the DOT subset written by :func:`to_dot`."""
    body = text.strip()
    m = re.match(r"^digraph\s+\w*\s*\{(.*)\}\s*$", body, re.S)
    if not m:
        raise ValueError("not a digraph")
    names: list[str] = []
    edges = []
    for raw in m.group(1).splitlines():
        if not raw.strip():
            continue
        if em := _EDGE_RE.match(raw):
            edges.append((_unquote(em.group(1)), _unquote(em.group(2))))
        elif nm := _NODE_RE.match(raw):
            names.append(_unquote(nm.group(1)))
        else:
            raise ValueError(f"cannot parse DOT line: {raw.strip()!r}")
    pos = {s: i for i, s in enumerate(names)}
    adj = np.zeros((len(names), len(names)), dtype=bool)
    for a, b in edges:
        adj[pos[a], pos[b]] = True
    return SummaryGraph(tuple(names), adj)


def _decide(backend, panel, i, j, cond, spec, step):
    try:
        return backend.decide(panel, i, j, cond, spec, (step, i, j)), None
    except NotDecidable as exc:
        return True, f"step {step}: {panel.names[i]} -> {panel.names[j]} not decidable ({exc.reason}); edge kept"


def _run(jobs, n_jobs):
    if n_jobs is None or n_jobs == 1:
        return [fn(*a) for fn, a in jobs]
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fn)(*a) for fn, a in jobs)


def estimate_summary_graph(
    panel: TimeSeriesPanel,
    spec: ConditioningSpec | None = None,
    backend=None,
    n_jobs: int | None = None,
    return_pairwise: bool = False,
):
    """Two-step extreme-causality summary graph.

    Step 1 keeps ``i -> j`` when it is decided causal with no conditioning.
    Step 2 re-decides every surviving edge conditioning on the common
    parents of ``i`` and ``j`` in the step-1 graph (minus ``i`` and ``j``).
    Parent sets are frozen after step 1, so the result does not depend on
    edge order, and parallel execution matches sequential execution.

    Pairs whose estimator fails are kept and reported in ``graph.notes``.
    """
    spec = spec or recommended_defaults()
    backend = backend or Classifier()
    m = panel.m
    if m < 2:
        raise ValueError("need at least two series")
    pairs = [(i, j) for i in range(m) for j in range(m) if i != j]
    notes = []

    out1 = _run([(_decide, (backend, panel, i, j, (), spec, 1)) for i, j in pairs], n_jobs)
    pairwise = np.zeros((m, m), dtype=bool)
    for (i, j), (keep, note) in zip(pairs, out1):
        pairwise[i, j] = keep
        if note:
            notes.append(note)

    survivors = [(i, j) for i, j in pairs if pairwise[i, j]]
    parents = [set(np.flatnonzero(pairwise[:, j]).tolist()) for j in range(m)]
    jobs = []
    for i, j in survivors:
        cond = tuple(sorted((parents[i] & parents[j]) - {i, j}))
        jobs.append((_decide, (backend, panel, i, j, cond, spec, 2)))
    out2 = _run(jobs, n_jobs)
    final = np.zeros((m, m), dtype=bool)
    for (i, j), (keep, note) in zip(survivors, out2):
        final[i, j] = keep
        if note:
            notes.append(note)

    graph = SummaryGraph(panel.names, final, tuple(notes))
    if return_pairwise:
        return graph, SummaryGraph(panel.names, pairwise)
    return graph
