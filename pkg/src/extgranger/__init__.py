"""Granger causality in extremes for multivariate time series."""

from .core import (
    EcdfTransform,
    InputError,
    TimeSeriesPanel,
    ecdf_fit,
    empirical_quantile,
    kth_largest,
    read_csv,
    write_csv,
)
from .discovery import (
    BootstrapTest,
    Classifier,
    NotDecidable,
    PairDecision,
    SummaryGraph,
    classify_pair,
    estimate_summary_graph,
    from_dot,
    to_dot,
)
from .estimator import (
    ConditioningSpec,
    EstimationError,
    GammaEstimate,
    IndexSets,
    Variant,
    build_index_sets,
    gamma_hat,
    gamma_pair,
    recommended_defaults,
)
from .estimators import CausalTailCoefficient, ExtremalCausalityGraph, TailCausalityTest, check_panel
from .evaluation import BenchmarkGrid, BenchmarkReport, edit_distance, run_benchmark
from .simulation import ModelKind, Noise, SimulationRecipe, random_graph, simulate
from .testing import (
    BootstrapConfig,
    DegenerateBootstrapError,
    TestResult,
    block_bootstrap_resample,
    tail_causality_test,
)

__version__ = "0.1.0"
