"""Command-line interface: ``extgranger {discover,test,graph,simulate,benchmark}``.

Exit codes: 0 success, 2 usage or input error, 3 statistically degenerate
input (empty index sets, failed bootstrap).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .core import InputError, read_csv, write_csv
from .discovery import BootstrapTest, Classifier, NotDecidable, classify_pair, estimate_summary_graph, to_dot
from .estimator import ConditioningSpec, EstimationError, Variant
from .evaluation import BenchmarkGrid, run_benchmark
from .simulation import ModelKind, Noise, SimulationRecipe, random_graph, simulate
from .testing import BootstrapConfig, tail_causality_test

THREADS_ENV = "EXTGRANGER_THREADS"

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE = 0, 2, 3


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _band(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"band needs 'lower,upper', got {text!r}")
    return (vals[0], vals[1])


def _bands(text: str) -> list[tuple[float, float]]:
    return [_band(part) for part in text.split(";") if part.strip()]


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("estimator")
    g.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.THRESHOLD.value)
    g.add_argument("--nu", type=float, default=None, help="k = floor(n^nu); default 1/3")
    g.add_argument(
        "--hidden-confounding", action="store_true", help="use nu = 1/2 (ignored when --nu is set)"
    )
    g.add_argument("--q-F", dest="q_F", type=float, default=0.5)
    g.add_argument("--q-Y", dest="q_Y", type=float, default=0.8)
    g.add_argument("--q-Z", dest="q_Z", type=_floats, default=None, help="one level or one per conditioner")
    g.add_argument("--radius", type=float, default=None)
    g.add_argument("--center", type=_floats, default=None, help="y0,z0_1,...")
    g.add_argument("--p-x", dest="p_x", type=int, default=1)
    g.add_argument("--p-y", dest="p_y", type=int, default=1)
    g.add_argument("--x-band", type=_band, default=None)
    g.add_argument("--y-band", type=_band, default=None)
    g.add_argument("--z-bands", type=_bands, default=None, help="'lo,hi;lo,hi' per conditioner")


def _add_boot_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("bootstrap")
    g.add_argument("--B", type=int, default=200, help="bootstrap draws")
    g.add_argument("--b", type=int, default=None, help="block length (default floor(sqrt(n)))")
    g.add_argument("--alpha", type=float, default=0.05)


def _add_common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
    if needs_input:
        p.add_argument("-i", "--input", required=True, help="CSV file (header + one row per time step)")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help=f"worker cap (default ${THREADS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extgranger", description="Granger causality in extremes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="decide cause -> effect by the threshold rule")
    _add_common(p)
    p.add_argument("--cause", required=True)
    p.add_argument("--effect", required=True)
    p.add_argument("--conditioners", type=_names, default=[])
    _add_spec_flags(p)

    p = sub.add_parser("test", help="bootstrap test of tail causality")
    _add_common(p)
    p.add_argument("--cause", required=True)
    p.add_argument("--effect", required=True)
    p.add_argument("--conditioners", type=_names, default=[])
    _add_spec_flags(p)
    _add_boot_flags(p)

    p = sub.add_parser("graph", help="estimate the summary graph")
    _add_common(p)
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("--dot", default=None, help="also write DOT to this path")
    p.add_argument("--json", default=None, help="also write JSON to this path")
    p.add_argument("--backend", choices=["classifier", "bootstrap"], default="classifier")
    _add_spec_flags(p)
    _add_boot_flags(p)

    p = sub.add_parser("simulate", help="write a simulated panel as CSV")
    _add_common(p, needs_input=False)
    p.add_argument("--kind", choices=[k.value for k in ModelKind], default=ModelKind.VAR3.value)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--noise", choices=[k.value for k in Noise], default=Noise.PARETO.value)
    p.add_argument("--alpha-x", type=float, default=0.5)
    p.add_argument("--alpha-y", type=float, default=0.5)
    p.add_argument("--alpha-z", type=float, default=0.5)
    p.add_argument("--m", type=int, default=5, help="series count for graph kinds")
    p.add_argument("--edge-prob", type=float, default=None, help="default 1/m")
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--graph-output", default=None, help="truth graph JSON (default <output>.graph.json)")

    p = sub.add_parser("benchmark", help="Monte-Carlo comparison against the random baseline")
    _add_common(p, needs_input=False)
    p.add_argument("--m-values", type=_ints, default=[3, 5, 7])
    p.add_argument("--n-values", type=_ints, default=[500, 5000])
    p.add_argument(
        "--models",
        type=lambda s: [tuple(part.split(":")) for part in s.split(",") if part],
        default=[("var_graph", "pareto"), ("var_graph", "gaussian")],
        help="kind:noise pairs, e.g. var_graph:pareto,garch_graph:cauchy",
    )
    p.add_argument("--R", type=int, default=100)
    p.add_argument("--methods", type=_names, default=["extremes", "random"])
    p.add_argument("--backend", choices=["classifier", "bootstrap"], default="classifier")
    p.add_argument("--format", choices=["csv", "text"], default="csv")
    p.add_argument("--with-timings", action="store_true", help="include runtimes in the CSV")
    _add_spec_flags(p)
    _add_boot_flags(p)
    return parser


def _spec(args) -> ConditioningSpec:
    nu = args.nu if args.nu is not None else (0.5 if args.hidden_confounding else 1.0 / 3.0)
    q_Z = args.q_Z
    if q_Z is not None and len(q_Z) == 1:
        q_Z = q_Z[0]
    return ConditioningSpec(
        variant=args.variant,
        nu=nu,
        q_F=args.q_F,
        q_Y=args.q_Y,
        q_Z=tuple(q_Z) if isinstance(q_Z, list) else q_Z,
        radius=args.radius,
        center=tuple(args.center) if args.center else None,
        p_x=args.p_x,
        p_y=args.p_y,
        x_band=args.x_band,
        y_band=args.y_band,
        z_bands=tuple(args.z_bands) if args.z_bands else None,
    )


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"${THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _boot_config(args, n: int) -> BootstrapConfig:
    cfg = BootstrapConfig(B=args.B, b=args.b, alpha=args.alpha, seed=args.seed)
    cfg.block_length(n)  # raises on b > n
    return cfg


def cmd_discover(args) -> int:
    panel = read_csv(args.input)
    dec = classify_pair(panel, args.cause, args.effect, args.conditioners, _spec(args))
    report = {
        "cause": args.cause,
        "effect": args.effect,
        "gamma_hat": dec.gamma.gamma_hat,
        "baseline_hat": dec.gamma.baseline_hat,
        "threshold": dec.threshold,
        "causes": dec.causes,
        "n_extreme": dec.gamma.n_extreme,
        "n_baseline": dec.gamma.n_baseline,
    }
    _emit(json.dumps(report, indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_test(args) -> int:
    panel = read_csv(args.input)
    cfg = _boot_config(args, panel.n)
    res = tail_causality_test(
        panel, args.cause, args.effect, args.conditioners, _spec(args), cfg, n_jobs=_threads(args)
    )
    _emit(json.dumps(res.to_dict(), indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_graph(args) -> int:
    panel = read_csv(args.input)
    if panel.m < 2:
        raise InputError("graph estimation needs at least two columns")
    if args.backend == "bootstrap":
        _boot_config(args, panel.n)
        backend = BootstrapTest(alpha=args.alpha, B=args.B, b=args.b, seed=args.seed)
    else:
        backend = Classifier()
    t0 = time.perf_counter()
    graph = estimate_summary_graph(panel, _spec(args), backend, n_jobs=_threads(args))
    elapsed = time.perf_counter() - t0
    rendered = {"json": graph.to_json() + "\n", "dot": to_dot(graph)}
    if args.dot:
        _emit(rendered["dot"], args.dot)
    if args.json:
        _emit(rendered["json"], args.json)
    if args.output or args.dot or args.json:
        if args.output:
            _emit(rendered[args.format], args.output)
        summary = sys.stdout
    else:
        sys.stdout.write(rendered[args.format])
        summary = sys.stderr
    print(
        f"{len(graph.edges())} edges among {graph.m} series in {elapsed:.3f} s"
        + (f" ({len(graph.notes)} undecidable pairs kept)" if graph.notes else ""),
        file=summary,
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    kind = ModelKind(args.kind)
    graph = None
    if kind.is_graph:
        if args.m < 2:
            raise UsageError("graph kinds need --m >= 2")
        prob = args.edge_prob if args.edge_prob is not None else 1.0 / args.m
        graph_ss, sim_ss = np.random.SeedSequence(args.seed).spawn(2)
        graph = random_graph(args.m, prob, np.random.default_rng(graph_ss))
        seed = int(sim_ss.generate_state(1, dtype=np.uint64)[0])
    else:
        seed = args.seed
    recipe = SimulationRecipe(
        kind=kind,
        n=args.n,
        noise=args.noise,
        alpha=(args.alpha_x, args.alpha_y, args.alpha_z),
        graph=graph,
        burn_in=args.burn_in,
        seed=seed,
    )
    panel = simulate(recipe)
    if args.output:
        write_csv(panel, args.output)
    else:
        write_csv(panel, sys.stdout)
    if graph is not None:
        side = args.graph_output or (args.output + ".graph.json" if args.output else None)
        if side:
            _emit(graph.to_json() + "\n", side)
        else:
            sys.stderr.write(graph.to_json() + "\n")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    if args.backend == "bootstrap":
        backend = BootstrapTest(alpha=args.alpha, B=args.B, b=args.b, seed=args.seed)
    else:
        backend = Classifier()
    grid = BenchmarkGrid(
        m_values=tuple(args.m_values),
        n_values=tuple(args.n_values),
        models=tuple(tuple(mn) for mn in args.models),
        R=args.R,
        spec=_spec(args),
        methods=tuple(args.methods),
        backend=backend,
        seed=args.seed,
    )
    report = run_benchmark(grid, n_jobs=_threads(args))
    if args.format == "csv":
        text = report.to_csv(include_runtime=args.with_timings)
    else:
        text = report.to_text(include_runtime=args.with_timings)
    if args.output:
        _emit(text, args.output)
        sys.stdout.write(report.to_text())
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "discover": cmd_discover,
    "test": cmd_test,
    "graph": cmd_graph,
    "simulate": cmd_simulate,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with code 2 on usage errors
    try:
        return COMMANDS[args.command](args)
    except (NotDecidable, EstimationError) as exc:
        print(
            f"error: {exc}\nhint: loosen thresholds (raise --q-Y/--q-Z), increase --nu, or supply more data",
            file=sys.stderr,
        )
        return EXIT_DEGENERATE
    except (InputError, UsageError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
