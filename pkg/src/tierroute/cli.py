"""Command-line entry point.

Subcommands: ``gen`` (synthesize traces), ``calibrate`` (threshold
search), ``pool`` (build easy/moderate/hard pools), ``simulate``
(stream policies and report), ``sweep`` (vary one cost and re-run).

All randomness flows from --seed; identical flags and seed give
byte-identical data files. Exit codes: 0 success, 2 invalid
configuration, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .benchmarks import benchmark_costs
from .costs import ConfigError, load_costs
from .exits import DeploymentConfig, calibrate_threshold, save_calibration, threshold_grid
from .pools import build_pools, export_embeddings, pool_summary, save_pools
from .router import DISTANCE_METRICS
from .simulate import (
    ALL_POLICIES,
    NORMALIZE_CLOUD,
    NORMALIZE_MOBILE_FULL,
    POLICY_RANDOM,
    SWEEP_DIMENSIONS,
    Policy,
    anchor_to_measured_cloud,
    run_stream,
    sweep_cost,
    write_reports,
    write_sweep,
)
from .synth import default_scenario, drift_scenario, generate, load_scenario
from .traces import TraceDataError, TraceFormatError, load_traces, write_traces

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _load_pools_file(path):
    from .pools import load_pools

    return load_pools(path)


def _scenario_from_arg(arg: str):
    if arg == "default":
        return default_scenario()
    if arg == "drift":
        return drift_scenario()
    return load_scenario(arg)


def _deployment(m: int, n: int, l: int) -> DeploymentConfig:
    return DeploymentConfig(m=m, n=n, l=l)


def _costs_from_arg(path: str | None):
    return benchmark_costs() if path is None else load_costs(path)


def cmd_gen(args) -> int:
    scenario = _scenario_from_arg(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    traces = generate(scenario)
    out = write_traces(traces, args.out)
    counts: dict[str, int] = {}
    for s in traces:
        tier = s.id.rsplit("-", 1)[-1]
        counts[tier] = counts.get(tier, 0) + 1
    print(f"wrote {len(traces)} traces to {out}")
    for tier in sorted(counts):
        print(f"  {tier}: {counts[tier]}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    traces = load_traces(args.traces)
    costs = _costs_from_arg(args.costs)
    cfg = _deployment(args.m, args.n, traces.manifest.num_layers)
    grid = threshold_grid(traces.manifest.num_classes)
    result = calibrate_threshold(traces, grid, cfg, costs)
    save_calibration(result, args.out)
    print(f"alpha* = {result.alpha_star}")
    for alpha, r in zip(result.grid, result.expected_reward):
        marker = " <-- alpha*" if alpha == result.alpha_star else ""
        print(f"  alpha={alpha:.6f}  E[reward]={r:.6f}{marker}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_pool(args) -> int:
    traces = load_traces(args.traces)
    cfg = _deployment(args.m, args.n, traces.manifest.num_layers)
    state, membership = build_pools(traces, args.alpha, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_pools(state, out / "pools.json", traces.manifest.embedding_dim)
    with (out / "membership.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("id,pool\n")
        for s in traces:
            fh.write(f"{s.id},{membership[s.id]}\n")
    export_embeddings(traces, membership, out / "embeddings.csv")
    summary = pool_summary(state, traces, membership, args.alpha, cfg)
    print(json.dumps({k: summary[k] for k in ("counts", "fractions")}, indent=2))
    print(f"wrote pools.json, membership.csv, embeddings.csv to {out}")
    return EXIT_OK


def _parse_policies(arg: str, seed: int) -> list[Policy]:
    names = list(ALL_POLICIES) if arg == "all" else [p.strip() for p in arg.split(",") if p.strip()]
    return [Policy(name, seed=seed if name == POLICY_RANDOM else None) for name in names]


def cmd_simulate(args) -> int:
    traces = load_traces(args.traces)
    costs = _costs_from_arg(args.costs)
    cfg = _deployment(args.m, args.n, traces.manifest.num_layers)
    if args.policies is not None:
        policies = _parse_policies(args.policies, args.seed)
    else:
        policies = [Policy(f"centroid_{args.mode}")]
    needs_pools = any(p.kind.startswith("centroid_") for p in policies)
    pools = None
    if args.pools is not None:
        pools = _load_pools_file(args.pools)
    elif needs_pools:
        raise ConfigError("centroid policies need --pools (build one with the pool subcommand)")

    reports = {}
    for policy in policies:
        reports[policy.kind] = run_stream(
            traces,
            policy,
            args.alpha,
            cfg,
            costs,
            pools,
            metric=args.distance,
            normalize_against=args.normalize_against,
        )
    reports = anchor_to_measured_cloud(reports, args.normalize_against)
    combined = write_reports(reports, args.out)
    for name, report in reports.items():
        print(
            f"{name:20s} accuracy={report.accuracy:.4f} mean_cost={report.mean_cost:.6f} "
            f"delta={report.normalized_cost_delta:+.1f}%"
        )
    print(f"wrote {combined}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    stream = load_traces(args.traces)
    cal = load_traces(args.cal_traces) if args.cal_traces else stream
    costs = _costs_from_arg(args.costs)
    cfg = _deployment(args.m, args.n, stream.manifest.num_layers)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    points = sweep_cost(cal, stream, cfg, costs, args.dimension, values, metric=args.distance)
    out = write_sweep(points, args.dimension, args.out)
    for pt in points:
        print(
            f"{args.dimension}={pt.value:<8g} alpha*={pt.alpha_star:.4f} "
            f"accuracy={pt.report.accuracy:.4f} mean_cost={pt.report.mean_cost:.6f}"
        )
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tierroute",
        description="Trace-driven early-exit inference across mobile, edge, and cloud tiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic trace set")
    p.add_argument("--scenario", default="default",
                   help="'default', 'drift', or a scenario config JSON path")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", required=True, help="output trace directory")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("calibrate", help="grid-search the exit threshold")
    p.add_argument("--traces", required=True, help="calibration trace directory")
    p.add_argument("--costs", default=None,
                   help="cost config JSON (default: built-in benchmark costs)")
    p.add_argument("--m", type=int, required=True, help="last mobile layer")
    p.add_argument("--n", type=int, required=True, help="last edge layer")
    p.add_argument("--out", required=True, help="calibration report JSON path")
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("pool", help="build easy/moderate/hard pools")
    p.add_argument("--traces", required=True)
    p.add_argument("--alpha", type=float, required=True, help="exit threshold")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_pool)

    p = sub.add_parser("simulate", help="stream policies over a trace set")
    p.add_argument("--traces", required=True, help="stream trace directory")
    p.add_argument("--pools", default=None, help="pool file from the pool subcommand")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--costs", default=None)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("fixed", "adaptive"), default="adaptive",
                   help="centroid variant when --policies is not given")
    p.add_argument("--policies", default=None,
                   help=f"'all' or comma list of {', '.join(ALL_POLICIES)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--distance", choices=DISTANCE_METRICS, default="sq_euclidean")
    p.add_argument("--normalize-against", choices=(NORMALIZE_CLOUD, NORMALIZE_MOBILE_FULL),
                   default=NORMALIZE_CLOUD)
    p.add_argument("--out", required=True, help="output directory for reports")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("sweep", help="vary one cost field and re-run the pipeline")
    p.add_argument("--traces", required=True, help="stream trace directory")
    p.add_argument("--cal-traces", default=None,
                   help="calibration trace directory (default: same as --traces)")
    p.add_argument("--costs", default=None)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dimension", required=True, choices=sorted(set(SWEEP_DIMENSIONS)))
    p.add_argument("--values", required=True, help="comma-separated cost values")
    p.add_argument("--distance", choices=DISTANCE_METRICS, default="sq_euclidean")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.set_defaults(fn=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TraceFormatError, TraceDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
