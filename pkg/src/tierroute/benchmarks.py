"""Canonical end-to-end protocols over the synthetic scenarios.

The pipeline mirrors production use: generate (or load) a stream, split
off a calibration set, calibrate the exit threshold on it, build pools at
the calibrated threshold, then stream the test set under each policy.

The benchmark cost model keeps the standard rate ratios but bills the
cloud more heavily than the base unit. With the cloud charge at the base
unit, offloading everything to the cloud (one flat fee) undercuts any
edge exit, and no three-tier split can pay off; a dominant cloud bill is
also the regime the accuracy/cost trade-off is designed for.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .costs import CostModel, Device, default_costs
from .exits import CalibrationResult, DeploymentConfig, calibrate_threshold, threshold_grid
from .pools import PoolState, build_pools
from .simulate import RunReport, run_baseline_suite
from .synth import ScenarioConfig, default_scenario, drift_scenario, generate, planted_difficulty
from .traces import TraceSet, split_traces

DEFAULT_M = 3
DEFAULT_N = 6

BENCHMARK_LAMBDA = 0.02
BENCHMARK_CLOUD_CHARGE_UNITS = 9.0

SPLIT_FRACTIONS = (0.8, 0.1, 0.1)

DIFFICULTY_TO_DEVICE = {"easy": Device.MOBILE, "moderate": Device.EDGE, "hard": Device.CLOUD}


def benchmark_costs(lambda_unit: float = BENCHMARK_LAMBDA) -> CostModel:
    """Standard ratios with the cloud charge raised to 9x the base unit."""
    return replace(
        default_costs(lambda_unit), cloud_charge=BENCHMARK_CLOUD_CHARGE_UNITS * lambda_unit
    )


@dataclass(frozen=True)
class PipelineResult:
    scenario: ScenarioConfig
    cfg: DeploymentConfig
    costs: CostModel
    calibration: CalibrationResult
    pools: PoolState
    cal_traces: TraceSet
    stream_traces: TraceSet
    reports: dict[str, RunReport]


def run_pipeline(
    scenario: ScenarioConfig,
    cfg: DeploymentConfig,
    costs: CostModel,
    seed: int,
    metric: str = "sq_euclidean",
) -> PipelineResult:
    """Generate, split, calibrate on validation, pool, and run all policies
    on the test stream."""
    traces = generate(scenario)
    _, val, test = split_traces(traces, SPLIT_FRACTIONS, seed)
    grid = threshold_grid(traces.manifest.num_classes)
    calibration = calibrate_threshold(val, grid, cfg, costs)
    pools, _ = build_pools(val, calibration.alpha_star, cfg)
    reports = run_baseline_suite(test, calibration.alpha_star, cfg, costs, pools, seed, metric)
    return PipelineResult(
        scenario=scenario,
        cfg=cfg,
        costs=costs,
        calibration=calibration,
        pools=pools,
        cal_traces=val,
        stream_traces=test,
        reports=reports,
    )


def run_default_benchmark(seed: int = 42, metric: str = "sq_euclidean") -> PipelineResult:
    """The committed no-drift benchmark (m=3, n=6, benchmark costs)."""
    scenario = replace(default_scenario(), seed=seed)
    cfg = DeploymentConfig(m=DEFAULT_M, n=DEFAULT_N, l=scenario.num_layers)
    return run_pipeline(scenario, cfg, benchmark_costs(), seed, metric)


@dataclass(frozen=True)
class DriftBenchmarkResult:
    calibration: CalibrationResult
    pools: PoolState
    stream_traces: TraceSet
    fixed: RunReport
    adaptive: RunReport
    onset: int


def run_drift_benchmark(seed: int = 42, metric: str = "sq_euclidean") -> DriftBenchmarkResult:
    """Fixed vs adaptive routing on the drift stream.

    Calibration and pools come from a separate drift-free set drawn from
    the pre-onset distribution (pools are built before deployment; the
    shift happens at test time). The whole drifted stream is then routed
    by both centroid policies.
    """
    from .simulate import POLICY_CENTROID_ADAPTIVE, POLICY_CENTROID_FIXED, Policy, run_stream

    scenario = replace(drift_scenario(), seed=seed)
    cfg = DeploymentConfig(m=DEFAULT_M, n=DEFAULT_N, l=scenario.num_layers)
    costs = benchmark_costs()

    cal_scenario = replace(
        scenario, drift=None, num_samples=400, seed=seed + 1, split="validation"
    )
    cal = generate(cal_scenario)
    grid = threshold_grid(cal.manifest.num_classes)
    calibration = calibrate_threshold(cal, grid, cfg, costs)
    pools, _ = build_pools(cal, calibration.alpha_star, cfg)

    stream = generate(scenario)
    fixed = run_stream(
        stream, Policy(POLICY_CENTROID_FIXED), calibration.alpha_star, cfg, costs, pools, metric
    )
    adaptive = run_stream(
        stream, Policy(POLICY_CENTROID_ADAPTIVE), calibration.alpha_star, cfg, costs, pools, metric
    )
    return DriftBenchmarkResult(
        calibration=calibration,
        pools=pools,
        stream_traces=stream,
        fixed=fixed,
        adaptive=adaptive,
        onset=scenario.drift.onset,
    )


def routing_agreement(report: RunReport, start_index: int = 0) -> float:
    """Fraction of samples (from ``start_index`` on) whose assigned device
    matches the device their planted difficulty calls for."""
    results = report.per_sample[start_index:]
    if not results:
        raise ValueError("no samples in the requested window")
    hits = sum(
        r.assignment.device is DIFFICULTY_TO_DEVICE[planted_difficulty(r.sample_id)]
        for r in results
    )
    return hits / len(results)
