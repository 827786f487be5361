"""Streaming simulator: policies, per-sample accounting, baselines, sweeps.

Samples are processed one at a time in stream order (batch size 1). A
policy decides the device; the device then runs its local early-exit
cascade over the layers it holds, falling back to a forced exit at its
last layer when no confidence crosses the threshold. Costs follow the
reward arithmetic's cost terms; relative costs are reported against the
cloud-only baseline (optionally against a full model priced at mobile
rates).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .costs import ConfigError, CostModel, Device, InferenceOutcome, monetary_cost, reward
from .exits import DeploymentConfig, ThresholdGrid, calibrate_threshold, first_exit, threshold_grid
from .pools import PoolState, build_pools
from .router import Assignment, RoutingMode, initialize_router
from .traces import SampleTrace, TraceSet

POLICY_CLOUD_ONLY = "cloud_only"
POLICY_MOBILE_FULL = "mobile_full"
POLICY_RANDOM = "random"
POLICY_CENTROID_FIXED = "centroid_fixed"
POLICY_CENTROID_ADAPTIVE = "centroid_adaptive"

ALL_POLICIES = (
    POLICY_CLOUD_ONLY,
    POLICY_MOBILE_FULL,
    POLICY_RANDOM,
    POLICY_CENTROID_FIXED,
    POLICY_CENTROID_ADAPTIVE,
)

NORMALIZE_CLOUD = "cloud"
NORMALIZE_MOBILE_FULL = "mobile-full"

CSV_COLUMNS = (
    "policy",
    "alpha",
    "accuracy",
    "mean_cost",
    "cost_delta_pct",
    "frac_mobile",
    "frac_edge",
    "frac_cloud",
    "mean_reward",
)

# fixed sub-stream labels so one --seed reproducibly drives every consumer
SEED_DOMAIN_RANDOM_POLICY = 1
SEED_DOMAIN_SPLIT = 2


@dataclass(frozen=True)
class Policy:
    """A routing policy; ``seed`` is required for the random baseline."""

    kind: str
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ALL_POLICIES:
            raise ConfigError(f"unknown policy {self.kind!r}; expected one of {ALL_POLICIES}")
        if self.kind == POLICY_RANDOM and self.seed is None:
            raise ConfigError("the random policy needs an explicit seed")


@dataclass(frozen=True)
class SampleResult:
    """One stream step: the routing decision, the inference, and its price."""

    sample_id: str
    assignment: Assignment
    outcome: InferenceOutcome
    cost: float
    reward: float


@dataclass(frozen=True)
class RunReport:
    policy: str
    alpha: float
    accuracy: float
    total_cost: float
    mean_cost: float
    normalized_cost_delta: float
    device_fractions: dict[str, float]
    mean_reward: float
    per_sample: tuple[SampleResult, ...]
    final_pools: PoolState | None = None
    # populated only under mobile-full normalization, where the cloud-relative
    # delta is still reported alongside
    cost_delta_vs_cloud: float | None = None

    def to_dict(self, include_per_sample: bool = True) -> dict:
        d = {
            "policy": self.policy,
            "alpha": self.alpha,
            "accuracy": self.accuracy,
            "total_cost": self.total_cost,
            "mean_cost": self.mean_cost,
            "normalized_cost_delta": self.normalized_cost_delta,
            "device_fractions": dict(self.device_fractions),
            "mean_reward": self.mean_reward,
        }
        if self.cost_delta_vs_cloud is not None:
            d["cost_delta_vs_cloud"] = self.cost_delta_vs_cloud
        if include_per_sample:
            d["per_sample"] = [
                {
                    "id": r.sample_id,
                    "device": r.outcome.device.value,
                    "exit_layer": r.outcome.exit_layer,
                    "prediction": r.outcome.prediction,
                    "correct": r.outcome.correct,
                    "confidence": r.outcome.confidence,
                    "cost": r.cost,
                    "reward": r.reward,
                }
                for r in self.per_sample
            ]
        return d


def device_inference(
    trace: SampleTrace, device: Device, alpha: float, cfg: DeploymentConfig
) -> InferenceOutcome:
    """Early-exit inference on the layers the given device holds.

    Mobile cascades over [1, m] and is forced to exit at m if nothing
    crosses; edge holds the first n layers, so it cascades over [1, n]
    with a forced exit at n; the cloud always reads the final layer.
    """
    if device is Device.CLOUD:
        layer = cfg.l
    else:
        last = cfg.m if device is Device.MOBILE else cfg.n
        layer = first_exit(trace.confidences, alpha, 1, last)
        if layer is None:
            layer = last
    prediction = trace.prediction_at(layer)
    return InferenceOutcome(
        device=device,
        exit_layer=layer,
        confidence=trace.confidence_at(layer),
        prediction=prediction,
        correct=prediction == trace.label,
    )


def cloud_only_mean_cost(costs: CostModel) -> float:
    """Per-sample cost when everything is offloaded to the cloud."""
    return costs.offload_cloud + costs.cloud_charge


def mobile_full_mean_cost(costs: CostModel, cfg: DeploymentConfig) -> float:
    """Per-sample cost of running all l layers at the mobile rate."""
    return costs.lambda_mobile * cfg.l


def cost_delta_pct(mean_cost: float, baseline_mean_cost: float) -> float:
    """Percentage change versus a baseline (negative means cheaper)."""
    return (mean_cost / baseline_mean_cost - 1.0) * 100.0


def _assign_fn(policy: Policy, cfg: DeploymentConfig, pools: PoolState | None, metric: str):
    """Per-sample device chooser for the given policy; may carry router state."""
    if policy.kind == POLICY_CLOUD_ONLY:
        return lambda trace: Assignment(trace.id, Device.CLOUD, {}), None
    if policy.kind == POLICY_MOBILE_FULL:
        return lambda trace: Assignment(trace.id, Device.MOBILE, {}), None
    if policy.kind == POLICY_RANDOM:
        rng = np.random.default_rng(
            np.random.SeedSequence([int(policy.seed), SEED_DOMAIN_RANDOM_POLICY])
        )
        devices = (Device.MOBILE, Device.EDGE, Device.CLOUD)
        return lambda trace: Assignment(trace.id, devices[int(rng.integers(3))], {}), None
    if pools is None:
        raise ConfigError(f"policy {policy.kind} needs calibration pools")
    mode = RoutingMode.FIXED if policy.kind == POLICY_CENTROID_FIXED else RoutingMode.ADAPTIVE
    router = initialize_router(pools, mode, metric)
    return router.route, router


def run_stream(
    traces: TraceSet,
    policy: Policy,
    alpha: float,
    cfg: DeploymentConfig,
    costs: CostModel,
    pools: PoolState | None = None,
    metric: str = "sq_euclidean",
    normalize_against: str = NORMALIZE_CLOUD,
    baseline_mean_cost: float | None = None,
) -> RunReport:
    """Stream every trace through the policy and account the results.

    The mobile-full policy overrides the layer split: the whole model sits
    on the device, so its cascade spans [1, l] at the mobile rate with no
    offload. Centroid policies route by pool distances; the adaptive
    variant's final pool state is attached to the report.
    """
    if len(traces) == 0:
        raise ConfigError("cannot simulate an empty trace set")
    assign, router = _assign_fn(policy, cfg, pools, metric)
    effective_cfg = cfg
    if policy.kind == POLICY_MOBILE_FULL:
        effective_cfg = DeploymentConfig(m=cfg.l, n=cfg.l, l=cfg.l)

    results = []
    total_cost = 0.0
    total_reward = 0.0
    correct = 0
    device_counts = {d: 0 for d in Device}
    for trace in traces:
        assignment = assign(trace)
        outcome = device_inference(trace, assignment.device, alpha, effective_cfg)
        sample_cost = monetary_cost(outcome, costs)
        sample_reward = reward(outcome, costs)
        total_cost += sample_cost
        total_reward += sample_reward
        correct += outcome.correct
        device_counts[outcome.device] += 1
        results.append(
            SampleResult(trace.id, assignment, outcome, sample_cost, sample_reward)
        )

    n = len(traces)
    if baseline_mean_cost is not None:
        baseline = baseline_mean_cost
    elif normalize_against == NORMALIZE_CLOUD:
        baseline = cloud_only_mean_cost(costs)
    elif normalize_against == NORMALIZE_MOBILE_FULL:
        baseline = mobile_full_mean_cost(costs, cfg)
    else:
        raise ConfigError(
            f"unknown normalization baseline {normalize_against!r}; "
            f"expected {NORMALIZE_CLOUD!r} or {NORMALIZE_MOBILE_FULL!r}"
        )
    vs_cloud = None
    if normalize_against == NORMALIZE_MOBILE_FULL:
        vs_cloud = cost_delta_pct(total_cost / n, cloud_only_mean_cost(costs))
    return RunReport(
        policy=policy.kind,
        alpha=alpha,
        accuracy=correct / n,
        total_cost=total_cost,
        mean_cost=total_cost / n,
        normalized_cost_delta=cost_delta_pct(total_cost / n, baseline),
        device_fractions={d.value: device_counts[d] / n for d in Device},
        mean_reward=total_reward / n,
        per_sample=tuple(results),
        final_pools=router.pools if router is not None else None,
        cost_delta_vs_cloud=vs_cloud,
    )


def run_baseline_suite(
    traces: TraceSet,
    alpha: float,
    cfg: DeploymentConfig,
    costs: CostModel,
    pools: PoolState,
    seed: int,
    metric: str = "sq_euclidean",
    normalize_against: str = NORMALIZE_CLOUD,
) -> dict[str, RunReport]:
    """All five policies on the same stream, relative costs normalized alike.

    Under cloud normalization the anchor is the measured cloud-only mean,
    so that baseline's own delta is zero by construction.
    """
    reports = {}
    for kind in ALL_POLICIES:
        policy = Policy(kind, seed=seed if kind == POLICY_RANDOM else None)
        reports[kind] = run_stream(
            traces, policy, alpha, cfg, costs, pools, metric, normalize_against
        )
    return anchor_to_measured_cloud(reports, normalize_against)


def anchor_to_measured_cloud(
    reports: dict[str, RunReport], normalize_against: str = NORMALIZE_CLOUD
) -> dict[str, RunReport]:
    """Re-anchor deltas to the measured cloud-only mean when that baseline
    was run, making its own delta exactly zero."""
    if normalize_against != NORMALIZE_CLOUD or POLICY_CLOUD_ONLY not in reports:
        return reports
    anchor = reports[POLICY_CLOUD_ONLY].mean_cost
    return {
        kind: replace(r, normalized_cost_delta=cost_delta_pct(r.mean_cost, anchor))
        for kind, r in reports.items()
    }


SWEEP_DIMENSIONS = {
    "lambda_m": "lambda_mobile",
    "lambda_e": "lambda_edge",
    "o_c": "offload_cloud",
    "lambda_mobile": "lambda_mobile",
    "lambda_edge": "lambda_edge",
    "offload_cloud": "offload_cloud",
}


@dataclass(frozen=True)
class SweepPoint:
    value: float
    alpha_star: float
    report: RunReport


def sweep_cost(
    cal_traces: TraceSet,
    stream_traces: TraceSet,
    cfg: DeploymentConfig,
    costs_base: CostModel,
    dimension: str,
    values: list[float],
    metric: str = "sq_euclidean",
    grid: ThresholdGrid | None = None,
) -> list[SweepPoint]:
    """Vary one cost field and redo the whole pipeline at each value.

    Per point: replace the field, recalibrate the threshold on the
    calibration set, rebuild pools at the new threshold, then stream the
    test set under adaptive centroid routing.
    """
    if not values:
        raise ConfigError("sweep needs at least one value")
    if any(v < 0 for v in values):
        raise ConfigError("cost values must be >= 0")
    if dimension not in SWEEP_DIMENSIONS:
        raise ConfigError(
            f"unknown sweep dimension {dimension!r}; expected one of {sorted(set(SWEEP_DIMENSIONS))}"
        )
    field = SWEEP_DIMENSIONS[dimension]
    if grid is None:
        grid = threshold_grid(cal_traces.manifest.num_classes)

    points = []
    for value in values:
        costs = replace(costs_base, **{field: float(value)})
        calibration = calibrate_threshold(cal_traces, grid, cfg, costs)
        pools, _ = build_pools(cal_traces, calibration.alpha_star, cfg)
        report = run_stream(
            stream_traces,
            Policy(POLICY_CENTROID_ADAPTIVE),
            calibration.alpha_star,
            cfg,
            costs,
            pools,
            metric,
        )
        points.append(SweepPoint(value=float(value), alpha_star=calibration.alpha_star, report=report))
    return points


def report_csv_row(report: RunReport) -> list:
    return [
        report.policy,
        repr(report.alpha),
        repr(report.accuracy),
        repr(report.mean_cost),
        repr(report.normalized_cost_delta),
        repr(report.device_fractions[Device.MOBILE.value]),
        repr(report.device_fractions[Device.EDGE.value]),
        repr(report.device_fractions[Device.CLOUD.value]),
        repr(report.mean_reward),
    ]


def write_reports(
    reports: dict[str, RunReport], out_dir: str | Path, include_per_sample: bool = True
) -> Path:
    """One JSON per policy plus a combined CSV with one row per policy."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, report in reports.items():
        (out / f"report_{name}.json").write_text(
            json.dumps(report.to_dict(include_per_sample), indent=2) + "\n", encoding="utf-8"
        )
    combined = out / "combined.csv"
    with combined.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for report in reports.values():
            writer.writerow(report_csv_row(report))
    return combined


def write_sweep(points: list[SweepPoint], dimension: str, out_path: str | Path) -> Path:
    """Trajectory CSV: one row per sweep value, same metric columns."""
    p = Path(out_path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dimension", "value", "alpha_star"] + list(CSV_COLUMNS[2:]))
        for pt in points:
            writer.writerow(
                [dimension, repr(pt.value), repr(pt.alpha_star)] + report_csv_row(pt.report)[2:]
            )
    return p
