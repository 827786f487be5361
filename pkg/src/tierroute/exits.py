"""Confidence-threshold exit rule, tier cascade, and threshold calibration.

The cascade walks exits in layer order and stops at the first confidence
crossing the threshold: within the mobile slice [1, m] the sample
concludes on the mobile device, within the edge slice [m+1, n] on the
edge, otherwise it is offloaded to the cloud and read at the final layer.
Calibration picks the threshold maximizing the empirical mean reward over
a grid of candidates; ties go to the smallest candidate (the cheaper
operating point).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .costs import ConfigError, CostModel, Device, InferenceOutcome, reward
from .traces import SampleTrace, TraceSet

GRID_SIZE = 10


@dataclass(frozen=True)
class DeploymentConfig:
    """Layer counts per tier: mobile holds the first m layers, edge the
    first n, cloud all l. Degenerate tiers are legal: m == n means no
    distinct edge slice, n == l means the edge holds the whole model."""

    m: int
    n: int
    l: int

    def __post_init__(self):
        if not (1 <= self.m <= self.n <= self.l):
            raise ConfigError(
                f"layer split must satisfy 1 <= m <= n <= l, got m={self.m}, n={self.n}, l={self.l}"
            )


@dataclass(frozen=True)
class ThresholdGrid:
    """Candidate exit thresholds: equidistant values spanning [1/|C|, 1]."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != GRID_SIZE:
            raise ConfigError(f"grid must have exactly {GRID_SIZE} values")


def threshold_grid(num_classes: int) -> ThresholdGrid:
    """Ten equidistant thresholds from 1/num_classes to 1.0 inclusive.

    Thresholds below 1/num_classes are extraneous: a max over num_classes
    probabilities summing to one cannot fall below that floor.
    """
    if num_classes < 2:
        raise ConfigError(f"num_classes must be >= 2, got {num_classes}")
    values = np.linspace(1.0 / num_classes, 1.0, GRID_SIZE)
    return ThresholdGrid(values=tuple(float(v) for v in values))


def first_exit(confidences: np.ndarray, alpha: float, from_layer: int, to_layer: int) -> int | None:
    """Smallest 1-indexed layer in [from_layer, to_layer] with C_i >= alpha.

    Exactly-at-threshold counts as an exit. Returns None when no layer in
    the range crosses.
    """
    for layer in range(from_layer, to_layer + 1):
        if confidences[layer - 1] >= alpha:
            return layer
    return None


def cascade_outcome(trace: SampleTrace, alpha: float, cfg: DeploymentConfig) -> InferenceOutcome:
    """Run the three-tier cascade on a trace.

    Mobile wins if any exit in [1, m] crosses alpha; otherwise edge if any
    exit in [m+1, n] crosses; otherwise the sample concludes at the cloud's
    final layer regardless of confidence.
    """
    layer = first_exit(trace.confidences, alpha, 1, cfg.m)
    if layer is not None:
        device = Device.MOBILE
    else:
        layer = first_exit(trace.confidences, alpha, cfg.m + 1, cfg.n) if cfg.n > cfg.m else None
        if layer is not None:
            device = Device.EDGE
        else:
            device = Device.CLOUD
            layer = cfg.l
    prediction = trace.prediction_at(layer)
    return InferenceOutcome(
        device=device,
        exit_layer=layer,
        confidence=trace.confidence_at(layer),
        prediction=prediction,
        correct=prediction == trace.label,
    )


def empirical_expected_reward(
    traces: TraceSet, alpha: float, cfg: DeploymentConfig, costs: CostModel
) -> float:
    """Sample mean of the cascade reward, summed left-to-right in stream order."""
    if len(traces) == 0:
        raise ConfigError("cannot estimate expected reward on an empty trace set")
    total = 0.0
    for trace in traces:
        total += reward(cascade_outcome(trace, alpha, cfg), costs)
    return total / len(traces)


@dataclass(frozen=True)
class CalibrationResult:
    """Chosen threshold plus the full reward profile over the grid."""

    alpha_star: float
    grid: tuple[float, ...]
    expected_reward: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "alpha_star": self.alpha_star,
            "grid": list(self.grid),
            "expected_reward": list(self.expected_reward),
        }


def calibrate_threshold(
    traces: TraceSet, grid: ThresholdGrid, cfg: DeploymentConfig, costs: CostModel
) -> CalibrationResult:
    """Pick the grid threshold maximizing the empirical expected reward.

    Ties break to the smallest threshold, which also makes the chosen
    threshold non-increasing as the cloud offload fee grows.
    """
    if len(traces) == 0:
        raise ConfigError("cannot calibrate on an empty trace set")
    profile = [empirical_expected_reward(traces, alpha, cfg, costs) for alpha in grid.values]
    best = 0
    for k in range(1, len(profile)):
        if profile[k] > profile[best]:
            best = k
    return CalibrationResult(
        alpha_star=grid.values[best],
        grid=grid.values,
        expected_reward=tuple(profile),
    )


def save_calibration(result: CalibrationResult, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(result.to_dict(), indent=2) + "\n", encoding="utf-8")
    return p


def load_calibration(path: str | Path) -> CalibrationResult:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    return CalibrationResult(
        alpha_star=float(d["alpha_star"]),
        grid=tuple(float(v) for v in d["grid"]),
        expected_reward=tuple(float(v) for v in d["expected_reward"]),
    )
