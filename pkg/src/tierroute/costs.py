"""Cost parameters and per-sample reward/cost arithmetic.

All quantities are dimensionless cost units normalized to the cheapest
per-layer rate. The reward of an inference is the confidence obtained at
the exit minus everything paid to obtain it:

    mobile exit at layer i:  C_i - lambda_mobile * i
    edge exit at layer i:    C_i - lambda_edge * i - offload_edge
    cloud (final layer l):   C_l - offload_cloud - cloud_charge

The cloud branch carries no per-layer term; cloud compute is absorbed
into the flat ``cloud_charge``. ``monetary_cost`` is the same accounting
without the confidence term, so reward + cost == confidence always.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path


class ConfigError(Exception):
    """Invalid deployment, cost, or run configuration."""


class Device(enum.Enum):
    MOBILE = "mobile"
    EDGE = "edge"
    CLOUD = "cloud"


@dataclass(frozen=True)
class CostModel:
    """Per-layer processing rates, one-time offload fees, and the cloud bill."""

    lambda_mobile: float
    lambda_edge: float
    offload_edge: float
    offload_cloud: float
    cloud_charge: float

    def __post_init__(self):
        for name in ("lambda_mobile", "lambda_edge", "offload_edge", "offload_cloud", "cloud_charge"):
            value = getattr(self, name)
            if value < 0:
                raise ConfigError(f"{name} must be >= 0, got {value}")

    def scaled(self, factor: float) -> "CostModel":
        """All five fields multiplied by ``factor``."""
        return CostModel(
            lambda_mobile=self.lambda_mobile * factor,
            lambda_edge=self.lambda_edge * factor,
            offload_edge=self.offload_edge * factor,
            offload_cloud=self.offload_cloud * factor,
            cloud_charge=self.cloud_charge * factor,
        )

    def to_dict(self) -> dict:
        return {
            "lambda_mobile": self.lambda_mobile,
            "lambda_edge": self.lambda_edge,
            "offload_edge": self.offload_edge,
            "offload_cloud": self.offload_cloud,
            "cloud_charge": self.cloud_charge,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CostModel":
        try:
            return cls(**{k: float(d[k]) for k in (
                "lambda_mobile", "lambda_edge", "offload_edge", "offload_cloud", "cloud_charge")})
        except KeyError as exc:
            raise ConfigError(f"cost config missing field {exc}") from exc


def default_costs(lambda_unit: float) -> CostModel:
    """Standard cost structure expressed in multiples of the edge rate.

    Edge processing is the base unit: lambda_edge = u, lambda_mobile = 1.5u,
    offload_edge = 2.5u, offload_cloud = 3u. The cloud charge defaults to
    the base unit and is meant to be overridden per deployment.
    """
    if lambda_unit <= 0:
        raise ConfigError(f"lambda_unit must be > 0, got {lambda_unit}")
    return CostModel(
        lambda_mobile=1.5 * lambda_unit,
        lambda_edge=lambda_unit,
        offload_edge=2.5 * lambda_unit,
        offload_cloud=3.0 * lambda_unit,
        cloud_charge=lambda_unit,
    )


def load_costs(path: str | Path) -> CostModel:
    try:
        return CostModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cost config is not valid JSON: {exc}") from exc


def save_costs(costs: CostModel, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(costs.to_dict(), indent=2) + "\n", encoding="utf-8")
    return p


@dataclass(frozen=True)
class InferenceOutcome:
    """Where a sample concluded and what the classifier there said.

    ``exit_layer`` is 1-indexed. Callers are responsible for the device /
    layer consistency (mobile exits within the mobile slice, cloud at the
    final layer); this type does not know the deployment split.
    """

    device: Device
    exit_layer: int
    confidence: float
    prediction: int
    correct: bool


def reward(outcome: InferenceOutcome, costs: CostModel) -> float:
    """Confidence at the exit minus the cost paid to reach it."""
    if outcome.device is Device.MOBILE:
        return outcome.confidence - costs.lambda_mobile * outcome.exit_layer
    if outcome.device is Device.EDGE:
        return outcome.confidence - costs.lambda_edge * outcome.exit_layer - costs.offload_edge
    return outcome.confidence - costs.offload_cloud - costs.cloud_charge


def monetary_cost(outcome: InferenceOutcome, costs: CostModel) -> float:
    """The cost terms alone: processing plus offload plus cloud bill."""
    if outcome.device is Device.MOBILE:
        return costs.lambda_mobile * outcome.exit_layer
    if outcome.device is Device.EDGE:
        return costs.lambda_edge * outcome.exit_layer + costs.offload_edge
    return costs.offload_cloud + costs.cloud_charge
