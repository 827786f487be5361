"""Synthetic trace scenarios with planted difficulty structure.

Each sample draws a difficulty tier (easy/moderate/hard), an embedding
from that tier's Gaussian cluster, and a confidence curve that ramps past
typical thresholds at a tier-specific layer: a logistic in the layer
index with bounded uniform noise, clamped to [1/|C|, 1]. Predictions are
near-chance before the ramp and correct with probability 1 - label_noise
after it; easy samples optionally lose a little accuracy at deep layers
(the overthinking effect that lets early exits beat the final layer).

An optional drift replaces the cluster means mid-stream, so routing
policies can be stress-tested against distribution shift.

RNG is numpy's default_rng (PCG64), seeded explicitly; generation is a
pure, platform-stable function of the config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .costs import ConfigError
from .traces import SampleTrace, TraceManifest, TraceSet

DIFFICULTIES = ("easy", "moderate", "hard")

RAMP_WIDTH = 0.6


@dataclass(frozen=True)
class DriftSpec:
    """Mid-stream distribution shift: from ``onset`` (0-indexed sample
    position) onward, embeddings are drawn around ``cluster_means``."""

    onset: int
    cluster_means: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class ScenarioConfig:
    num_samples: int
    num_layers: int
    num_classes: int
    embedding_dim: int
    cluster_means: tuple[tuple[float, ...], ...]
    cluster_spread: tuple[float, float, float]
    difficulty_mix: tuple[float, float, float]
    ramp_layers: tuple[int, int, int]
    label_noise: tuple[float, float, float]
    confidence_noise: float = 0.02
    overthink: float = 0.0
    overthink_after: int = 0
    drift: DriftSpec | None = None
    seed: int = 0
    dataset_name: str = "synthetic"
    split: str = "test"

    def __post_init__(self):
        if self.num_samples < 1:
            raise ConfigError("num_samples must be >= 1")
        if self.num_classes < 2:
            raise ConfigError("num_classes must be >= 2")
        if abs(sum(self.difficulty_mix) - 1.0) > 1e-9:
            raise ConfigError(f"difficulty_mix must sum to 1, got {sum(self.difficulty_mix)}")
        if any(p < 0 for p in self.difficulty_mix):
            raise ConfigError("difficulty_mix entries must be >= 0")
        if len(self.cluster_means) != 3:
            raise ConfigError("cluster_means must hold exactly three vectors")
        for mean in self.cluster_means:
            if len(mean) != self.embedding_dim:
                raise ConfigError(
                    f"cluster mean has {len(mean)} components, embedding_dim is {self.embedding_dim}"
                )
        if any(s <= 0 for s in self.cluster_spread):
            raise ConfigError("cluster_spread entries must be > 0")
        if any(not 1 <= r <= self.num_layers + 1 for r in self.ramp_layers):
            raise ConfigError("ramp_layers must lie in [1, num_layers + 1]")
        if any(not 0.0 <= e <= 1.0 for e in self.label_noise):
            raise ConfigError("label_noise entries must lie in [0, 1]")
        if self.drift is not None:
            if not 0 < self.drift.onset < self.num_samples:
                raise ConfigError("drift onset must lie strictly inside the stream")
            if len(self.drift.cluster_means) != 3:
                raise ConfigError("drift cluster_means must hold exactly three vectors")

    def to_dict(self) -> dict:
        d = {
            "num_samples": self.num_samples,
            "num_layers": self.num_layers,
            "num_classes": self.num_classes,
            "embedding_dim": self.embedding_dim,
            "cluster_means": [list(m) for m in self.cluster_means],
            "cluster_spread": list(self.cluster_spread),
            "difficulty_mix": list(self.difficulty_mix),
            "ramp_layers": list(self.ramp_layers),
            "label_noise": list(self.label_noise),
            "confidence_noise": self.confidence_noise,
            "overthink": self.overthink,
            "overthink_after": self.overthink_after,
            "drift": None,
            "seed": self.seed,
            "dataset_name": self.dataset_name,
            "split": self.split,
        }
        if self.drift is not None:
            d["drift"] = {
                "onset": self.drift.onset,
                "cluster_means": [list(m) for m in self.drift.cluster_means],
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        try:
            drift = None
            if d.get("drift") is not None:
                drift = DriftSpec(
                    onset=int(d["drift"]["onset"]),
                    cluster_means=tuple(tuple(float(x) for x in m) for m in d["drift"]["cluster_means"]),
                )
            return cls(
                num_samples=int(d["num_samples"]),
                num_layers=int(d["num_layers"]),
                num_classes=int(d["num_classes"]),
                embedding_dim=int(d["embedding_dim"]),
                cluster_means=tuple(tuple(float(x) for x in m) for m in d["cluster_means"]),
                cluster_spread=tuple(float(x) for x in d["cluster_spread"]),
                difficulty_mix=tuple(float(x) for x in d["difficulty_mix"]),
                ramp_layers=tuple(int(x) for x in d["ramp_layers"]),
                label_noise=tuple(float(x) for x in d["label_noise"]),
                confidence_noise=float(d.get("confidence_noise", 0.02)),
                overthink=float(d.get("overthink", 0.0)),
                overthink_after=int(d.get("overthink_after", 0)),
                drift=drift,
                seed=int(d.get("seed", 0)),
                dataset_name=str(d.get("dataset_name", "synthetic")),
                split=str(d.get("split", "test")),
            )
        except KeyError as exc:
            raise ConfigError(f"scenario config missing field {exc}") from exc


def load_scenario(path: str | Path) -> ScenarioConfig:
    try:
        return ScenarioConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario config is not valid JSON: {exc}") from exc


def save_scenario(config: ScenarioConfig, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8")
    return p


def planted_difficulty(sample_id: str) -> str:
    """Recover the generator's difficulty tier from a synthetic sample id."""
    tier = sample_id.rsplit("-", 1)[-1]
    if tier not in DIFFICULTIES:
        raise ValueError(f"sample id {sample_id!r} carries no planted difficulty")
    return tier


def _confidence_curve(rng, num_layers: int, base: float, ramp: int, noise: float) -> np.ndarray:
    # logistic in the layer index, midpoint one layer before the ramp so
    # C(ramp) lands around base + 0.84 * (1 - base)
    layers = np.arange(1, num_layers + 1, dtype=np.float64)
    curve = base + (1.0 - base) / (1.0 + np.exp(-(layers - (ramp - 1)) / RAMP_WIDTH))
    curve = curve + rng.uniform(-noise, noise, size=num_layers)
    return np.clip(curve, base, 1.0)


def generate(config: ScenarioConfig) -> TraceSet:
    """Materialize a scenario into a trace set; deterministic given the seed."""
    rng = np.random.default_rng(config.seed)
    c = config.num_classes
    l = config.num_layers
    base = 1.0 / c
    means = np.asarray(config.cluster_means, dtype=np.float64)
    drifted = None
    if config.drift is not None:
        drifted = np.asarray(config.drift.cluster_means, dtype=np.float64)
        if drifted.shape != means.shape:
            raise ConfigError("drift cluster_means must match embedding_dim")

    samples = []
    for i in range(config.num_samples):
        tier = int(rng.choice(3, p=config.difficulty_mix))
        label = int(rng.integers(c))
        active_means = means
        if drifted is not None and i >= config.drift.onset:
            active_means = drifted
        embedding = active_means[tier] + config.cluster_spread[tier] * rng.standard_normal(
            config.embedding_dim
        )
        confidences = _confidence_curve(
            rng, l, base, config.ramp_layers[tier], config.confidence_noise
        )
        correct_draws = rng.uniform(size=l)
        wrong_classes = (label + 1 + rng.integers(c - 1, size=l)) % c
        predictions = np.empty(l, dtype=np.int64)
        for layer in range(1, l + 1):
            if layer < config.ramp_layers[tier]:
                p_correct = base
            else:
                p_correct = 1.0 - config.label_noise[tier]
                if tier == 0 and config.overthink_after and layer > config.overthink_after:
                    p_correct -= config.overthink
            predictions[layer - 1] = (
                label if correct_draws[layer - 1] < p_correct else wrong_classes[layer - 1]
            )
        samples.append(
            SampleTrace(
                id=f"s{i:05d}-{DIFFICULTIES[tier]}",
                embedding=embedding,
                confidences=confidences,
                predictions=predictions,
                label=label,
            )
        )

    manifest = TraceManifest(
        num_layers=l,
        num_classes=c,
        embedding_dim=config.embedding_dim,
        dataset_name=config.dataset_name,
        split=config.split,
    )
    return TraceSet(manifest=manifest, samples=tuple(samples))


def _line_clusters(levels: tuple[float, float, float], dim: int) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(v) for v in np.full(dim, level)) for level in levels)


def default_scenario() -> ScenarioConfig:
    """The repo's canonical benchmark: 2,000 samples, 12 exit layers, two
    classes, 16-dim embeddings, well-separated difficulty clusters, and a
    mild overthinking effect at deep layers for easy samples."""
    return ScenarioConfig(
        num_samples=2000,
        num_layers=12,
        num_classes=2,
        embedding_dim=16,
        cluster_means=_line_clusters((0.0, 8.0, 16.0), 16),
        cluster_spread=(1.0, 1.0, 1.0),
        difficulty_mix=(0.5, 0.3, 0.2),
        ramp_layers=(1, 4, 11),
        label_noise=(0.02, 0.04, 0.12),
        confidence_noise=0.02,
        overthink=0.05,
        overthink_after=6,
        drift=None,
        seed=42,
    )


def drift_scenario() -> ScenarioConfig:
    """Default clusters for the first 500 samples, then every cluster slides
    toward the cheaper end of the line. The drifted moderate and hard
    clusters straddle the stale decision boundaries, so fixed centroids
    misroute a tail of each while tracking centroids recover."""
    base = default_scenario()
    return replace(
        base,
        drift=DriftSpec(
            onset=500,
            cluster_means=_line_clusters((-1.0, 4.2, 12.4), base.embedding_dim),
        ),
    )
