"""Easy/moderate/hard pools from cascade exit behavior.

A calibration sample that the cascade resolves on the mobile device is
easy, on the edge moderate, in the cloud hard. Each pool is summarized by
the arithmetic mean of its members' embeddings; those centroids are the
routing prototypes. Pools may be empty (the centroid is then undefined
and routing must skip it).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .costs import ConfigError, Device
from .exits import DeploymentConfig, cascade_outcome
from .traces import TraceSet

POOL_LABELS = ("easy", "moderate", "hard")

DEVICE_TO_POOL = {Device.MOBILE: "easy", Device.EDGE: "moderate", Device.CLOUD: "hard"}
POOL_TO_DEVICE = {"easy": Device.MOBILE, "moderate": Device.EDGE, "hard": Device.CLOUD}


@dataclass(frozen=True)
class PoolState:
    """Centroids and member counts for the three pools.

    A centroid is None exactly when its count is zero. Value type: updates
    produce new instances, so snapshots are free.
    """

    centroid_easy: np.ndarray | None
    centroid_moderate: np.ndarray | None
    centroid_hard: np.ndarray | None
    count_easy: int
    count_moderate: int
    count_hard: int

    def __post_init__(self):
        for label in POOL_LABELS:
            centroid, count = self.centroid(label), self.count(label)
            if (centroid is None) != (count == 0):
                raise ConfigError(f"{label} pool: centroid defined iff count > 0 (count={count})")
            if centroid is not None:
                arr = np.asarray(centroid, dtype=np.float64)
                arr.flags.writeable = False
                object.__setattr__(self, f"centroid_{label}", arr)

    def centroid(self, label: str) -> np.ndarray | None:
        return getattr(self, f"centroid_{label}")

    def count(self, label: str) -> int:
        return getattr(self, f"count_{label}")

    def defined_labels(self) -> tuple[str, ...]:
        return tuple(lb for lb in POOL_LABELS if self.centroid(lb) is not None)

    def total_count(self) -> int:
        return self.count_easy + self.count_moderate + self.count_hard

    def with_pool(self, label: str, centroid: np.ndarray, count: int) -> "PoolState":
        return replace(self, **{f"centroid_{label}": centroid, f"count_{label}": count})


def build_pools(
    traces: TraceSet, alpha: float, cfg: DeploymentConfig
) -> tuple[PoolState, dict[str, str]]:
    """Partition a calibration set by cascade device and average embeddings.

    Returns the pool state plus a membership map id -> pool label. Sums are
    accumulated sequentially in stream order, in double precision.
    """
    if len(traces) == 0:
        raise ConfigError("cannot build pools from an empty trace set")
    d = traces.manifest.embedding_dim
    sums = {label: np.zeros(d, dtype=np.float64) for label in POOL_LABELS}
    counts = {label: 0 for label in POOL_LABELS}
    membership: dict[str, str] = {}
    for trace in traces:
        label = DEVICE_TO_POOL[cascade_outcome(trace, alpha, cfg).device]
        sums[label] += trace.embedding
        counts[label] += 1
        membership[trace.id] = label
    kwargs = {}
    for label in POOL_LABELS:
        kwargs[f"count_{label}"] = counts[label]
        kwargs[f"centroid_{label}"] = sums[label] / counts[label] if counts[label] else None
    return PoolState(**kwargs), membership


def pool_summary(
    state: PoolState,
    traces: TraceSet | None = None,
    membership: Mapping[str, str] | None = None,
    alpha: float | None = None,
    cfg: DeploymentConfig | None = None,
) -> dict:
    """Counts, fractions, and centroids; optionally the mean exit confidence
    per pool when the originating traces and cascade parameters are given."""
    total = state.total_count()
    report: dict = {
        "counts": {lb: state.count(lb) for lb in POOL_LABELS},
        "fractions": {lb: (state.count(lb) / total if total else 0.0) for lb in POOL_LABELS},
        "centroids": {
            lb: (None if state.centroid(lb) is None else state.centroid(lb).tolist())
            for lb in POOL_LABELS
        },
    }
    if traces is not None and membership is not None and alpha is not None and cfg is not None:
        conf_sums = {lb: 0.0 for lb in POOL_LABELS}
        conf_counts = {lb: 0 for lb in POOL_LABELS}
        for trace in traces:
            label = membership.get(trace.id)
            if label is None:
                continue
            conf_sums[label] += cascade_outcome(trace, alpha, cfg).confidence
            conf_counts[label] += 1
        report["mean_confidence"] = {
            lb: (conf_sums[lb] / conf_counts[lb] if conf_counts[lb] else None)
            for lb in POOL_LABELS
        }
    return report


def export_embeddings(traces: TraceSet, membership: Mapping[str, str], path: str | Path) -> Path:
    """One CSV row per sample: id, pool label, embedding components.

    Floats are written with full round-trip precision. Raises ConfigError
    if a sample id is missing from the membership map.
    """
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    d = traces.manifest.embedding_dim
    with p.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "pool"] + [f"e{k}" for k in range(d)])
        for trace in traces:
            if trace.id not in membership:
                raise ConfigError(f"membership map has no entry for sample {trace.id!r}")
            writer.writerow(
                [trace.id, membership[trace.id]] + [repr(x) for x in trace.embedding.tolist()]
            )
    return p


def save_pools(state: PoolState, path: str | Path, embedding_dim: int | None = None) -> Path:
    """Pool file: ``{"d": int, "pools": {label: {"count", "centroid"}}}``."""
    if embedding_dim is None:
        defined = state.defined_labels()
        if not defined:
            raise ConfigError("cannot infer embedding dim from a state with no defined pools")
        embedding_dim = int(state.centroid(defined[0]).shape[0])
    payload = {
        "d": embedding_dim,
        "pools": {
            lb: {
                "count": state.count(lb),
                "centroid": None if state.centroid(lb) is None else state.centroid(lb).tolist(),
            }
            for lb in POOL_LABELS
        },
    }
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return p


def load_pools(path: str | Path) -> PoolState:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    kwargs = {}
    for lb in POOL_LABELS:
        entry = d["pools"][lb]
        centroid = entry["centroid"]
        kwargs[f"count_{lb}"] = int(entry["count"])
        kwargs[f"centroid_{lb}"] = None if centroid is None else np.asarray(centroid, dtype=np.float64)
    return PoolState(**kwargs)
