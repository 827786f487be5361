"""Nearest-centroid device assignment, fixed and adaptive.

A sample's embedding is compared against the defined pool centroids; the
nearest pool decides the device (easy -> mobile, moderate -> edge,
hard -> cloud). The fixed variant never touches the centroids. The
adaptive variant classifies against the pre-update state, then folds the
embedding into the chosen pool's running mean:

    P <- (n * P + x) / (n + 1),  n <- n + 1

No labels are consulted and nothing is ever forgotten, so the update rate
decays as 1/n as a pool grows.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .costs import ConfigError, Device
from .pools import DEVICE_TO_POOL, POOL_LABELS, POOL_TO_DEVICE, PoolState, load_pools, save_pools
from .traces import SampleTrace

DISTANCE_METRICS = ("sq_euclidean", "cosine")


class RoutingMode(enum.Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class Assignment:
    """Routing decision for one sample, with the distances that produced it.

    ``distances`` has an entry per defined centroid only; baseline policies
    that bypass the centroids leave it empty.
    """

    sample_id: str
    device: Device
    distances: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "distances", MappingProxyType(dict(self.distances)))


def _distance(x: np.ndarray, centroid: np.ndarray, metric: str) -> float:
    if metric == "sq_euclidean":
        diff = x - centroid
        return float(np.dot(diff, diff))
    if metric == "cosine":
        nx = float(np.linalg.norm(x))
        nc = float(np.linalg.norm(centroid))
        if nx == 0.0 or nc == 0.0:
            return 1.0
        return 1.0 - float(np.dot(x, centroid)) / (nx * nc)
    raise ConfigError(f"unknown distance metric {metric!r}; expected one of {DISTANCE_METRICS}")


def classify_embedding(
    x_e: np.ndarray,
    state: PoolState,
    metric: str = "sq_euclidean",
    sample_id: str = "",
) -> Assignment:
    """Assign an embedding to the nearest defined pool centroid.

    Ties break by pool priority easy > moderate > hard, preferring the
    cheaper device at equal distance. Raises ConfigError when no centroid
    is defined.
    """
    x = np.asarray(x_e, dtype=np.float64)
    distances: dict[str, float] = {}
    best_label: str | None = None
    for label in POOL_LABELS:
        centroid = state.centroid(label)
        if centroid is None:
            continue
        distances[label] = _distance(x, centroid, metric)
        if best_label is None or distances[label] < distances[best_label]:
            best_label = label
    if best_label is None:
        raise ConfigError("cannot classify: all pool centroids are undefined")
    return Assignment(sample_id=sample_id, device=POOL_TO_DEVICE[best_label], distances=distances)


def route_fixed(trace: SampleTrace, state: PoolState, metric: str = "sq_euclidean") -> Assignment:
    """Nearest-centroid assignment against immutable centroids."""
    return classify_embedding(trace.embedding, state, metric, sample_id=trace.id)


def route_adaptive(
    trace: SampleTrace, state: PoolState, metric: str = "sq_euclidean"
) -> tuple[Assignment, PoolState]:
    """Classify against the pre-update state, then update the chosen pool's
    running mean with this embedding. Only the chosen pool changes."""
    assignment = classify_embedding(trace.embedding, state, metric, sample_id=trace.id)
    label = DEVICE_TO_POOL[assignment.device]
    n = state.count(label)
    centroid = state.centroid(label)
    updated = (n * centroid + trace.embedding) / (n + 1)
    return assignment, state.with_pool(label, updated, n + 1)


@dataclass
class RouterState:
    """Mutable routing front-end for the streaming simulator.

    Fixed mode is read-only and safe to share; adaptive mode must see
    samples one at a time in arrival order (single-writer).
    """

    pools: PoolState
    mode: RoutingMode
    metric: str = "sq_euclidean"

    def route(self, trace: SampleTrace) -> Assignment:
        if self.mode is RoutingMode.FIXED:
            return route_fixed(trace, self.pools, self.metric)
        assignment, self.pools = route_adaptive(trace, self.pools, self.metric)
        return assignment


def initialize_router(
    pools: PoolState, mode: RoutingMode, metric: str = "sq_euclidean"
) -> RouterState:
    """Router over calibration-time pools; counts start at the pool sizes."""
    if metric not in DISTANCE_METRICS:
        raise ConfigError(f"unknown distance metric {metric!r}; expected one of {DISTANCE_METRICS}")
    if not pools.defined_labels():
        raise ConfigError("cannot initialize router: every pool is empty")
    return RouterState(pools=pools, mode=mode, metric=metric)


def save_router(router: RouterState, path: str | Path, embedding_dim: int | None = None) -> Path:
    """Snapshot: the pool file plus mode and distance metric."""
    p = Path(path)
    save_pools(router.pools, p, embedding_dim)
    payload = json.loads(p.read_text(encoding="utf-8"))
    payload["mode"] = router.mode.value
    payload["distance"] = router.metric
    p.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return p


def load_router(path: str | Path) -> RouterState:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    pools = load_pools(path)
    return initialize_router(pools, RoutingMode(d["mode"]), d["distance"])
