"""Small builders shared across test modules."""

from __future__ import annotations

import numpy as np

from tierroute import SampleTrace, TraceManifest, TraceSet


def manifest(l=12, c=2, d=4, split="validation"):
    return TraceManifest(
        num_layers=l, num_classes=c, embedding_dim=d, dataset_name="unit", split=split
    )


def trace(sid, confs, preds=None, label=0, embedding=None, d=4):
    confs = np.asarray(confs, dtype=float)
    l = confs.shape[0]
    if preds is None:
        preds = np.full(l, label, dtype=int)
    if embedding is None:
        embedding = np.zeros(d)
    return SampleTrace(
        id=sid, embedding=embedding, confidences=confs, predictions=preds, label=label
    )


def trace_set(samples, l=12, c=2, d=4, split="validation"):
    return TraceSet(manifest=manifest(l=l, c=c, d=d, split=split), samples=tuple(samples))


def ramp_confs(l, ramp, base=0.5, high=0.95):
    """base below the ramp layer, high from it onward."""
    return [high if i >= ramp else base for i in range(1, l + 1)]
