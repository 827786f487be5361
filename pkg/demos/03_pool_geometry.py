"""Build the easy/moderate/hard pools from exit behavior and export the
embeddings for external plotting (t-SNE, PCA, whatever you like)."""

from pathlib import Path

import numpy as np

from tierroute import (
    DeploymentConfig,
    build_pools,
    export_embeddings,
    pool_summary,
    split_traces,
)
from tierroute.synth import default_scenario, generate

out = Path(__file__).parent / "out"

traces = generate(default_scenario())
_, val, _ = split_traces(traces, (0.8, 0.1, 0.1), seed=42)
cfg = DeploymentConfig(m=3, n=6, l=12)
alpha = 0.9444444444444444

pools, membership = build_pools(val, alpha, cfg)
report = pool_summary(pools, val, membership, alpha, cfg)

print(f"pools from {len(val)} validation traces at alpha={alpha:.4f}")
print(f"{'pool':>10} {'count':>6} {'fraction':>9} {'mean conf':>10} {'centroid norm':>14}")
for label in ("easy", "moderate", "hard"):
    centroid = pools.centroid(label)
    norm = float(np.linalg.norm(centroid)) if centroid is not None else float("nan")
    conf = report["mean_confidence"][label]
    print(f"{label:>10} {report['counts'][label]:6d} {report['fractions'][label]:9.3f} "
          f"{conf:10.4f} {norm:14.3f}")

path = export_embeddings(val, membership, out / "pool_embeddings.csv")
print(f"\nwrote per-sample embeddings with pool labels to {path}")
print("pool centroids are the routing prototypes: an incoming embedding goes to")
print("the device whose pool average it sits closest to")
