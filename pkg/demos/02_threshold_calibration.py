"""Calibrate the exit threshold: sweep the candidate grid and watch the
expected reward trade confidence against processing and offload costs."""

from tierroute import (
    DeploymentConfig,
    calibrate_threshold,
    split_traces,
    threshold_grid,
)
from tierroute.benchmarks import benchmark_costs
from tierroute.synth import default_scenario, generate

traces = generate(default_scenario())
_, val, _ = split_traces(traces, (0.8, 0.1, 0.1), seed=42)
cfg = DeploymentConfig(m=3, n=6, l=12)
costs = benchmark_costs()

result = calibrate_threshold(val, threshold_grid(2), cfg, costs)

print(f"calibrating on {len(val)} validation traces, m={cfg.m}, n={cfg.n}, l={cfg.l}")
print(f"{'alpha':>8}  {'E[reward]':>10}")
for alpha, r in zip(result.grid, result.expected_reward):
    bar = "#" * int((r - min(result.expected_reward)) * 200)
    star = "  <-- alpha*" if alpha == result.alpha_star else ""
    print(f"{alpha:8.4f}  {r:10.4f}  {bar}{star}")

print(f"\nalpha* = {result.alpha_star:.4f}")
print("below the peak, cheap thresholds exit everything at layer 1 on weak confidence;")
print("above it, alpha=1.0 sends every sample to the cloud and pays the full bill")
