"""Ablate one cost dimension at a time: raise the cloud offload fee (the
calibrated threshold backs off the cloud) or the mobile rate (traffic
leaves the mobile device)."""

from pathlib import Path

from tierroute import DeploymentConfig, default_costs, split_traces, sweep_cost
from tierroute.simulate import write_sweep
from tierroute.synth import default_scenario, generate

out = Path(__file__).parent / "out"

traces = generate(default_scenario())
_, val, test = split_traces(traces, (0.8, 0.1, 0.1), seed=42)
cfg = DeploymentConfig(m=3, n=6, l=12)
base = default_costs(0.1)


def show(dimension, values):
    points = sweep_cost(val, test, cfg, base, dimension, values)
    print(f"\nsweep {dimension} (others at standard ratios, unit 0.1)")
    print(f"{'value':>7} {'alpha*':>7} {'acc':>7} {'mean cost':>10} {'mobile':>7} {'cloud':>7}")
    for p in points:
        fr = p.report.device_fractions
        print(
            f"{p.value:7.2f} {p.alpha_star:7.3f} {p.report.accuracy:7.4f} "
            f"{p.report.mean_cost:10.4f} {fr['mobile']:7.2f} {fr['cloud']:7.2f}"
        )
    path = write_sweep(points, dimension, out / f"sweep_{dimension}.csv")
    print(f"trajectory written to {path}")


show("o_c", [0.05, 0.1, 0.2, 0.3, 0.45, 0.7, 1.1, 1.8])
show("lambda_m", [0.05, 0.1, 0.15, 0.25, 0.4])

print("\nhigher cloud offload fees push alpha* down (exit earlier, offload less);")
print("higher mobile rates push samples off the mobile device")
