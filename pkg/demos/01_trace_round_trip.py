"""Generate a small synthetic trace set, write it to disk, load it back,
and poke at what a trace actually contains."""

from dataclasses import replace
from pathlib import Path

from tierroute import load_traces, validate_traces, write_traces
from tierroute.synth import default_scenario, generate

out = Path(__file__).parent / "out" / "traces_small"

scenario = replace(default_scenario(), num_samples=50)
traces = generate(scenario)
write_traces(traces, out)
print(f"wrote {len(traces)} traces to {out}")

reloaded = load_traces(out)
violations = validate_traces(reloaded)
print(f"reloaded {len(reloaded)} traces, {len(violations)} invariant violations")

sample = reloaded.samples[0]
print(f"\nfirst sample: id={sample.id} label={sample.label}")
print("layer  confidence  prediction")
for layer in range(1, reloaded.manifest.num_layers + 1):
    print(f"{layer:5d}  {sample.confidence_at(layer):10.4f}  {sample.prediction_at(layer):10d}")
print("\nconfidence ramps with depth; the ramp layer depends on the planted difficulty")
print(f"(this one is '{sample.id.rsplit('-', 1)[-1]}')")
