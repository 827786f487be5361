"""Trace data model and on-disk format.

A trace set freezes a multi-exit model's per-sample behavior (embedding,
per-layer confidences and predictions, gold label) so the routing engine
never needs a live model. Layers are 1-indexed in the public API; the
stored arrays are 0-indexed, converted at the boundary.

On disk a trace set is a directory holding ``manifest.json`` and
``records.jsonl`` (one JSON object per sample, UTF-8, full float
precision). Sample order in the file is the stream arrival order and is
preserved verbatim; drift scenarios depend on it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

MANIFEST_FILENAME = "manifest.json"
RECORDS_FILENAME = "records.jsonl"

VALID_SPLITS = ("train", "validation", "test")


class TraceFormatError(Exception):
    """Structural problem in trace files (bad JSON, shape mismatch, duplicate id)."""


class TraceDataError(Exception):
    """Trace content violates a data-model invariant."""


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TraceManifest:
    """Shared shape metadata for a trace set."""

    num_layers: int
    num_classes: int
    embedding_dim: int
    dataset_name: str
    split: str

    def __post_init__(self):
        if self.num_layers < 1:
            raise TraceDataError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.num_classes < 2:
            raise TraceDataError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.embedding_dim < 1:
            raise TraceDataError(f"embedding_dim must be >= 1, got {self.embedding_dim}")
        if self.split not in VALID_SPLITS:
            raise TraceDataError(f"split must be one of {VALID_SPLITS}, got {self.split!r}")

    def to_dict(self) -> dict:
        return {
            "num_layers": self.num_layers,
            "num_classes": self.num_classes,
            "embedding_dim": self.embedding_dim,
            "dataset_name": self.dataset_name,
            "split": self.split,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TraceManifest":
        try:
            return cls(
                num_layers=int(d["num_layers"]),
                num_classes=int(d["num_classes"]),
                embedding_dim=int(d["embedding_dim"]),
                dataset_name=str(d["dataset_name"]),
                split=str(d["split"]),
            )
        except KeyError as exc:
            raise TraceFormatError(f"manifest missing field {exc}") from exc


@dataclass(frozen=True)
class SampleTrace:
    """One sample's frozen multi-exit behavior.

    ``confidences[i-1]`` is the max-class softmax probability at exit
    classifier i; ``predictions[i-1]`` the argmax class there. Arrays are
    read-only.
    """

    id: str
    embedding: np.ndarray
    confidences: np.ndarray
    predictions: np.ndarray
    label: int

    def __post_init__(self):
        object.__setattr__(self, "embedding", _frozen(self.embedding, np.float64))
        object.__setattr__(self, "confidences", _frozen(self.confidences, np.float64))
        object.__setattr__(self, "predictions", _frozen(self.predictions, np.int64))

    def confidence_at(self, layer: int) -> float:
        """Confidence at 1-indexed exit ``layer``."""
        return float(self.confidences[layer - 1])

    def prediction_at(self, layer: int) -> int:
        """Predicted class at 1-indexed exit ``layer``."""
        return int(self.predictions[layer - 1])


@dataclass(frozen=True)
class TraceSet:
    """An ordered, immutable collection of traces under one manifest."""

    manifest: TraceManifest
    samples: tuple[SampleTrace, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


@dataclass(frozen=True)
class Violation:
    """One failed invariant, as data (not an exception)."""

    sample_id: str
    invariant: str

    def __str__(self) -> str:
        return f"{self.sample_id}: {self.invariant}"


def validate_traces(traces: TraceSet) -> list[Violation]:
    """Check every sample against the manifest; return all violations found."""
    m = traces.manifest
    lo = 1.0 / m.num_classes
    violations: list[Violation] = []
    seen: set[str] = set()
    for s in traces.samples:
        if s.id in seen:
            violations.append(Violation(s.id, "duplicate id"))
        seen.add(s.id)
        if s.embedding.shape != (m.embedding_dim,):
            violations.append(
                Violation(s.id, f"embedding dimension {s.embedding.shape} != ({m.embedding_dim},)")
            )
        if s.confidences.shape != (m.num_layers,):
            violations.append(
                Violation(s.id, f"confidences length {s.confidences.shape[0]} != {m.num_layers}")
            )
        else:
            if np.any(s.confidences < lo):
                violations.append(Violation(s.id, f"C_i below 1/|C| = {lo}"))
            if np.any(s.confidences > 1.0):
                violations.append(Violation(s.id, "C_i above 1.0"))
            if not np.all(np.isfinite(s.confidences)):
                violations.append(Violation(s.id, "non-finite confidence"))
        if s.predictions.shape != (m.num_layers,):
            violations.append(
                Violation(s.id, f"predictions length {s.predictions.shape[0]} != {m.num_layers}")
            )
        elif np.any((s.predictions < 0) | (s.predictions >= m.num_classes)):
            violations.append(Violation(s.id, "prediction out of class range"))
        if not 0 <= s.label < m.num_classes:
            violations.append(Violation(s.id, "label out of range"))
    return violations


def _record_to_sample(obj: dict, manifest: TraceManifest, line_no: int) -> SampleTrace:
    for field in ("id", "embedding", "confidences", "predictions", "label"):
        if field not in obj:
            raise TraceFormatError(f"line {line_no}: record missing field {field!r}")
    if len(obj["embedding"]) != manifest.embedding_dim:
        raise TraceFormatError(
            f"line {line_no}: embedding has {len(obj['embedding'])} components, "
            f"manifest declares d={manifest.embedding_dim}"
        )
    if len(obj["confidences"]) != manifest.num_layers:
        raise TraceFormatError(
            f"line {line_no}: {len(obj['confidences'])} confidences, "
            f"manifest declares l={manifest.num_layers}"
        )
    if len(obj["predictions"]) != manifest.num_layers:
        raise TraceFormatError(
            f"line {line_no}: {len(obj['predictions'])} predictions, "
            f"manifest declares l={manifest.num_layers}"
        )
    return SampleTrace(
        id=str(obj["id"]),
        embedding=obj["embedding"],
        confidences=obj["confidences"],
        predictions=obj["predictions"],
        label=int(obj["label"]),
    )


def load_traces(path: str | Path) -> TraceSet:
    """Load and fully validate a trace set from a directory.

    Raises TraceFormatError for structural problems (with the offending
    line number) and TraceDataError if any loaded sample violates a
    data-model invariant.
    """
    root = Path(path)
    manifest_path = root / MANIFEST_FILENAME
    records_path = root / RECORDS_FILENAME
    if not manifest_path.is_file():
        raise TraceFormatError(f"no manifest at {manifest_path}")
    if not records_path.is_file():
        raise TraceFormatError(f"no records file at {records_path}")

    try:
        manifest = TraceManifest.from_dict(json.loads(manifest_path.read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"manifest is not valid JSON: {exc}") from exc

    samples: list[SampleTrace] = []
    seen: dict[str, int] = {}
    with records_path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceFormatError(f"line {line_no}: malformed record: {exc}") from exc
            sample = _record_to_sample(obj, manifest, line_no)
            if sample.id in seen:
                raise TraceFormatError(
                    f"line {line_no}: duplicate id {sample.id!r} (first seen on line {seen[sample.id]})"
                )
            seen[sample.id] = line_no
            samples.append(sample)

    traces = TraceSet(manifest=manifest, samples=tuple(samples))
    violations = validate_traces(traces)
    if violations:
        head = "; ".join(str(v) for v in violations[:5])
        raise TraceDataError(f"{len(violations)} invariant violation(s): {head}")
    return traces


def write_traces(traces: TraceSet, path: str | Path) -> Path:
    """Write manifest.json + records.jsonl under ``path`` (created if absent)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    (root / MANIFEST_FILENAME).write_text(
        json.dumps(traces.manifest.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    with (root / RECORDS_FILENAME).open("w", encoding="utf-8") as fh:
        for s in traces.samples:
            fh.write(
                json.dumps(
                    {
                        "id": s.id,
                        "embedding": s.embedding.tolist(),
                        "confidences": s.confidences.tolist(),
                        "predictions": s.predictions.tolist(),
                        "label": s.label,
                    }
                )
                + "\n"
            )
    return root


def split_traces(
    traces: TraceSet,
    fractions: tuple[float, float, float],
    seed: int,
) -> tuple[TraceSet, TraceSet, TraceSet]:
    """Deterministically partition a set into train/validation/test subsets.

    Membership is drawn by a seeded permutation; within each subset the
    original stream order is preserved. Fractions must be positive and sum
    to 1. Raises TraceDataError when a subset would be empty.
    """
    if len(fractions) != 3:
        raise TraceDataError("fractions must have exactly three entries")
    if any(f <= 0 for f in fractions):
        raise TraceDataError(f"fractions must be positive, got {fractions}")
    if not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
        raise TraceDataError(f"fractions must sum to 1, got {sum(fractions)}")

    n = len(traces)
    cuts = [int(math.floor(c * n)) for c in np.cumsum(fractions[:2])]
    sizes = (cuts[0], cuts[1] - cuts[0], n - cuts[1])
    if any(size < 1 for size in sizes):
        raise TraceDataError(f"{n} samples cannot give each split >= 1 sample at {fractions}")

    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    buckets = (
        sorted(perm[: cuts[0]].tolist()),
        sorted(perm[cuts[0] : cuts[1]].tolist()),
        sorted(perm[cuts[1] :].tolist()),
    )
    out = []
    for name, idx in zip(VALID_SPLITS, buckets):
        manifest = replace(traces.manifest, split=name)
        out.append(TraceSet(manifest=manifest, samples=tuple(traces.samples[i] for i in idx)))
    return tuple(out)
