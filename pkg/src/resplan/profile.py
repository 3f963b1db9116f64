"""Measured accuracy of the network under block drops, as a loadable lookup.

The profile is an input artifact: it maps each measured dropped-block set to
the accuracy the downsized network achieves.  Unmeasured sets are simply
absent, and absent means infeasible for the solver; nothing is interpolated.
The package ships a clearly labeled synthetic default because the original
measurements are not redistributable as data.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import yaml

from .errors import EmptyFeasibleSet, ParseError, ValidationError
from .graph import ResNetGraph, compute_load, memory_load

DropSet = frozenset[int]

DEFAULT_MAX_DROP = 2


@dataclass(frozen=True)
class ProfileEntry:
    """One measured scenario: which blocks were dropped and what accuracy remained."""

    drop_set: DropSet
    accuracy: float
    memory_gain_bytes: int | None = None
    compute_gain_mults: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "drop_set", frozenset(self.drop_set))
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValidationError(
                f"entry {sorted(self.drop_set)}: accuracy {self.accuracy} outside [0,1]"
            )
        if 1 in self.drop_set:
            raise ValidationError(
                f"entry {sorted(self.drop_set)}: the stem (block 1) cannot be dropped"
            )


@dataclass(frozen=True)
class AccuracyProfile:
    """Lookup from dropped-block set to measured accuracy.

    Always contains the empty set at the baseline accuracy; every other entry
    is capped by the baseline (dropping blocks never helps).
    """

    baseline: float
    entries: Mapping[DropSet, ProfileEntry]
    source_label: str
    n_blocks: int = 17
    max_drop: int = DEFAULT_MAX_DROP

    def __post_init__(self):
        if not 0.0 <= self.baseline <= 1.0:
            raise ValidationError(f"baseline {self.baseline} outside [0,1]")
        if frozenset() not in self.entries:
            raise ValidationError("profile must contain the empty drop set")
        if self.entries[frozenset()].accuracy != self.baseline:
            raise ValidationError("empty drop set accuracy must equal the baseline")
        for ds, entry in self.entries.items():
            if ds and entry.accuracy > self.baseline:
                raise ValidationError(
                    f"entry {sorted(ds)}: accuracy {entry.accuracy} exceeds "
                    f"baseline {self.baseline}"
                )
            if len(ds) > self.max_drop:
                raise ValidationError(
                    f"entry {sorted(ds)}: {len(ds)} blocks dropped, limit is {self.max_drop}"
                )
            if any(not 2 <= j <= self.n_blocks for j in ds):
                raise ValidationError(
                    f"entry {sorted(ds)}: block index outside 2..{self.n_blocks}"
                )

    def accuracy_for(self, drop_set: Sequence[int] | DropSet) -> float | None:
        entry = self.entries.get(frozenset(drop_set))
        return None if entry is None else entry.accuracy


def _as_mapping(doc) -> dict:
    if not isinstance(doc, dict):
        raise ParseError(f"profile document must be a mapping, got {type(doc).__name__}")
    return doc


def load_profile(source) -> AccuracyProfile:
    """Parse and validate a profile document.

    ``source`` is a path, a file object, or a YAML string.  Rejects duplicate
    drop sets and anything violating the profile invariants; errors name the
    offending entry.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
        if "\n" not in text and (text.endswith((".yaml", ".yml")) or "/" in text):
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
    try:
        doc = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as exc:
        raise ParseError(f"profile is not valid YAML: {exc}") from exc

    doc = _as_mapping(doc)
    known = {"source_label", "baseline", "n_blocks", "max_drop", "entries"}
    unknown = set(doc) - known
    if unknown:
        raise ParseError(f"unknown profile keys: {sorted(unknown)}")
    if "source_label" not in doc:
        raise ParseError("profile is missing the required source_label header")
    if "baseline" not in doc:
        raise ParseError("profile is missing the baseline accuracy")

    baseline = float(doc["baseline"])
    n_blocks = int(doc.get("n_blocks", 17))
    max_drop = int(doc.get("max_drop", DEFAULT_MAX_DROP))
    raw_entries = doc.get("entries", []) or []
    if not isinstance(raw_entries, list):
        raise ParseError("entries must be a list")

    entries: dict[DropSet, ProfileEntry] = {}
    for i, raw in enumerate(raw_entries):
        if not isinstance(raw, dict) or "drop" not in raw or "accuracy" not in raw:
            raise ParseError(f"entry #{i}: each entry needs 'drop' and 'accuracy'")
        bad = set(raw) - {"drop", "accuracy", "memory_gain_bytes", "compute_gain_mults"}
        if bad:
            raise ParseError(f"entry #{i}: unknown keys {sorted(bad)}")
        drop = raw["drop"]
        if drop is None:
            drop = []
        if not isinstance(drop, list):
            raise ParseError(f"entry #{i}: 'drop' must be a list of block ids")
        ds = frozenset(int(j) for j in drop)
        if len(ds) != len(drop):
            raise ValidationError(f"entry {sorted(drop)}: repeated block index")
        if ds in entries:
            raise ValidationError(f"entry {sorted(ds)}: duplicate drop set")
        entries[ds] = ProfileEntry(
            drop_set=ds,
            accuracy=float(raw["accuracy"]),
            memory_gain_bytes=(
                None if raw.get("memory_gain_bytes") is None
                else int(raw["memory_gain_bytes"])
            ),
            compute_gain_mults=(
                None if raw.get("compute_gain_mults") is None
                else int(raw["compute_gain_mults"])
            ),
        )

    if frozenset() not in entries:
        entries[frozenset()] = ProfileEntry(drop_set=frozenset(), accuracy=baseline)

    return AccuracyProfile(
        baseline=baseline,
        entries=entries,
        source_label=str(doc["source_label"]),
        n_blocks=n_blocks,
        max_drop=max_drop,
    )


def save_profile(profile: AccuracyProfile, path) -> None:
    """Write a profile back out in the documented schema (round-trips exactly)."""
    lines = [
        "# Accuracy profile: measured accuracy per dropped-block set.",
        f"source_label: {profile.source_label}",
        f"baseline: {profile.baseline!r}",
        f"n_blocks: {profile.n_blocks}",
        f"max_drop: {profile.max_drop}",
        "entries:",
    ]
    for ds in sorted(profile.entries, key=lambda s: (len(s), sorted(s))):
        entry = profile.entries[ds]
        lines.append(f"  - drop: {sorted(ds)}")
        lines.append(f"    accuracy: {entry.accuracy!r}")
        if entry.memory_gain_bytes is not None:
            lines.append(f"    memory_gain_bytes: {entry.memory_gain_bytes}")
        if entry.compute_gain_mults is not None:
            lines.append(f"    compute_gain_mults: {entry.compute_gain_mults}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def g_lookup(profile: AccuracyProfile, y: Sequence[int]) -> float | None:
    """Accuracy for a keep/drop vector, or None when the set was never measured.

    ``y[j-1] = 0`` drops block j; the stem must be kept.  None is a value, not
    an error: the caller decides that an unmeasured set is infeasible.
    """
    if len(y) != profile.n_blocks:
        raise ValueError(f"y has length {len(y)}, profile covers {profile.n_blocks} blocks")
    if not y[0]:
        raise ValueError("the stem (block 1) must be kept")
    dropped = frozenset(j + 1 for j, kept in enumerate(y) if not kept)
    return profile.accuracy_for(dropped)


def allowed_drop_sets(profile: AccuracyProfile, threshold: float) -> list[DropSet]:
    """Every measured drop set meeting the threshold, best accuracy first.

    Sorted by descending accuracy, then ascending size, then block ids, so the
    order is stable.  This is the solver's whole search space for y.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0,1]")
    if profile.baseline < threshold:
        raise EmptyFeasibleSet(
            f"baseline accuracy {profile.baseline} is below threshold {threshold}"
        )
    keep = [
        (entry.accuracy, len(ds), sorted(ds), ds)
        for ds, entry in profile.entries.items()
        if entry.accuracy >= threshold
    ]
    keep.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [t[3] for t in keep]


def cross_check_gains(profile: AccuracyProfile, graph: ResNetGraph,
                      memory_mode: str = "inputs", rel_tol: float = 0.01) -> None:
    """Verify any stated memory/compute gains against the block model.

    Gains are redundant with the graph, so stated values must agree with the
    derived ones to within ``rel_tol`` (profiles copied from reports are often
    rounded).  Raises ValidationError naming the first mismatching entry.
    """
    if graph.n_blocks != profile.n_blocks:
        raise ValidationError(
            f"profile covers {profile.n_blocks} blocks, graph has {graph.n_blocks}"
        )
    for ds in sorted(profile.entries, key=lambda s: (len(s), sorted(s))):
        entry = profile.entries[ds]
        checks = (
            ("memory_gain_bytes", entry.memory_gain_bytes,
             sum(memory_load(graph.block(j), memory_mode, graph.weight_bytes) for j in ds)),
            ("compute_gain_mults", entry.compute_gain_mults,
             sum(compute_load(graph.block(j)) for j in ds)),
        )
        for name, stated, derived in checks:
            if stated is None:
                continue
            if abs(stated - derived) > rel_tol * max(derived, 1):
                raise ValidationError(
                    f"entry {sorted(ds)}: {name} {stated} disagrees with derived {derived}"
                )


def build_synthetic_profile(graph: ResNetGraph, baseline: float = 0.9473,
                            single_accuracy: float = 0.90,
                            pair_accuracy: float = 0.82,
                            memory_mode: str = "inputs") -> AccuracyProfile:
    """The shipped placeholder profile: NOT measured anywhere.

    Every droppable block gets a single-drop entry, every adjacent droppable
    pair gets a pair entry, with flat placeholder accuracies chosen to clear
    the usual 80% gate.  Gains are derived from the block model.
    """
    droppable = [b.block_id for b in graph.blocks if b.droppable]
    sets: list[DropSet] = [frozenset()]
    sets += [frozenset({j}) for j in droppable]
    sets += [frozenset({j, j + 1}) for j in droppable if j + 1 in droppable]

    entries: dict[DropSet, ProfileEntry] = {}
    for ds in sets:
        if not ds:
            acc = baseline
        elif len(ds) == 1:
            acc = single_accuracy
        else:
            acc = pair_accuracy
        entries[ds] = ProfileEntry(
            drop_set=ds,
            accuracy=acc,
            memory_gain_bytes=(
                sum(memory_load(graph.block(j), memory_mode, graph.weight_bytes) for j in ds)
                or None
            ),
            compute_gain_mults=sum(compute_load(graph.block(j)) for j in ds) or None,
        )
    return AccuracyProfile(
        baseline=baseline,
        entries=entries,
        source_label="synthetic-default",
        n_blocks=graph.n_blocks,
    )
