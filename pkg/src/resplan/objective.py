"""Weighted latency/accuracy objective and per-device feasibility checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .costs import Assignment, CostBreakdown, evaluate_assignment
from .errors import UnprofiledDropSet
from .fleet import DEFAULT_RATE_LO, EnergyParams, Fleet, RateMatrix
from .graph import ResNetGraph, compute_load, memory_load, output_bits
from .profile import AccuracyProfile, g_lookup

WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ObjectiveWeights:
    """Objective weights plus the two scalars the objective needs as context.

    alpha scales normalized latency, beta scales accuracy loss; they must sum
    to one.  latency_ref converts seconds into a unitless [0, 1] score and
    accuracy_threshold is the feasibility floor on mean accuracy.
    """

    alpha: float
    beta: float
    latency_ref: float
    accuracy_threshold: float = 0.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if abs(self.alpha + self.beta - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"alpha + beta must equal 1, got {self.alpha + self.beta!r}")
        if not self.latency_ref > 0:
            raise ValueError("latency_ref must be > 0")
        if not 0.0 <= self.accuracy_threshold <= 1.0:
            raise ValueError("accuracy_threshold must lie in [0, 1]")


def default_latency_ref(graph: ResNetGraph, fleet: Fleet,
                        rate_lo: float = DEFAULT_RATE_LO) -> float:
    """Worst-case single-request latency: the whole network on the slowest
    device with every inter-block tensor crossing the slowest link.

    Each block feeds at most one downstream transfer per request, so this
    bounds any reachable per-request latency and keeps the normalized
    latency term inside [0, 1].
    """
    e_min = float(fleet.mult_rates.min())
    comp = sum(compute_load(b) for b in graph.blocks) / e_min
    tx = sum(output_bits(b, graph.weight_bytes) for b in graph.blocks[:-1]) / rate_lo
    return comp + tx


def accuracy_term(assign: Assignment, profile: AccuracyProfile) -> float:
    """Mean profiled accuracy over requests; baseline when there are none."""
    if assign.n_requests == 0:
        return profile.baseline
    total = 0.0
    for r in range(assign.n_requests):
        acc = g_lookup(profile, assign.y[r])
        if acc is None:
            drop = tuple(int(j) for j in np.flatnonzero(assign.y[r] == 0) + 1)
            raise UnprofiledDropSet(r, drop)
        total += acc
    return total / assign.n_requests


def objective_value(latency: float, accuracy: float, n_requests: int,
                    weights: ObjectiveWeights) -> float:
    """Combine precomputed latency and accuracy into the weighted score."""
    if n_requests == 0:
        lat_term = 0.0
    else:
        lat_term = latency / (n_requests * weights.latency_ref)
    return weights.alpha * lat_term + weights.beta * (1.0 - accuracy)


def objective(assign: Assignment, graph: ResNetGraph, fleet: Fleet,
              rates: RateMatrix, weights: ObjectiveWeights,
              profile: AccuracyProfile) -> float:
    """Weighted sum of normalized total latency and mean accuracy loss."""
    acc = accuracy_term(assign, profile)
    bd = evaluate_assignment(assign, graph, fleet, rates, EnergyParams())
    return objective_value(bd.total_latency, acc, assign.n_requests, weights)


@dataclass(frozen=True)
class FeasibilityReport:
    """Constraint-by-constraint verdict with per-device margins.

    Margins are cap minus use, so negative means violated.  accuracy is None
    when some request keeps an unprofiled drop set; the accuracy margin is
    then reported as minus the threshold.
    """

    feasible: bool
    violations: tuple[str, ...]
    coverage_ok: bool
    accuracy: Optional[float]
    accuracy_margin: float
    memory_margin: np.ndarray
    compute_margin: np.ndarray
    energy_margin: np.ndarray

    def as_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "violations": list(self.violations),
            "coverage_ok": self.coverage_ok,
            "accuracy": self.accuracy,
            "accuracy_margin": self.accuracy_margin,
            "memory_margin": [float(v) for v in self.memory_margin],
            "compute_margin": [float(v) for v in self.compute_margin],
            "energy_margin": [float(v) for v in self.energy_margin],
        }


def check_constraints(assign: Assignment, graph: ResNetGraph, fleet: Fleet,
                      rates: RateMatrix, energy: EnergyParams,
                      weights: ObjectiveWeights, profile: AccuracyProfile,
                      strict: bool = True,
                      memory_mode: str = "inputs") -> FeasibilityReport:
    """Check coverage, per-device budgets, and the accuracy floor.

    strict requires exactly one host per kept block; the relaxed form allows
    several (costs then count each host's copy).  Entries of x under dropped
    blocks are ignored throughout.  Drop sets must be bridgeable; callers
    screen candidate drop sets against the skip topology beforehand.
    """
    violations: list[str] = []

    cover = assign.x.sum(axis=1)  # (R, M) hosts per block
    kept = assign.y == 1
    uncovered = kept & (cover == 0)
    for r, j in zip(*np.nonzero(uncovered)):
        violations.append(f"request {r}: block {j + 1} is kept but has no host")
    if strict:
        multi = kept & (cover > 1)
        for r, j in zip(*np.nonzero(multi)):
            violations.append(
                f"request {r}: block {j + 1} has {int(cover[r, j])} hosts (strict mode wants 1)"
            )
    coverage_ok = not violations

    mem_vec = np.array(
        [memory_load(b, memory_mode, graph.weight_bytes) for b in graph.blocks], dtype=float
    )
    bd = _breakdown_for_report(assign, graph, fleet, rates, energy, mem_vec, coverage_ok)

    memory_margin = fleet.memory_caps - bd.memory_use
    compute_margin = fleet.compute_caps - bd.compute_use
    energy_margin = fleet.energy_caps - bd.energy
    for name, margin, use, cap, unit in (
        ("memory", memory_margin, bd.memory_use, fleet.memory_caps, "B"),
        ("compute", compute_margin, bd.compute_use, fleet.compute_caps, "mults"),
        ("energy", energy_margin, bd.energy, fleet.energy_caps, "J"),
    ):
        for i in np.flatnonzero(margin < 0):
            violations.append(
                f"device {i + 1} {name}: {use[i]:.6g} {unit} exceeds cap {cap[i]:.6g} {unit}"
            )

    try:
        acc: Optional[float] = accuracy_term(assign, profile)
    except UnprofiledDropSet as exc:
        acc = None
        acc_margin = -weights.accuracy_threshold
        violations.append(f"{exc} (accuracy undefined, margin set to -threshold)")
    else:
        acc_margin = acc - weights.accuracy_threshold
        if acc_margin < 0:
            violations.append(
                f"mean accuracy {acc:.6g} below threshold {weights.accuracy_threshold:.6g}"
            )

    return FeasibilityReport(
        feasible=not violations,
        violations=tuple(violations),
        coverage_ok=coverage_ok,
        accuracy=acc,
        accuracy_margin=acc_margin,
        memory_margin=memory_margin,
        compute_margin=compute_margin,
        energy_margin=energy_margin,
    )


def _breakdown_for_report(assign, graph, fleet, rates, energy, mem_vec, resolved_ok):
    from .costs import _evaluate_arrays  # shared one-pass evaluator

    c = np.array([compute_load(b) for b in graph.blocks], dtype=float)
    bits = np.array([output_bits(b, graph.weight_bytes) for b in graph.blocks], dtype=float)
    if resolved_ok and assign.is_resolved():
        return _evaluate_arrays(assign, graph, fleet, rates, energy, c, mem_vec, bits)
    # Multi-host or uncovered candidates: charge every listed host for its
    # copy of the block and skip transfer accounting, which needs one host
    # per block to be defined.
    gated = assign.x * assign.y[:, None, :]
    load = np.einsum("rim,m->i", gated, c)
    mem_use = np.einsum("rim,m->i", gated, mem_vec)
    comp_time = load / fleet.mult_rates
    return CostBreakdown(
        total_latency=float(comp_time.sum()),
        comp_time=comp_time,
        tx_time=np.zeros(fleet.n_devices),
        energy=energy.p_compute * comp_time,
        memory_use=mem_use,
        compute_use=load,
        shared_bits=0.0,
        total_mults=float(load.sum()),
    )
