"""Placement solvers over the joint drop/placement space.

``solve_ga`` is the workhorse: a genetic algorithm on a flat bit chromosome
(x placement bits, then y keep bits).  Raw chromosomes are rarely valid, so
every evaluation runs a canonicalization pipeline:

1. project each request's keep vector onto the profiled drop sets (the
   largest allowed subset of the proposed drops wins, so accuracy floors can
   never be violated by construction),
2. give any kept-but-unhosted block to the fastest device,
3. resolve blocks with several hosts by a forward pass that prefers the
   previous block's device and otherwise the best link from it.

Budget overruns are handled softly, as relative-violation penalties on the
objective.  ``solve_exact`` enumerates the same candidate space exhaustively
for small instances and is the reference the GA is compared against.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .costs import Assignment, CostBreakdown, evaluate_assignment
from .errors import (
    InfeasibleInstance,
    InstanceTooLarge,
    LengthMismatch,
    UnbridgeableDrop,
    UncoveredBlock,
)
from .fleet import EnergyParams, Fleet, RateMatrix
from .graph import ResNetGraph, compute_load, effective_edges, memory_load, output_bits
from .objective import FeasibilityReport, ObjectiveWeights, check_constraints, objective_value
from .profile import AccuracyProfile, allowed_drop_sets


@dataclass(frozen=True)
class GaConfig:
    """Genetic algorithm knobs; defaults follow the usual mid-size budget."""

    population_size: int = 100
    generations: int = 200
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None means 1 / chromosome length
    tournament_size: int = 3
    penalty_weight: float = 10.0
    elite: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")
        if self.penalty_weight <= 0:
            raise ValueError("penalty_weight must be > 0")
        if not 0 <= self.elite < self.population_size:
            raise ValueError("elite must be >= 0 and below population_size")


@dataclass(frozen=True)
class ExactLimits:
    """Guard rails for the exhaustive solver."""

    max_candidates: int = 200_000

    def __post_init__(self):
        if self.max_candidates < 1:
            raise ValueError("max_candidates must be >= 1")


@dataclass(frozen=True)
class SolveResult:
    """Best assignment found plus the audit trail around it.

    ``wall_time_s`` is informational and deliberately left out of
    ``as_dict`` so serialized results stay byte-identical across reruns.
    """

    assignment: Assignment
    objective: float
    accuracy: float
    feasible: bool
    report: FeasibilityReport
    breakdown: CostBreakdown
    solver: str
    generations: int
    evaluations: int
    history: tuple[float, ...]
    wall_time_s: float

    def as_dict(self) -> dict:
        hosts = []
        drops = []
        for r in range(self.assignment.n_requests):
            h = self.assignment.hosts(r)
            y_r = self.assignment.y[r]
            hosts.append([int(h[j]) + 1 if y_r[j] else None for j in range(len(y_r))])
            drops.append([int(j) + 1 for j in np.flatnonzero(y_r == 0)])
        return {
            "solver": self.solver,
            "objective": self.objective,
            "accuracy": self.accuracy,
            "feasible": self.feasible,
            "n_requests": self.assignment.n_requests,
            "drops": drops,
            "hosts": hosts,
            "total_latency_s": self.breakdown.total_latency,
            "shared_data_bits": self.breakdown.shared_bits,
            "total_computation_mults": self.breakdown.total_mults,
            "total_energy_j": float(self.breakdown.energy.sum()),
            "generations": self.generations,
            "evaluations": self.evaluations,
            "history": list(self.history),
            "report": self.report.as_dict(),
        }


def chromosome_length(n_requests: int, n_devices: int, n_blocks: int) -> int:
    """Flat bit count: placement bits first, then keep bits."""
    return n_requests * n_devices * n_blocks + n_requests * n_blocks


def encode(assign: Assignment) -> np.ndarray:
    """Assignment to flat chromosome (x bits then y bits)."""
    return np.concatenate([assign.x.ravel(), assign.y.ravel()]).astype(np.uint8)


def decode(bits, n_requests: int, n_devices: int, n_blocks: int) -> Assignment:
    """Chromosome to Assignment; the stem keep bit is forced on.

    Raises LengthMismatch when the bit count does not fit the dimensions.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    expect = chromosome_length(n_requests, n_devices, n_blocks)
    if bits.ndim != 1 or bits.size != expect:
        raise LengthMismatch(
            f"chromosome has {bits.size} bits, expected {expect} for "
            f"(requests={n_requests}, devices={n_devices}, blocks={n_blocks})"
        )
    split = n_requests * n_devices * n_blocks
    x = bits[:split].reshape(n_requests, n_devices, n_blocks)
    y = bits[split:].reshape(n_requests, n_blocks).copy()
    if n_requests:
        y[:, 0] = 1
    return Assignment(x, y)


@dataclass(frozen=True)
class _SetEntry:
    """Precomputed per-drop-set data the fast evaluator needs."""

    drop: tuple[int, ...]
    y: np.ndarray          # (M,) keep template
    kept0: np.ndarray      # 0-based kept block indices
    kept0_list: tuple[int, ...]
    src0: np.ndarray       # 0-based sources of deduplicated transfers
    dst0: np.ndarray       # 0-based destinations, sorted
    starts: np.ndarray     # reduceat group starts, one group per fed block
    tx_groups: tuple[tuple[int, tuple[int, ...]], ...]  # (dst0, srcs0) per fed block
    accuracy: float
    mask: int              # bit j-2 set when block j is dropped
    size: int


class _Evaluator:
    """Shared fast path: canonicalize raw chromosomes and score assignments.

    Scores must agree with the public cost functions exactly; tests compare
    the two on randomized instances.
    """

    def __init__(self, graph: ResNetGraph, fleet: Fleet, rates: RateMatrix,
                 profile: AccuracyProfile, weights: ObjectiveWeights,
                 energy: EnergyParams, n_requests: int,
                 penalty_weight: float = 10.0, memory_mode: str = "inputs"):
        self.graph = graph
        self.fleet = fleet
        self.rates = rates
        self.profile = profile
        self.n_requests = n_requests
        self.n_devices = fleet.n_devices
        self.n_blocks = graph.n_blocks
        self.weights = weights
        self.energy = energy
        self.penalty_weight = penalty_weight

        self.c = np.array([compute_load(b) for b in graph.blocks], dtype=float)
        self.m = np.array(
            [memory_load(b, memory_mode, graph.weight_bytes) for b in graph.blocks],
            dtype=float,
        )
        self.bits = np.array(
            [output_bits(b, graph.weight_bytes) for b in graph.blocks], dtype=float
        )
        self.e = fleet.mult_rates
        self.rho = rates.rho
        self.mem_caps = fleet.memory_caps
        self.comp_caps = fleet.compute_caps
        self.energy_caps = fleet.energy_caps
        self.fix_device = int(np.argmax(self.e))
        self.droppable_mask = np.array([b.droppable for b in graph.blocks], dtype=bool)

        # Scalar mirrors for the packed-bitmask fast path (small fleets only).
        self._fast = self.n_devices <= 63 and self.n_blocks <= 64
        self.e_list = self.e.tolist()
        self.rho_rows = [row.tolist() for row in self.rho]
        self.c_list = self.c.tolist()
        self.m_list = self.m.tolist()
        self.bits_list = self.bits.tolist()
        self.mem_caps_list = self.mem_caps.tolist()
        self.comp_caps_list = self.comp_caps.tolist()
        self.energy_caps_list = self.energy_caps.tolist()
        self._dev_w = (np.uint64(1) << np.arange(self.n_devices, dtype=np.uint64))
        drop_w = np.zeros(self.n_blocks, dtype=np.uint64)
        for j0 in range(1, self.n_blocks):
            if self.droppable_mask[j0]:
                drop_w[j0] = np.uint64(1) << np.uint64(j0 - 1)
        self._drop_w = drop_w

        self.entries = self._build_entries(profile, weights.accuracy_threshold)
        if not self.entries:
            raise InfeasibleInstance(
                "no profiled drop set is both above the accuracy threshold and "
                "bridgeable in this skip topology"
            )

    def _build_entries(self, profile, threshold):
        entries = []
        for ds in allowed_drop_sets(profile, threshold):
            drop = tuple(sorted(ds))
            if any(not self.droppable_mask[j - 1] for j in drop):
                continue  # profiled but not droppable in this graph
            y = np.ones(self.n_blocks, dtype=np.uint8)
            for j in drop:
                y[j - 1] = 0
            try:
                edges = effective_edges(self.graph, y)
            except UnbridgeableDrop:
                continue  # profiled but not executable under this topology
            seen: set[tuple[int, int]] = set()
            src0, dst0 = [], []
            for e in sorted(edges, key=lambda e: (e.dst, e.src)):
                if (e.src, e.dst) not in seen:
                    seen.add((e.src, e.dst))
                    src0.append(e.src - 1)
                    dst0.append(e.dst - 1)
            dst_arr = np.array(dst0, dtype=np.intp)
            starts = np.flatnonzero(np.diff(dst_arr, prepend=-1) != 0)
            groups: list[tuple[int, tuple[int, ...]]] = []
            for s, d in zip(src0, dst0):
                if groups and groups[-1][0] == d:
                    groups[-1] = (d, groups[-1][1] + (s,))
                else:
                    groups.append((d, (s,)))
            mask = 0
            for j in drop:
                mask |= 1 << (j - 2)
            kept0 = np.flatnonzero(y).astype(np.intp)
            entries.append(_SetEntry(
                drop=drop,
                y=y,
                kept0=kept0,
                kept0_list=tuple(int(j) for j in kept0),
                src0=np.array(src0, dtype=np.intp),
                dst0=dst_arr,
                starts=starts,
                tx_groups=tuple(groups),
                accuracy=profile.accuracy_for(ds),
                mask=mask,
                size=len(drop),
            ))
        # Largest subset first, then best accuracy, then lowest block ids, so
        # a linear scan returns the canonical projection.
        entries.sort(key=lambda t: (-t.size, -t.accuracy, t.drop))
        return entries

    def project(self, y_raw: np.ndarray) -> _SetEntry:
        """Largest allowed drop set that only drops blocks y_raw drops."""
        proposed = int(((y_raw == 0) * self._drop_w).sum())
        return self._project_mask(proposed)

    def _project_mask(self, proposed: int) -> _SetEntry:
        for entry in self.entries:
            if entry.mask & ~proposed == 0:
                return entry
        raise AssertionError("the empty drop set should always be allowed")

    def _resolve_masks(self, masks: list, entry: _SetEntry, fix_coverage: bool,
                       request_index: int = 0) -> np.ndarray:
        """Scalar twin of resolve; masks[j] packs column j's device bits."""
        hosts = [0] * self.n_blocks
        dvc = -1
        for j in entry.kept0_list:
            mask = masks[j]
            if mask == 0:
                if not fix_coverage:
                    raise UncoveredBlock(request_index, j + 1)
                chosen = self.fix_device
            elif mask & (mask - 1) == 0:
                chosen = mask.bit_length() - 1
            elif dvc >= 0 and (mask >> dvc) & 1:
                chosen = dvc
            else:
                row = self.rho_rows[dvc] if dvc >= 0 else self.e_list
                best = -1.0
                chosen = 0
                mm = mask
                while mm:
                    d = (mm & -mm).bit_length() - 1
                    if row[d] > best:
                        best = row[d]
                        chosen = d
                    mm &= mm - 1
            hosts[j] = chosen
            dvc = chosen
        return np.array(hosts, dtype=np.intp)

    def resolve(self, x_r: np.ndarray, entry: _SetEntry,
                fix_coverage: bool, request_index: int = 0) -> np.ndarray:
        """Hosts per block for one request, via the forward repair pass."""
        counts = x_r.sum(axis=0)
        hosts = np.zeros(self.n_blocks, dtype=np.intp)
        dvc = -1
        for j in entry.kept0:
            cnt = int(counts[j])
            if cnt == 0:
                if not fix_coverage:
                    raise UncoveredBlock(request_index, int(j) + 1)
                chosen = self.fix_device
            elif cnt == 1:
                chosen = int(np.argmax(x_r[:, j]))
            else:
                cand = np.flatnonzero(x_r[:, j])
                if dvc >= 0 and x_r[dvc, j]:
                    chosen = dvc
                elif dvc >= 0:
                    chosen = int(cand[np.argmax(self.rho[dvc, cand])])
                else:
                    chosen = int(cand[np.argmax(self.e[cand])])
            hosts[j] = chosen
            dvc = chosen
        return hosts

    def score(self, resolved: list[tuple[np.ndarray, _SetEntry]]):
        """Penalized score for one candidate.

        ``resolved`` holds one (hosts, entry) pair per request.  Returns
        (penalized, objective, latency, feasible).
        """
        n = self.n_devices
        load = [0.0] * n
        mem = [0.0] * n
        tx_time = [0.0] * n
        latency_tx = 0.0
        acc_sum = 0.0
        c, m, bits, rho = self.c_list, self.m_list, self.bits_list, self.rho_rows
        for hosts, entry in resolved:
            hl = hosts if isinstance(hosts, list) else hosts.tolist()
            for j in entry.kept0_list:
                d = hl[j]
                load[d] += c[j]
                mem[d] += m[j]
            acc_sum += entry.accuracy
            for dst, srcs in entry.tx_groups:
                dh = hl[dst]
                worst = 0.0
                for s in srcs:
                    sh = hl[s]
                    if sh != dh:
                        cost = bits[s] / rho[sh][dh]
                        tx_time[sh] += cost
                        if cost > worst:
                            worst = cost
                latency_tx += worst
        latency = latency_tx
        rel = 0.0
        e, pc, pt = self.e_list, self.energy.p_compute, self.energy.p_transmit
        for d in range(n):
            ct = load[d] / e[d]
            latency += ct
            joules = pc * ct + pt * tx_time[d]
            over = load[d] / self.comp_caps_list[d] - 1.0
            if over > 0.0:
                rel += over
            over = mem[d] / self.mem_caps_list[d] - 1.0
            if over > 0.0:
                rel += over
            over = joules / self.energy_caps_list[d] - 1.0
            if over > 0.0:
                rel += over
        r = len(resolved)
        acc = acc_sum / r if r else 1.0
        wo = objective_value(latency, acc, r, self.weights)
        return wo + self.penalty_weight * rel, wo, latency, rel == 0.0

    def canonicalize(self, bits: np.ndarray):
        """Raw chromosome to a resolved per-request (hosts, entry) list."""
        r_n_m = self.n_requests * self.n_devices * self.n_blocks
        x = bits[:r_n_m].reshape(self.n_requests, self.n_devices, self.n_blocks)
        y = bits[r_n_m:].reshape(self.n_requests, self.n_blocks)
        resolved = []
        if self._fast:
            col_masks = (x * self._dev_w[:, None]).sum(axis=1)
            proposed = ((y == 0) * self._drop_w).sum(axis=1)
            for r in range(self.n_requests):
                entry = self._project_mask(int(proposed[r]))
                hosts = self._resolve_masks(col_masks[r].tolist(), entry,
                                            fix_coverage=True, request_index=r)
                resolved.append((hosts, entry))
            return resolved
        for r in range(self.n_requests):
            entry = self.project(y[r])
            hosts = self.resolve(x[r], entry, fix_coverage=True, request_index=r)
            resolved.append((hosts, entry))
        return resolved

    def to_assignment(self, resolved) -> Assignment:
        r = len(resolved)
        x = np.zeros((r, self.n_devices, self.n_blocks), dtype=np.uint8)
        y = np.zeros((r, self.n_blocks), dtype=np.uint8)
        for ri, (hosts, entry) in enumerate(resolved):
            y[ri] = entry.y
            x[ri, hosts[entry.kept0], entry.kept0] = 1
        return Assignment(x, y)


def repair_allocation(assign: Assignment, graph: ResNetGraph, fleet: Fleet,
                      rates: RateMatrix) -> Assignment:
    """Resolve multi-host blocks to a single host per block.

    A forward pass per request: a block keeps the previous kept block's
    device when that device is among its hosts, otherwise it takes the host
    with the best link from that device (the fastest device when there is no
    previous block).  Ties go to the lowest device id.  Kept blocks with no
    host at all raise UncoveredBlock; already-resolved assignments come back
    unchanged, so the repair is idempotent.
    """
    n, m = assign.n_devices, assign.n_blocks
    rho = rates.rho
    e = fleet.mult_rates
    x_out = np.zeros_like(assign.x)
    for r in range(assign.n_requests):
        x_r = assign.x[r]
        dvc = -1
        for j in range(m):
            if not assign.y[r, j]:
                continue
            cand = np.flatnonzero(x_r[:, j])
            if cand.size == 0:
                raise UncoveredBlock(r, j + 1)
            if cand.size == 1:
                chosen = int(cand[0])
            elif dvc >= 0 and x_r[dvc, j]:
                chosen = dvc
            elif dvc >= 0:
                chosen = int(cand[np.argmax(rho[dvc, cand])])
            else:
                chosen = int(cand[np.argmax(e[cand])])
            x_out[r, chosen, j] = 1
            dvc = chosen
    return Assignment(x_out, assign.y)


def _feasibility_certificate(evaluator: _Evaluator) -> str | None:
    """A reason no candidate can satisfy the budgets, or None.

    Checks necessary conditions only: some allowed drop set must fit the
    fleet in aggregate, and every block it keeps must fit on at least one
    device by itself.
    """
    ev = evaluator
    r = max(ev.n_requests, 1)
    reasons = []
    for entry in ev.entries:
        k = entry.kept0
        total_m = ev.m[k].sum() * ev.n_requests
        total_c = ev.c[k].sum() * ev.n_requests
        if total_m > ev.mem_caps.sum():
            reasons.append(
                f"drop {list(entry.drop)}: memory {total_m:.6g} B over fleet total"
            )
            continue
        if total_c > ev.comp_caps.sum():
            reasons.append(
                f"drop {list(entry.drop)}: compute {total_c:.6g} mults over fleet total"
            )
            continue
        bad = None
        for j in k:
            fits = (
                (ev.m[j] <= ev.mem_caps)
                & (ev.c[j] <= ev.comp_caps)
                & (ev.energy.p_compute * ev.c[j] / ev.e <= ev.energy_caps)
            )
            if not fits.any():
                bad = int(j) + 1
                break
        if bad is None:
            return None
        reasons.append(f"drop {list(entry.drop)}: block {bad} fits no device")
    return "; ".join(reasons) if reasons else None


def _greedy_seed(ev: _Evaluator, length: int) -> np.ndarray:
    """Keep-all individual packed greedily under compute and energy headroom.

    Walks each request's chain, staying on the current device while the block
    fits, otherwise hopping to the fastest device with room and charging the
    boundary transfer to the sender.  Memory is left to the penalty terms.
    """
    r, n, m = ev.n_requests, ev.n_devices, ev.n_blocks
    bits = np.zeros(length, dtype=np.uint8)
    x = bits[: r * n * m].reshape(r, n, m)
    bits[r * n * m:] = 1
    comp_left = list(ev.comp_caps_list)
    en_left = list(ev.energy_caps_list)
    by_rate = sorted(range(n), key=lambda d: (-ev.e_list[d], d))
    pc, pt = ev.energy.p_compute, ev.energy.p_transmit

    def fits(d, c):
        return comp_left[d] >= c and en_left[d] >= pc * c / ev.e_list[d]

    for req in range(r):
        dvc = -1
        for j in range(m):
            c = ev.c_list[j]
            if dvc >= 0 and fits(dvc, c):
                chosen = dvc
            else:
                chosen = next((d for d in by_rate if fits(d, c)), None)
                if chosen is None:
                    chosen = max(range(n), key=lambda d: comp_left[d])
                if dvc >= 0 and chosen != dvc:
                    en_left[dvc] -= pt * ev.bits_list[j - 1] / ev.rho_rows[dvc][chosen]
            comp_left[chosen] -= c
            en_left[chosen] -= pc * c / ev.e_list[chosen]
            x[req, chosen, j] = 1
            dvc = chosen
    return bits


def _result_from_resolved(evaluator: _Evaluator, resolved, solver: str,
                          generations: int, evaluations: int,
                          history: tuple[float, ...], t0: float,
                          memory_mode: str) -> SolveResult:
    assign = evaluator.to_assignment(resolved)
    bd = evaluate_assignment(assign, evaluator.graph, evaluator.fleet,
                             evaluator.rates, evaluator.energy)
    report = check_constraints(
        assign, evaluator.graph, evaluator.fleet, evaluator.rates,
        evaluator.energy, evaluator.weights, evaluator.profile,
        strict=True, memory_mode=memory_mode,
    )
    acc = report.accuracy if report.accuracy is not None else 0.0
    return SolveResult(
        assignment=assign,
        objective=objective_value(bd.total_latency, acc, assign.n_requests,
                                  evaluator.weights),
        accuracy=acc,
        feasible=report.feasible,
        report=report,
        breakdown=bd,
        solver=solver,
        generations=generations,
        evaluations=evaluations,
        history=history,
        wall_time_s=time.perf_counter() - t0,
    )


def solve_ga(graph: ResNetGraph, fleet: Fleet, rates: RateMatrix,
             profile: AccuracyProfile, weights: ObjectiveWeights,
             energy: EnergyParams, n_requests: int,
             config: GaConfig = GaConfig(),
             memory_mode: str = "inputs") -> SolveResult:
    """Genetic search for the lowest-objective feasible assignment.

    Deterministic for a fixed config seed.  Raises InfeasibleInstance when a
    necessary-condition check proves no candidate can fit the budgets;
    otherwise always returns its best candidate, flagged feasible or not.
    """
    t0 = time.perf_counter()
    ev = _Evaluator(graph, fleet, rates, profile, weights, energy, n_requests,
                    penalty_weight=config.penalty_weight, memory_mode=memory_mode)
    if n_requests == 0:
        return _result_from_resolved(ev, [], "ga", 0, 0, (), t0, memory_mode)
    cert = _feasibility_certificate(ev)
    if cert is not None:
        raise InfeasibleInstance(cert)

    rng = np.random.default_rng(config.seed)
    n, m, r = ev.n_devices, ev.n_blocks, n_requests
    length = chromosome_length(r, n, m)
    mutation = config.mutation_rate if config.mutation_rate is not None else 1.0 / length

    pop = rng.integers(0, 2, size=(config.population_size, length), dtype=np.uint8)
    # Seed two sane individuals: keep everything on the fastest device, and a
    # greedy packing that respects per-device budgets.  The rest is random.
    seeded = np.zeros(length, dtype=np.uint8)
    x_view = seeded[: r * n * m].reshape(r, n, m)
    x_view[:, ev.fix_device, :] = 1
    seeded[r * n * m:] = 1
    pop[0] = seeded
    if config.population_size > 1:
        pop[1] = _greedy_seed(ev, length)

    def evaluate(bits):
        resolved = ev.canonicalize(bits)
        penalized, wo, latency, feasible = ev.score(resolved)
        return penalized, wo, latency, feasible, resolved

    # Selection compares (penalized score, latency): latency only breaks
    # exact score ties.  That leaves weighted runs untouched but still pulls
    # pure-accuracy runs toward co-located, low-transfer placements.
    evaluations = 0
    best = None  # ((penalized, not feasible, latency, order), resolved)
    order = itertools.count()
    scores = np.empty(config.population_size)
    lats = np.empty(config.population_size)
    for i in range(config.population_size):
        penalized, wo, latency, feasible, resolved = evaluate(pop[i])
        evaluations += 1
        scores[i] = penalized
        lats[i] = latency
        key = (penalized, not feasible, latency, next(order))
        if best is None or key < best[0]:
            best = (key, resolved)
    history = [float(scores.min())]

    def pick_parent():
        picks = rng.integers(0, config.population_size, size=config.tournament_size)
        return pop[picks[np.lexsort((lats[picks], scores[picks]))[0]]]

    for _gen in range(config.generations):
        new_pop = np.empty_like(pop)
        elite_idx = np.lexsort((lats, scores))[: config.elite]
        new_pop[: config.elite] = pop[elite_idx]
        new_scores = np.empty(config.population_size)
        new_lats = np.empty(config.population_size)
        new_scores[: config.elite] = scores[elite_idx]
        new_lats[: config.elite] = lats[elite_idx]

        for child_i in range(config.elite, config.population_size):
            p1 = pick_parent()
            p2 = pick_parent()
            if rng.random() < config.crossover_rate:
                mask = rng.integers(0, 2, size=length, dtype=np.uint8)
                child = np.where(mask, p1, p2).astype(np.uint8)
            else:
                child = p1.copy()
            flip = rng.random(length) < mutation
            child[flip] ^= 1
            penalized, wo, latency, feasible, resolved = evaluate(child)
            evaluations += 1
            new_pop[child_i] = child
            new_scores[child_i] = penalized
            new_lats[child_i] = latency
            key = (penalized, not feasible, latency, next(order))
            if key < best[0]:
                best = (key, resolved)
        pop, scores, lats = new_pop, new_scores, new_lats
        history.append(float(scores.min()))

    return _result_from_resolved(ev, best[1], "ga", config.generations,
                                 evaluations, tuple(history), t0, memory_mode)


def solve_exact(graph: ResNetGraph, fleet: Fleet, rates: RateMatrix,
                profile: AccuracyProfile, weights: ObjectiveWeights,
                energy: EnergyParams, n_requests: int,
                limits: ExactLimits = ExactLimits(),
                memory_mode: str = "inputs") -> SolveResult:
    """Exhaustive search over per-request drop sets and placements.

    Only practical for toy instances; InstanceTooLarge names the candidate
    count when the space exceeds the limit.  Returns the true optimum, or
    raises InfeasibleInstance when the exhausted space holds no feasible
    candidate.
    """
    t0 = time.perf_counter()
    ev = _Evaluator(graph, fleet, rates, profile, weights, energy, n_requests,
                    memory_mode=memory_mode)
    if n_requests == 0:
        return _result_from_resolved(ev, [], "exact", 0, 0, (), t0, memory_mode)

    n = ev.n_devices
    per_request = sum(n ** entry.kept0.size for entry in ev.entries)
    total = per_request ** n_requests
    if total > limits.max_candidates:
        raise InstanceTooLarge(total, limits.max_candidates)

    options = []
    for entry in ev.entries:
        for combo in itertools.product(range(n), repeat=int(entry.kept0.size)):
            hosts = np.zeros(ev.n_blocks, dtype=np.intp)
            hosts[entry.kept0] = combo
            options.append((hosts, entry))

    evaluations = 0
    best = None
    for idx, picks in enumerate(itertools.product(options, repeat=n_requests)):
        penalized, wo, latency, feasible = ev.score(list(picks))
        evaluations += 1
        if not feasible:
            continue
        key = (wo, latency, idx)
        if best is None or key < best[0]:
            best = (key, list(picks))
    if best is None:
        raise InfeasibleInstance(
            f"exhausted {total} candidates without finding a feasible assignment"
        )
    return _result_from_resolved(ev, best[1], "exact", 0, evaluations, (), t0,
                                 memory_mode)
