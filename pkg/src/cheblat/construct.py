"""Randomized construction of multi-lattice spatial discretizations.

Four strategies of increasing sophistication.  All of them draw random
generating vectors, score each candidate lattice by how many frequencies
it covers alias-free, and report failure through a flag rather than an
exception.  Identical inputs and seed give identical output: every
(round, probe, candidate) triple owns an independent derived RNG stream,
so evaluation order can never change the draws.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .indexset import IndexSet, max_degree, mirror_cardinality
from .lattice import MirrorTable, NodeSet, Rank1Lattice, covered_masks, union_nodes
from .numtheory import nextprime, primes_in


def lattice_size_for(index_set: IndexSet, oversampling: float = 2.0) -> int:
    """Prime lattice size large enough to keep the whole mirrored set
    residue-separable and to oversample it by the given factor.

    The constant-only set degenerates to 2: a two-point lattice always
    determines a constant.
    """
    mirror = mirror_cardinality(index_set)
    peak = max_degree(index_set)
    bound = max(oversampling * (mirror - 1), 2.0 * peak)
    if bound < 2.0:
        return 2
    return nextprime(bound)


@dataclass(frozen=True)
class StrategyParams:
    """Tuning knobs shared by all construction strategies.

    With the defaults every derived quantity follows the probabilistic
    sizing rules: failure bound delta = |I|^(-r), candidate counts from
    the (c/(c-1))^2 * (ln|I| - ln delta)/2 formula (doubled, floored at 10,
    for the multi-round strategies), and a per-round coverage threshold of
    half the remaining set.
    """

    c: float = 2.0
    r: float = 1.0
    delta: float | None = None
    L: int | None = None
    iter_cap: int | None = None
    threshold: str | Callable[[int, int], float] = "half"
    rng_seed: int = 0
    relaxed_cover: bool = False
    theory_mode: bool = True

    def __post_init__(self):
        if not self.c > 1.0:
            raise ValueError("oversampling constant c must exceed 1")
        if self.r < 0.0:
            raise ValueError("failure exponent r must be nonnegative")
        if self.delta is not None and not 0.0 < self.delta <= 1.0:
            raise ValueError("failure bound delta must lie in (0, 1]")
        if self.L is not None and self.L < 1:
            raise ValueError("candidate count L must be positive")

    def failure_bound(self, card: int) -> float:
        return self.delta if self.delta is not None else float(card) ** (-self.r)

    def _formula_count(self, card: int) -> int:
        bound = self.failure_bound(card)
        raw = (self.c / (self.c - 1.0)) ** 2 * (math.log(card) - math.log(bound)) / 2.0
        return max(1, math.ceil(raw))

    def draw_count(self, card: int) -> int:
        """Candidate batch size for the one-shot strategies."""
        formula = self._formula_count(card)
        if self.L is not None:
            if self.theory_mode and self.L < formula:
                raise ValueError(f"L={self.L} is below the required {formula}")
            return self.L
        return formula

    def round_draw_count(self, card: int) -> int:
        """Per-round candidate batch size for the multi-round strategies."""
        if self.L is not None:
            if self.theory_mode and self.L < self._formula_count(card):
                raise ValueError(f"L={self.L} is below the required {self._formula_count(card)}")
            return self.L
        return max(10, 2 * self._formula_count(card))

    def round_cap(self, per_round: int) -> int:
        if self.iter_cap is not None:
            if self.iter_cap < 1:
                raise ValueError("iteration cap must be positive")
            return self.iter_cap
        return math.ceil(per_round**2 / (2.0 * (self.r + 1.0)))

    def threshold_value(self, set_size: int, per_round: int) -> float:
        if callable(self.threshold):
            value = float(self.threshold(set_size, per_round))
        elif self.threshold == "half":
            value = set_size / 2.0
        elif self.threshold == "theory":
            value = float(math.ceil(set_size / per_round))
        else:
            raise ValueError(f"unknown threshold rule {self.threshold!r}")
        if self.theory_mode and math.ceil(value) < math.ceil(set_size / per_round):
            raise ValueError("threshold is below the guaranteed per-round coverage")
        return value


@dataclass
class RoundLog:
    round_index: int
    set_size: int
    size_bound: int  # prime from the sizing rule for the round
    chosen_size: int  # size actually appended (differs only under halving)
    best_cover: int
    candidates: int
    probes: int = 1


@dataclass
class ConstructionReport:
    strategy: str
    seed: int
    rounds: list[RoundLog] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def total_rounds(self) -> int:
        return len(self.rounds)


@dataclass(eq=False)
class MultiLatticeDiscretization:
    """Ordered lattices with per-lattice coverage provenance.

    covered[i] holds storage-order indices into `index_set` first resolved
    by lattices[i]; the covered sets are pairwise disjoint and together
    with `residual` partition the index set.  success means residual is
    empty, which guarantees a full-rank evaluation matrix on the node set.
    """

    index_set: IndexSet
    lattices: list[Rank1Lattice]
    covered: list[np.ndarray]
    residual: np.ndarray
    success: bool
    node_count: int
    strategy: str
    params: StrategyParams
    seed: int
    report: ConstructionReport
    _nodes: NodeSet | None = field(default=None, repr=False, compare=False)
    _transform: object = field(default=None, repr=False, compare=False)

    def node_set(self) -> NodeSet:
        if self._nodes is None:
            self._nodes = union_nodes(self.lattices)
        return self._nodes

    def to_json(self) -> dict:
        return {
            "dim": self.index_set.dim,
            "strategy": self.strategy,
            "seed": int(self.seed),
            "success": bool(self.success),
            "node_count": int(self.node_count),
            "lattices": [{"z": [int(v) for v in lat.z], "M": lat.size} for lat in self.lattices],
            "covered_per_lattice": [[int(i) for i in c] for c in self.covered],
            "residual": [int(i) for i in self.residual],
            "params": {"c": self.params.c, "r": self.params.r},
            "freqs": self.index_set.freqs.tolist(),
        }

    @classmethod
    def from_json(cls, obj, index_set: IndexSet | None = None) -> "MultiLatticeDiscretization":
        if index_set is None:
            if "freqs" not in obj:
                raise ValueError("discretization file carries no index set; pass one explicitly")
            index_set = IndexSet(obj["freqs"])
        if index_set.dim != obj["dim"]:
            raise ValueError("index set dimension disagrees with the discretization")
        lattices = [Rank1Lattice(tuple(entry["z"]), int(entry["M"])) for entry in obj["lattices"]]
        covered = [np.asarray(c, dtype=np.int64) for c in obj.get("covered_per_lattice", [])]
        if not covered:
            covered = [np.empty(0, dtype=np.int64) for _ in lattices]
        residual = np.asarray(obj.get("residual", []), dtype=np.int64)
        params = StrategyParams(**obj.get("params", {}), rng_seed=int(obj.get("seed", 0)))
        return cls(
            index_set=index_set,
            lattices=lattices,
            covered=covered,
            residual=residual,
            success=bool(obj["success"]),
            node_count=int(obj["node_count"]),
            strategy=obj.get("strategy", "unknown"),
            params=params,
            seed=int(obj.get("seed", 0)),
            report=ConstructionReport(obj.get("strategy", "unknown"), int(obj.get("seed", 0))),
        )


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _draw_candidates(seed, round_index, probe_index, count, size, dim) -> np.ndarray:
    out = np.empty((count, dim), dtype=np.int64)
    for c in range(count):
        gen = _rng(seed, round_index, probe_index, c)
        out[c] = gen.integers(0, size, size=dim, dtype=np.int64)
    return out


def _degenerate(index_set: IndexSet) -> bool:
    return len(index_set) == 1 and max_degree(index_set) == 0


def _degenerate_disc(index_set, params, strategy, started):
    # constant-only span: the single all-ones node determines it
    lat = Rank1Lattice((0,) * index_set.dim, 2)
    report = ConstructionReport(strategy, params.rng_seed, [RoundLog(0, 1, 2, 2, 1, 1)])
    report.seconds = time.perf_counter() - started
    return MultiLatticeDiscretization(
        index_set=index_set,
        lattices=[lat],
        covered=[np.zeros(1, dtype=np.int64)],
        residual=np.empty(0, dtype=np.int64),
        success=True,
        node_count=1,
        strategy=strategy,
        params=params,
        seed=params.rng_seed,
        report=report,
    )


def _first_cover_partition(masks: np.ndarray):
    taken = np.zeros(masks.shape[1], dtype=bool)
    covered = []
    for mask in masks:
        covered.append(np.flatnonzero(mask & ~taken).astype(np.int64))
        taken |= mask
    return covered, np.flatnonzero(~taken).astype(np.int64)


def _finalize(index_set, lattices, covered, residual, strategy, params, report, started):
    report.seconds = time.perf_counter() - started
    node_count = union_nodes(lattices).cardinality if lattices else 0
    return MultiLatticeDiscretization(
        index_set=index_set,
        lattices=lattices,
        covered=covered,
        residual=residual,
        success=residual.size == 0,
        node_count=node_count,
        strategy=strategy,
        params=params,
        seed=params.rng_seed,
        report=report,
    )


def construct_plain(index_set: IndexSet, params: StrategyParams | None = None):
    """Draw one candidate batch at the full lattice size and keep all of it.

    Success means the union of the per-lattice covered sets is the whole
    index set; the per-lattice provenance assigns each frequency to the
    first lattice covering it.
    """
    params = params or StrategyParams()
    started = time.perf_counter()
    if _degenerate(index_set):
        return _degenerate_disc(index_set, params, "plain", started)
    card = len(index_set)
    size = lattice_size_for(index_set, params.c)
    count = params.draw_count(card)
    table = MirrorTable(index_set)
    zs = _draw_candidates(params.rng_seed, 0, 0, count, size, index_set.dim)
    masks = covered_masks(table, zs, size, relaxed=params.relaxed_cover)
    lattices = [Rank1Lattice(tuple(int(v) for v in z), size) for z in zs]
    covered, residual = _first_cover_partition(masks)
    best = int(masks.sum(axis=1).max(initial=0))
    report = ConstructionReport(
        "plain", params.rng_seed, [RoundLog(0, card, size, size, best, count)]
    )
    return _finalize(index_set, lattices, covered, residual, "plain", params, report, started)


def construct_greedy(index_set: IndexSet, params: StrategyParams | None = None):
    """Keep only the most useful lattices of one candidate batch.

    Repeatedly picks the candidate covering the most still-open
    frequencies (ties go to the lowest candidate index), removes its
    coverage from all candidates, and stops once nothing is gained.
    """
    params = params or StrategyParams()
    started = time.perf_counter()
    if _degenerate(index_set):
        return _degenerate_disc(index_set, params, "greedy", started)
    card = len(index_set)
    size = lattice_size_for(index_set, params.c)
    count = params.draw_count(card)
    table = MirrorTable(index_set)
    zs = _draw_candidates(params.rng_seed, 0, 0, count, size, index_set.dim)
    masks = covered_masks(table, zs, size, relaxed=params.relaxed_cover)
    work = masks.copy()
    report = ConstructionReport("greedy", params.rng_seed)
    lattices, covered = [], []
    taken = np.zeros(card, dtype=bool)
    step = 0
    while True:
        sizes = work.sum(axis=1)
        pick = int(np.argmax(sizes))  # first maximum, i.e. the smallest index
        gain = int(sizes[pick])
        if gain == 0:
            break
        open_before = int(card - taken.sum())
        chosen = work[pick].copy()
        lattices.append(Rank1Lattice(tuple(int(v) for v in zs[pick]), size))
        covered.append(np.flatnonzero(chosen).astype(np.int64))
        taken |= chosen
        work &= ~chosen
        report.rounds.append(RoundLog(step, open_before, size, size, gain, count))
        step += 1
    residual = np.flatnonzero(~taken).astype(np.int64)
    return _finalize(index_set, lattices, covered, residual, "greedy", params, report, started)


def construct_iterative(index_set: IndexSet, params: StrategyParams | None = None):
    """Fresh candidate batch per round on the still-uncovered subset.

    Each round resizes the lattice for the remaining frequencies, draws a
    full batch, and appends the best candidate only; the subset shrinks,
    so the round sizes never increase.  Rounds whose best candidate covers
    nothing contribute no lattice but still count against the cap.
    """
    params = params or StrategyParams()
    started = time.perf_counter()
    if _degenerate(index_set):
        return _degenerate_disc(index_set, params, "iterative", started)
    card = len(index_set)
    count = params.round_draw_count(card)
    cap = params.round_cap(count)
    alive = np.arange(card, dtype=np.int64)
    current = index_set
    report = ConstructionReport("iterative", params.rng_seed)
    lattices, covered = [], []
    for round_index in range(cap):
        if alive.size == 0:
            break
        size = lattice_size_for(current, params.c)
        table = MirrorTable(current)
        zs = _draw_candidates(params.rng_seed, round_index, 0, count, size, index_set.dim)
        masks = covered_masks(table, zs, size, relaxed=params.relaxed_cover)
        sizes = masks.sum(axis=1)
        pick = int(np.argmax(sizes))
        gain = int(sizes[pick])
        report.rounds.append(RoundLog(round_index, int(alive.size), size, size, gain, count))
        if gain == 0:
            continue
        mask = masks[pick]
        lattices.append(Rank1Lattice(tuple(int(v) for v in zs[pick]), size))
        covered.append(alive[mask])
        alive = alive[~mask]
        if alive.size:
            current = current.restrict(~mask)
    return _finalize(index_set, lattices, covered, alive, "iterative", params, report, started)


def _probe(table, size, count, params, round_index, probe_index):
    zs = _draw_candidates(params.rng_seed, round_index, probe_index, count, size, table.index_set.dim)
    masks = covered_masks(table, zs, size, relaxed=params.relaxed_cover)
    sizes = masks.sum(axis=1)
    pick = int(np.argmax(sizes))
    return int(sizes[pick]), tuple(int(v) for v in zs[pick]), masks[pick]


def construct_halving(index_set: IndexSet, params: StrategyParams | None = None):
    """Per round, bisect over primes for the smallest adequate lattice size.

    Candidate sizes are all primes up to the round's sizing bound.  Each
    probe draws a fresh batch at the lower-median prime; the interval
    keeps the median when its best candidate reaches the round threshold
    and moves past it otherwise, until one prime remains.  That prime's
    best lattice is appended whatever its coverage; a zero-coverage round
    contributes nothing but still counts against the cap.
    """
    params = params or StrategyParams()
    started = time.perf_counter()
    if _degenerate(index_set):
        return _degenerate_disc(index_set, params, "halving", started)
    card = len(index_set)
    count = params.round_draw_count(card)
    cap = params.round_cap(count)
    alive = np.arange(card, dtype=np.int64)
    current = index_set
    report = ConstructionReport("halving", params.rng_seed)
    lattices, covered = [], []
    for round_index in range(cap):
        if alive.size == 0:
            break
        bound = lattice_size_for(current, params.c)
        threshold = params.threshold_value(int(alive.size), count)
        table = MirrorTable(current)
        candidates = (2,) if bound <= 2 else primes_in(3, bound).primes
        lo, hi = 0, len(candidates) - 1
        probes: dict[int, tuple] = {}
        probe_index = 0
        while lo < hi:
            mid = (lo + hi) // 2
            probes[mid] = _probe(table, candidates[mid], count, params, round_index, probe_index)
            probe_index += 1
            if probes[mid][0] >= threshold:
                hi = mid
            else:
                lo = mid + 1
        if lo not in probes:
            probes[lo] = _probe(table, candidates[lo], count, params, round_index, probe_index)
            probe_index += 1
        gain, z, mask = probes[lo]
        prime = candidates[lo]
        report.rounds.append(
            RoundLog(round_index, int(alive.size), bound, prime, gain, count, probes=probe_index)
        )
        if gain == 0:
            continue
        lattices.append(Rank1Lattice(z, prime))
        covered.append(alive[mask])
        alive = alive[~mask]
        if alive.size:
            current = current.restrict(~mask)
    return _finalize(index_set, lattices, covered, alive, "halving", params, report, started)


STRATEGIES = {
    "plain": construct_plain,
    "greedy": construct_greedy,
    "iterative": construct_iterative,
    "halving": construct_halving,
}
