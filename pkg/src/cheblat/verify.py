"""Ground-truth verification: dense rank checks, condition numbers, and a
Monte-Carlo failure-rate harness."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from scipy.stats import beta

from .chebtransform import DENSE_ENTRY_CAP, dense_matrix, transform_for
from .construct import STRATEGIES, StrategyParams
from .errors import ConvergenceError
from .indexset import IndexSet

RANK_TOL = 1e-10


@dataclass(frozen=True)
class VerificationResult:
    full_rank: bool
    rank: int
    condition_number: float
    singular_value_min: float
    singular_value_max: float
    method: str

    def to_json(self) -> dict:
        return {
            "full_rank": self.full_rank,
            "rank": self.rank,
            "condition_number": self.condition_number,
            "singular_value_min": self.singular_value_min,
            "singular_value_max": self.singular_value_max,
            "method": self.method,
        }


def verify_rank(index_set: IndexSet, disc, iterative=False, max_entries=DENSE_ENTRY_CAP) -> VerificationResult:
    """Column-rank check of the evaluation matrix of a discretization.

    Dense mode works on the deduplicated node set and its singular values;
    iterative mode estimates the extremal singular values of the duplicated
    sampling operator through matrix-free power iterations, which changes
    the spectrum only by the near-uniform row duplication.
    """
    n = len(index_set)
    if iterative:
        smin, smax, rows = _extremal_singular_values(index_set, disc)
        method = "iterative"
    else:
        values = scipy.linalg.svdvals(dense_matrix(index_set, disc.node_set(), max_entries))
        smax, smin = float(values[0]), float(values[-1])
        rows = len(disc.node_set())
        method = "dense-svd"
    tol = RANK_TOL * max(rows, n) * smax
    if iterative:
        full = smin > tol
        rank = n if full else n - 1  # deficiency count is not observable here
    else:
        rank = int((values > tol).sum())
        full = rank == n
    cond = smax / smin if smin > 0 else math.inf
    return VerificationResult(full, rank, cond, smin, smax, method)


def _sample_weights(disc):
    """1/multiplicity per duplicated lattice point, plus the distinct count.

    Weighting the duplicated sample multiset this way makes the weighted
    normal operator coincide exactly with the Gram matrix of the matrix on
    the deduplicated node set.
    """
    keys = []
    for lat in disc.lattices:
        z = np.asarray(lat.z, dtype=np.int64)
        j = np.arange(lat.size, dtype=np.int64)
        a = (j[:, None] * z[None, :]) % lat.size
        a = np.minimum(a, lat.size - a)
        g = np.gcd(a, lat.size)
        block = np.empty((lat.size, 2 * lat.dim), dtype=np.int64)
        block[:, 0::2] = a // g
        block[:, 1::2] = lat.size // g
        keys.append(block)
    stacked = np.concatenate(keys, axis=0)
    uniq, inverse, counts = np.unique(stacked, axis=0, return_inverse=True, return_counts=True)
    return 1.0 / counts[inverse], uniq.shape[0]


def _extremal_singular_values(index_set, disc, tol=1e-9, max_rounds=1000, seed=0):
    tr = transform_for(disc)
    n = len(index_set)
    rng = np.random.default_rng(seed)
    weights, distinct = _sample_weights(disc)

    def normal(v):
        return tr.adjoint(weights * tr.evaluate(v))

    lam_max = _power_iteration(normal, n, rng, tol, max_rounds)
    lam_min = _inverse_iteration(normal, n, rng, tol, max_rounds)
    return math.sqrt(max(lam_min, 0.0)), math.sqrt(max(lam_max, 0.0)), distinct


def _power_iteration(normal, n, rng, tol, max_rounds):
    vec = rng.standard_normal(n)
    vec /= np.linalg.norm(vec)
    value = 0.0
    for _ in range(max_rounds):
        nxt = normal(vec)
        new_value = float(vec @ nxt)
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            return 0.0
        vec = nxt / norm
        if abs(new_value - value) <= tol * abs(new_value):
            return new_value
        value = new_value
    return value


def _inverse_iteration(normal, n, rng, tol, max_rounds, inner_tol=1e-10):
    import scipy.sparse.linalg as sla

    op = sla.LinearOperator((n, n), matvec=normal, dtype=float)
    vec = rng.standard_normal(n)
    vec /= np.linalg.norm(vec)
    value = 0.0
    for _ in range(max_rounds):
        try:
            solved, info = sla.cg(op, vec, rtol=inner_tol, atol=0.0, maxiter=50 * n)
        except TypeError:
            solved, info = sla.cg(op, vec, tol=inner_tol, atol=0.0, maxiter=50 * n)
        if info != 0:
            raise ConvergenceError("inner cg solve of the inverse iteration stalled")
        norm = np.linalg.norm(solved)
        vec = solved / norm
        new_value = float(vec @ normal(vec))
        if abs(new_value - value) <= tol * abs(new_value):
            return new_value
        value = new_value
    return value


@dataclass(frozen=True)
class HarnessResult:
    trials: int
    failures: int
    rate: float
    ci_low: float
    ci_high: float
    failed_trials: tuple[int, ...]


def failure_harness(
    index_set: IndexSet,
    strategy,
    params: StrategyParams | None = None,
    trials: int = 50,
    check_rank: bool = True,
    confidence: float = 0.95,
) -> HarnessResult:
    """Monte-Carlo failure rate with an exact binomial confidence interval.

    A trial fails when the construction reports failure or when the dense
    rank check contradicts a reported success; failures are recorded per
    trial, never silently dropped.  Trial seeds derive deterministically
    from params.rng_seed.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    build = STRATEGIES[strategy] if isinstance(strategy, str) else strategy
    params = params or StrategyParams()
    failed = []
    for trial in range(trials):
        seed = int(np.random.SeedSequence(params.rng_seed, spawn_key=(trial,)).generate_state(1, np.uint64)[0])
        disc = build(index_set, replace(params, rng_seed=seed))
        bad = not disc.success
        if not bad and check_rank:
            bad = not verify_rank(index_set, disc).full_rank
        if bad:
            failed.append(trial)
    k = len(failed)
    low, high = _clopper_pearson(k, trials, confidence)
    return HarnessResult(trials, k, k / trials, low, high, tuple(failed))


def _clopper_pearson(k, n, confidence):
    alpha = 1.0 - confidence
    low = 0.0 if k == 0 else float(beta.ppf(alpha / 2.0, k, n - k + 1))
    high = 1.0 if k == n else float(beta.ppf(1.0 - alpha / 2.0, k + 1, n - k))
    return low, high
