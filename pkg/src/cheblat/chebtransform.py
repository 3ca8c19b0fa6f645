"""Chebyshev evaluation and reconstruction over multi-lattice node sets.

The sampling matrix of a discretization factors into a sparse scatter of
coefficients onto residue classes followed by one univariate FFT per
lattice; evaluate/adjoint below apply it and its exact transpose without
ever materializing the matrix.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import CapacityError, ConsistencyError, ConvergenceError
from .indexset import IndexSet
from .lattice import MirrorTable, NodeSet

DENSE_ENTRY_CAP = 40_000_000
_IMAG_TOL = 1e-9
_SQRT2 = math.sqrt(2.0)


def eval_cheb_point(freq, point) -> float:
    """Normalized Chebyshev product basis value at a single point.

    Coordinates with degree zero contribute 1; the rest contribute
    sqrt(2)*cos(k*arccos(x)), so the overall scale is 2^(support/2).
    """
    k = np.asarray(freq, dtype=np.int64)
    x = np.asarray(point, dtype=float)
    if k.shape != x.shape:
        raise ValueError("frequency and point dimensions disagree")
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ValueError("point outside [-1, 1]^d")
    ang = np.arccos(np.clip(x, -1.0, 1.0))
    factors = np.where(k > 0, _SQRT2 * np.cos(k * ang), 1.0)
    return float(np.prod(factors))


def _check_real(values, reference_norm):
    worst = float(np.abs(values.imag).max(initial=0.0))
    if worst > _IMAG_TOL * reference_norm:
        raise ConsistencyError(
            f"imaginary residue {worst:.3e} exceeds {_IMAG_TOL:.0e} * {reference_norm:.3e}"
        )


class LatticeTransform:
    """Matrix-free sampling operator of a multi-lattice discretization.

    evaluate() maps coefficients to the values at every point of every
    lattice (duplicates retained, one block of `size` values per lattice);
    adjoint() applies the exact transpose.  Both run one FFT per lattice
    plus a sparse scatter/gather through the sign-flip expansion.
    """

    def __init__(self, index_set: IndexSet, lattices, table: MirrorTable | None = None):
        lattices = list(lattices)
        if not lattices:
            raise ValueError("need at least one lattice")
        if any(lat.dim != index_set.dim for lat in lattices):
            raise ValueError("lattice dimension disagrees with the index set")
        self.index_set = index_set
        self.lattices = lattices
        if table is None:
            table = MirrorTable(index_set)
        scale = _SQRT2 ** (-index_set.support_sizes.astype(float))
        weights = scale[table.source]
        cols = table.source
        n = len(index_set)
        self._scatter = []
        for lat in lattices:
            res = np.asarray(table.residues(lat), dtype=np.int64)
            mat = scipy.sparse.csr_matrix(
                (weights, (res, cols)), shape=(lat.size, n)
            )
            self._scatter.append(mat)
        self.sample_count = sum(lat.size for lat in lattices)

    @property
    def shape(self):
        return (self.sample_count, len(self.index_set))

    def evaluate(self, coeffs) -> np.ndarray:
        """Values at all lattice points; accepts one vector or a column batch."""
        c = np.asarray(coeffs, dtype=float)
        if c.shape[0] != len(self.index_set):
            raise ValueError("coefficient length disagrees with the index set")
        ref = float(np.linalg.norm(c))
        blocks = []
        for lat, mat in zip(self.lattices, self._scatter):
            spectrum = mat @ c
            values = lat.size * np.fft.ifft(spectrum, axis=0)
            _check_real(values, ref)
            blocks.append(values.real)
        return np.concatenate(blocks, axis=0)

    def adjoint(self, samples) -> np.ndarray:
        """Exact transpose of evaluate on the duplicated sample multiset."""
        y = np.asarray(samples, dtype=float)
        if y.shape[0] != self.sample_count:
            raise ValueError("sample blocks disagree with the lattice sizes")
        ref = float(np.linalg.norm(y))
        out = np.zeros((len(self.index_set),) + y.shape[1:], dtype=complex)
        start = 0
        for lat, mat in zip(self.lattices, self._scatter):
            block = y[start : start + lat.size]
            start += lat.size
            spectrum = lat.size * np.fft.ifft(block, axis=0)
            out += mat.T @ spectrum
        _check_real(out, ref)
        return np.ascontiguousarray(out.real)


def transform_for(disc) -> LatticeTransform:
    """Cached LatticeTransform for a discretization-like object."""
    cached = getattr(disc, "_transform", None)
    if isinstance(cached, LatticeTransform):
        return cached
    built = LatticeTransform(disc.index_set, disc.lattices)
    try:
        disc._transform = built
    except AttributeError:
        pass
    return built


def fast_evaluate(coeffs, disc) -> np.ndarray:
    """Polynomial values at all (duplicated) lattice points of `disc`."""
    return transform_for(disc).evaluate(coeffs)


def fast_adjoint(samples, disc) -> np.ndarray:
    """Transpose of fast_evaluate applied to a sample vector."""
    return transform_for(disc).adjoint(samples)


def dense_matrix(index_set: IndexSet, nodes: NodeSet, max_entries=DENSE_ENTRY_CAP) -> np.ndarray:
    """Dense evaluation matrix: rows = deduplicated nodes, columns = set order.

    Abscissas are rebuilt from the exact rational angles of the node keys,
    so entries match the FFT path bit-for-bit up to one cosine evaluation.
    """
    if nodes.dim != index_set.dim:
        raise ValueError("node and index set dimensions disagree")
    entries = len(nodes) * len(index_set)
    if entries > max_entries:
        raise CapacityError(f"dense matrix would hold {entries} entries (cap {max_entries})")
    theta = nodes.angles()
    freqs = index_set.freqs.astype(float)
    out = np.ones((len(nodes), len(index_set)))
    for j in range(index_set.dim):
        out *= np.cos(np.outer(theta[:, j], freqs[:, j]))
    out *= _SQRT2 ** index_set.support_sizes.astype(float)
    return out


def _cg(operator, rhs, tol, max_iter):
    try:
        return scipy.sparse.linalg.cg(operator, rhs, rtol=tol, atol=0.0, maxiter=max_iter)
    except TypeError:  # older scipy spells the relative tolerance "tol"
        return scipy.sparse.linalg.cg(operator, rhs, tol=tol, atol=0.0, maxiter=max_iter)


def reconstruct_cg(samples, disc, tol=1e-10, max_iter=None) -> np.ndarray:
    """Least-squares coefficients from samples at the duplicated multiset.

    Conjugate gradients on the normal equations with matrix-free products;
    duplicated nodes act as implicit row weights.  Stops when the relative
    normal-equation residual drops below `tol`.
    """
    if not disc.success:
        raise ValueError("discretization is not flagged successful; full rank is not guaranteed")
    tr = transform_for(disc)
    n = len(disc.index_set)
    if max_iter is None:
        max_iter = 4 * n
    y = np.asarray(samples, dtype=float)
    rhs = tr.adjoint(y)
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros(n)
    operator = scipy.sparse.linalg.LinearOperator(
        (n, n), matvec=lambda v: tr.adjoint(tr.evaluate(v)), dtype=float
    )
    solution, info = _cg(operator, rhs, tol, max_iter)
    if info != 0:
        residual = float(np.linalg.norm(rhs - operator @ solution)) / rhs_norm
        raise ConvergenceError(
            f"normal-equation cg hit {max_iter} iterations (relative residual {residual:.3e})",
            residual=residual,
        )
    return solution
