"""Rank-1 lattices, cosine transformed node sets, and alias coverage.

A frequency is "covered" by a lattice when its value at the lattice nodes
cannot be polluted by any other frequency under consideration; coverage is
decided purely from inner-product residues, never from matrix algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .indexset import IndexSet

# largest |h.z| summand product that still fits comfortably in int64
_INT64_SAFE = 1 << 62
_MAX_EXACT_SIZE = 3_000_000_000  # j * z stays below 2^63 for sizes up to here


@dataclass(frozen=True)
class Rank1Lattice:
    """Generating vector plus point count; the nodes are (j/size)*z mod 1."""

    z: tuple[int, ...]
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("lattice size must be positive")
        object.__setattr__(self, "z", tuple(int(v) % self.size for v in self.z))

    @property
    def dim(self) -> int:
        return len(self.z)


class MirrorTable:
    """Flat signed expansion of an index set for fast residue computation.

    `signed` enumerates every sign-flip variant of every vector as rows;
    `source` maps each row back to the storage-order index of its unsigned
    original.  Row order is deterministic but unspecified.
    """

    __slots__ = ("index_set", "signed", "source")

    def __init__(self, index_set: IndexSet):
        self.index_set = index_set
        self.signed, self.source = _signed_expansion(index_set)

    def __len__(self):
        return self.signed.shape[0]

    def residues(self, lattice: Rank1Lattice) -> np.ndarray:
        z = np.asarray(lattice.z, dtype=np.int64)
        return self.residues_many(z[None, :], lattice.size)[:, 0]

    def residues_many(self, gen_vectors, size) -> np.ndarray:
        """Residue of every signed row against every generating vector."""
        Z = np.asarray(gen_vectors, dtype=np.int64)
        peak = (
            int(np.abs(self.signed).max(initial=0))
            * max(int(size) - 1, 1)
            * self.signed.shape[1]
        )
        if peak < _INT64_SAFE:
            return (self.signed @ Z.T) % np.int64(size)
        prod = self.signed.astype(object) @ Z.T.astype(object)
        return prod % int(size)


def _signed_expansion(index_set: IndexSet):
    freqs = index_set.freqs
    supports = index_set.support_sizes
    parts, srcs = [], []
    for s in np.unique(supports):
        rows = np.flatnonzero(supports == s).astype(np.int64)
        block = freqs[rows]
        s = int(s)
        if s == 0:
            parts.append(block.copy())
            srcs.append(rows)
            continue
        # column index of each row's b-th nonzero entry (stable keeps order)
        nzpos = np.argsort(block == 0, axis=1, kind="stable")[:, :s]
        for bits in range(1 << s):
            signs = np.ones_like(block)
            for b in range(s):
                if bits >> b & 1:
                    np.put_along_axis(signs, nzpos[:, b : b + 1], -1, axis=1)
            parts.append(block * signs)
            srcs.append(rows)
    return np.concatenate(parts, axis=0), np.concatenate(srcs)


class NodeSet:
    """Deduplicated cosine transformed nodes with exact rational-angle keys.

    Each node is keyed per coordinate by the reduced fraction of its
    canonical angle in [0, 1/2]; keys coincide exactly iff the cosine
    transformed nodes coincide, so deduplication is exact and portable.
    """

    __slots__ = ("keys",)

    def __init__(self, keys: np.ndarray):
        # rows (num, den) interleaved per coordinate, unique and lex sorted
        self.keys = keys

    @property
    def dim(self) -> int:
        return self.keys.shape[1] // 2

    @property
    def cardinality(self) -> int:
        return self.keys.shape[0]

    def __len__(self) -> int:
        return self.keys.shape[0]

    def angles(self) -> np.ndarray:
        """Canonical angles 2*pi*num/den, shape (n, d)."""
        num = self.keys[:, 0::2].astype(float)
        den = self.keys[:, 1::2].astype(float)
        return 2.0 * np.pi * (num / den)

    def points(self) -> np.ndarray:
        """Node coordinates in [-1, 1]^d."""
        return np.cos(self.angles())


def _node_keys(lattice: Rank1Lattice) -> np.ndarray:
    size = lattice.size
    if size > _MAX_EXACT_SIZE:
        raise CapacityError(f"lattice size {size} too large for exact node keys")
    z = np.asarray(lattice.z, dtype=np.int64)
    # points j and size-j share one cosine image, so half the range suffices
    j = np.arange(size // 2 + 1, dtype=np.int64)
    a = (j[:, None] * z[None, :]) % size
    a = np.minimum(a, size - a)
    g = np.gcd(a, size)
    keys = np.empty((j.size, 2 * z.size), dtype=np.int64)
    keys[:, 0::2] = a // g
    keys[:, 1::2] = size // g
    return np.unique(keys, axis=0)


def cosine_nodes(lattice: Rank1Lattice) -> NodeSet:
    """Distinct cosine transformed nodes of one lattice (at most (size+1)/2)."""
    return NodeSet(_node_keys(lattice))


def union_nodes(lattices) -> NodeSet:
    """Exact deduplicated union of the cosine transformed nodes."""
    lattices = list(lattices)
    if not lattices:
        raise ValueError("need at least one lattice")
    dim = lattices[0].dim
    if any(lat.dim != dim for lat in lattices):
        raise ValueError("lattices must share one dimension")
    keys = np.concatenate([_node_keys(lat) for lat in lattices], axis=0)
    return NodeSet(np.unique(keys, axis=0))


@dataclass
class AliasReport:
    """Coverage of an index set by one lattice.

    `mask` flags, in storage order, the frequencies with at least one
    sign-flip variant whose residue is collision free.
    """

    lattice: Rank1Lattice
    index_set: IndexSet
    mask: np.ndarray
    residues: np.ndarray | None = None

    @property
    def covered(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def covered_count(self) -> int:
        return int(self.mask.sum())

    def covered_freqs(self) -> np.ndarray:
        return self.index_set.freqs[self.mask]


def covered_masks(table: MirrorTable, gen_vectors, size, relaxed=False) -> np.ndarray:
    """Coverage masks for a batch of generating vectors of one lattice size.

    Strict mode covers a frequency when one of its variants has a residue
    shared by no other variant at all; relaxed mode ignores collisions
    inside the frequency's own sign-flip family.  Cost per vector is one
    sort of the signed expansion.
    """
    residues = table.residues_many(gen_vectors, size)
    src = table.source
    count = residues.shape[1]
    out = np.zeros((count, len(table.index_set)), dtype=bool)
    for c in range(count):
        order = np.argsort(residues[:, c], kind="stable")
        rs = residues[order, c]
        ss = src[order]
        starts = np.flatnonzero(np.r_[True, rs[1:] != rs[:-1]])
        if relaxed:
            # a residue class whose members all share one source covers it
            smin = np.minimum.reduceat(ss, starts)
            smax = np.maximum.reduceat(ss, starts)
            out[c, smin[smin == smax]] = True
        else:
            counts = np.diff(np.r_[starts, rs.size])
            out[c, ss[starts[counts == 1]]] = True
    return out


def _cover(index_set, lattice, relaxed, table, keep_residues):
    if table is None:
        table = MirrorTable(index_set)
    elif table.index_set is not index_set and table.index_set != index_set:
        raise ValueError("mirror table belongs to a different index set")
    z = np.asarray(lattice.z, dtype=np.int64)[None, :]
    mask = covered_masks(table, z, lattice.size, relaxed=relaxed)[0]
    res = table.residues(lattice) if keep_residues else None
    return AliasReport(lattice, index_set, mask, res)


def alias_cover(index_set, lattice, table=None, keep_residues=False) -> AliasReport:
    """Frequencies whose sign-flip family contains a collision-free residue.

    A variant is collision free when no other variant of any frequency in
    the set shares its inner-product residue mod the lattice size.
    """
    return _cover(index_set, lattice, False, table, keep_residues)


def alias_cover_relaxed(index_set, lattice, table=None, keep_residues=False) -> AliasReport:
    """Like alias_cover, but collisions within a frequency's own sign-flip
    family do not disqualify it; the result is always a superset."""
    return _cover(index_set, lattice, True, table, keep_residues)
