"""Frequency index sets: standard families, mirror quantities, file formats.

An index set is a finite collection of frequency vectors in N_0^d.  The
mirrored set (all componentwise sign flips of all vectors) is never stored;
this module provides its cardinality and a streaming enumeration instead.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .errors import CapacityError

DEFAULT_CAPACITY = 10**8
# keep mirror counts compatible with 64-bit arithmetic downstream
_MIRROR_LIMIT = 10**18


class IndexSet:
    """Sorted, duplicate-free set of frequency vectors in N_0^d.

    Vectors are stored in lexicographic order so that every matrix built
    over the set has a deterministic column order.
    """

    __slots__ = ("freqs", "_support", "_tuples")

    def __init__(self, freqs):
        arr = np.array(freqs, dtype=np.int64, ndmin=2)
        if arr.size == 0:
            raise ValueError("index set must contain at least one vector")
        if arr.ndim != 2:
            raise ValueError("expected a two-dimensional array of frequency vectors")
        if (arr < 0).any():
            raise ValueError("frequency entries must be nonnegative")
        arr = np.unique(arr, axis=0)
        arr.setflags(write=False)
        self.freqs = arr
        self._support = None
        self._tuples = None

    @classmethod
    def _from_sorted(cls, arr):
        """Wrap rows that are already lex-sorted, duplicate-free and >= 0."""
        obj = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        arr.setflags(write=False)
        obj.freqs = arr
        obj._support = None
        obj._tuples = None
        return obj

    @property
    def dim(self) -> int:
        return self.freqs.shape[1]

    def __len__(self) -> int:
        return self.freqs.shape[0]

    def __iter__(self):
        return (tuple(int(v) for v in row) for row in self.freqs)

    def __contains__(self, vec) -> bool:
        if self._tuples is None:
            self._tuples = {tuple(int(v) for v in row) for row in self.freqs}
        return tuple(int(v) for v in vec) in self._tuples

    def __eq__(self, other):
        return (
            isinstance(other, IndexSet)
            and self.freqs.shape == other.freqs.shape
            and bool((self.freqs == other.freqs).all())
        )

    def __hash__(self):
        return hash((self.freqs.shape, self.freqs.tobytes()))

    def __repr__(self):
        return f"IndexSet(dim={self.dim}, card={len(self)})"

    @property
    def support_sizes(self) -> np.ndarray:
        """Number of nonzero entries per vector, in storage order."""
        if self._support is None:
            s = (self.freqs != 0).sum(axis=1).astype(np.int64)
            s.setflags(write=False)
            self._support = s
        return self._support

    def restrict(self, mask) -> "IndexSet":
        """Subset by a boolean mask over storage order; order is preserved."""
        mask = np.asarray(mask, dtype=bool)
        sub = self.freqs[mask]
        if sub.shape[0] == 0:
            raise ValueError("restriction would produce an empty index set")
        return IndexSet._from_sorted(sub)


def _check_capacity(card, max_card):
    cap = DEFAULT_CAPACITY if max_card is None else int(max_card)
    if card > cap:
        raise CapacityError(f"requested set would hold {card} vectors (cap {cap})")


def make_l1_ball(dim: int, degree: int, max_card=None) -> IndexSet:
    """All k in N_0^dim with ||k||_1 <= degree."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    _check_capacity(math.comb(degree + dim, dim), max_card)
    rows: list[tuple[int, ...]] = []

    def rec(prefix, budget, left):
        if left == 1:
            rows.extend(prefix + (v,) for v in range(budget + 1))
            return
        for v in range(budget + 1):
            rec(prefix + (v,), budget - v, left - 1)

    rec((), degree, dim)
    return IndexSet._from_sorted(np.array(rows, dtype=np.int64))


def make_hyperbolic_cross(dim: int, degree: int, max_card=None) -> IndexSet:
    """All k in N_0^dim with prod_j max(1, k_j) <= degree."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    if degree < 1:
        raise ValueError("degree must be positive")
    cap = DEFAULT_CAPACITY if max_card is None else int(max_card)
    rows: list[tuple[int, ...]] = []

    def rec(prefix, budget, left):
        if left == 0:
            rows.append(prefix)
            if len(rows) > cap:
                raise CapacityError(f"hyperbolic cross exceeds cap {cap}")
            return
        for v in range(budget + 1):
            rec(prefix + (v,), budget // max(1, v), left - 1)

    rec((), degree, dim)
    return IndexSet._from_sorted(np.array(rows, dtype=np.int64))


def _dyadic_top(weight: int) -> int:
    # block for weight w is [0, 2^(w-1)]; weight 0 contributes only {0}
    return 0 if weight == 0 else 1 << (weight - 1)


def make_dyadic_hyperbolic_cross(dim: int, weight: int, max_card=None) -> IndexSet:
    """Union of dyadic blocks over all splits of `weight` across coordinates.

    A split assigns weight w_j >= 0 to coordinate j with sum(w) = weight;
    coordinate j then ranges over [0, 2^(w_j - 1)] (just {0} for w_j = 0).
    The set is the union over all splits, hence downward closed.
    """
    if dim < 1:
        raise ValueError("dimension must be positive")
    if weight < 0:
        raise ValueError("weight must be nonnegative")
    cap = DEFAULT_CAPACITY if max_card is None else int(max_card)
    memo: dict[tuple[int, int], frozenset] = {}

    def suffixes(left, w):
        key = (left, w)
        if key in memo:
            return memo[key]
        if left == 1:
            vals = frozenset((v,) for v in range(_dyadic_top(w) + 1))
        else:
            acc = set()
            for j in range(w + 1):
                rest = suffixes(left - 1, w - j)
                for v in range(_dyadic_top(j) + 1):
                    for tail in rest:
                        acc.add((v,) + tail)
                if len(acc) > cap:
                    raise CapacityError(f"dyadic cross exceeds cap {cap}")
            vals = frozenset(acc)
        memo[key] = vals
        return vals

    pts = sorted(suffixes(dim, weight))
    return IndexSet._from_sorted(np.array(pts, dtype=np.int64))


def make_random_sparse(dim, active, count, max_degree, rng_seed, max_card=None) -> IndexSet:
    """`count` distinct vectors with exactly `active` nonzero entries.

    Nonzero values are uniform on [1, max_degree]; the support positions are
    drawn without replacement.  Deterministic for a fixed seed: duplicates
    are rejected and redrawn until `count` distinct vectors exist.
    """
    if not 1 <= active <= dim:
        raise ValueError("need 1 <= active <= dim")
    if count < 1:
        raise ValueError("count must be positive")
    if max_degree < 1:
        raise ValueError("max_degree must be positive")
    total = math.comb(dim, active) * max_degree**active
    if count > total:
        raise ValueError(f"count {count} exceeds the {total} admissible vectors")
    _check_capacity(count, max_card)
    rng = np.random.default_rng(rng_seed)
    seen: set[tuple[int, ...]] = set()
    attempts, limit = 0, max(10_000, 200 * count)
    while len(seen) < count:
        if attempts >= limit:
            raise CapacityError("rejection sampling budget exhausted; request fewer vectors")
        attempts += 1
        pos = rng.choice(dim, size=active, replace=False)
        vals = rng.integers(1, max_degree + 1, size=active)
        vec = [0] * dim
        for p, v in zip(pos, vals):
            vec[int(p)] = int(v)
        seen.add(tuple(vec))
    return IndexSet(sorted(seen))


def mirror_cardinality(index_set: IndexSet) -> int:
    """Size of the sign-flip closure: sum of 2^support over all vectors."""
    total = 0
    for s in index_set.support_sizes:
        total += 1 << int(s)
    if total > _MIRROR_LIMIT:
        raise CapacityError(f"mirrored set would hold {total} vectors")
    return total


def max_degree(index_set: IndexSet) -> int:
    """Largest single-coordinate degree occurring in the set."""
    return int(index_set.freqs.max())


class MirrorVector(NamedTuple):
    """A sign-flipped frequency vector plus the storage-order row index of
    the unsigned vector it came from."""

    entries: tuple[int, ...]
    source: int


def mirror_stream(index_set: IndexSet) -> Iterator[MirrorVector]:
    """Yield every sign-flip variant of every vector exactly once.

    Vectors come in storage order; for each one, sign patterns follow a
    binary counter over its nonzero positions (bit b flips position b).
    The order is deterministic but otherwise unspecified to callers.
    """
    for i, row in enumerate(index_set.freqs):
        base = [int(v) for v in row]
        nz = [j for j, v in enumerate(base) if v != 0]
        for bits in range(1 << len(nz)):
            vec = list(base)
            for b, pos in enumerate(nz):
                if bits >> b & 1:
                    vec[pos] = -vec[pos]
            yield MirrorVector(tuple(vec), i)


def index_set_to_json(index_set: IndexSet) -> dict:
    return {
        "dim": index_set.dim,
        "card": len(index_set),
        "freqs": index_set.freqs.tolist(),
    }


def index_set_from_json(obj) -> IndexSet:
    got = IndexSet(obj["freqs"])
    if got.dim != obj["dim"] or len(got) != obj["card"]:
        raise ValueError("index set header disagrees with its vector list")
    return got


def write_index_set(index_set: IndexSet, path, fmt=None) -> None:
    """Write the text format (header `d <dim> card <n>`, one vector per
    line) or its JSON mirror; `.json` suffixes default to JSON."""
    path = Path(path)
    if fmt is None:
        fmt = "json" if path.suffix == ".json" else "text"
    if fmt == "json":
        path.write_text(json.dumps(index_set_to_json(index_set)) + "\n")
    elif fmt == "text":
        lines = [f"d {index_set.dim} card {len(index_set)}"]
        lines.extend(" ".join(str(int(v)) for v in row) for row in index_set.freqs)
        path.write_text("\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_index_set(path) -> IndexSet:
    path = Path(path)
    text = path.read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return index_set_from_json(json.loads(text))
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if len(head) != 4 or head[0] != "d" or head[2] != "card":
        raise ValueError(f"bad index set header: {lines[0]!r}")
    dim, card = int(head[1]), int(head[3])
    rows = [[int(v) for v in ln.split()] for ln in lines[1:]]
    if len(rows) != card or any(len(r) != dim for r in rows):
        raise ValueError("index set body disagrees with its header")
    return IndexSet(rows)
