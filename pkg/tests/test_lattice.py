import itertools

import numpy as np
import pytest

from cheblat.indexset import IndexSet, make_l1_ball, make_random_sparse, mirror_cardinality
from cheblat.lattice import (
    MirrorTable,
    Rank1Lattice,
    alias_cover,
    alias_cover_relaxed,
    cosine_nodes,
    union_nodes,
)


def float_dedup_nodes(lattices, tol=1e-12):
    """Floating-point node dedup, the oracle for exact key counting."""
    pts = []
    for lat in lattices:
        z = np.asarray(lat.z, dtype=float)
        for j in range(lat.size):
            pts.append(np.cos(2 * np.pi * ((j * z) % lat.size) / lat.size))
    pts = np.asarray(pts)
    kept = []
    for p in pts:
        if not any(np.abs(p - q).max() <= tol for q in kept):
            kept.append(p)
    return kept


def brute_cover(index_set, lattice, relaxed=False):
    """Exhaustive residue bookkeeping over the materialized mirror set."""
    entries = []  # (residue, source)
    for i, k in enumerate(index_set):
        nz = [j for j, v in enumerate(k) if v]
        for signs in itertools.product((1, -1), repeat=len(nz)):
            vec = list(k)
            for s, j in zip(signs, nz):
                vec[j] *= s
            r = sum(a * b for a, b in zip(vec, lattice.z)) % lattice.size
            entries.append((r, i))
    covered = set()
    for r, i in entries:
        if relaxed:
            clash = any(r2 == r and i2 != i for r2, i2 in entries)
        else:
            clash = sum(1 for r2, _ in entries if r2 == r) > 1
        if not clash:
            covered.add(i)
    return covered


class TestRank1Lattice:
    def test_reduces_generating_vector(self):
        lat = Rank1Lattice((7, -1, 12), 5)
        assert lat.z == (2, 4, 2)
        assert lat.dim == 3

    def test_rejects_bad_size(self):
        with pytest.raises(ValueError):
            Rank1Lattice((1,), 0)


class TestCosineNodes:
    def test_zero_vector_single_node(self):
        nodes = cosine_nodes(Rank1Lattice((0, 0, 0), 17))
        assert nodes.cardinality == 1
        assert np.allclose(nodes.points(), 1.0)

    def test_univariate_five_points(self):
        nodes = cosine_nodes(Rank1Lattice((1,), 5))
        assert nodes.cardinality == 3
        expect = sorted(np.cos(2 * np.pi * np.array([0, 1, 2]) / 5))
        assert np.allclose(sorted(nodes.points()[:, 0]), expect)

    def test_bivariate_example(self):
        assert cosine_nodes(Rank1Lattice((1, 2), 5)).cardinality == 3

    def test_cardinality_bound_and_float_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            size = int(rng.integers(1, 60))
            z = tuple(int(v) for v in rng.integers(0, size, size=3))
            lat = Rank1Lattice(z, size)
            nodes = cosine_nodes(lat)
            if size % 2:  # the (size+1)/2 bound is a theorem for odd sizes
                assert nodes.cardinality <= (size + 1) // 2
            else:  # even sizes have the extra self-paired point at size/2
                assert nodes.cardinality <= size // 2 + 1
            assert nodes.cardinality == len(float_dedup_nodes([lat]))

    def test_odd_prime_bound_attained(self):
        nodes = cosine_nodes(Rank1Lattice((1, 2), 13))
        assert nodes.cardinality == 7

    def test_contains_all_ones(self):
        nodes = cosine_nodes(Rank1Lattice((3, 4), 7))
        assert any(np.allclose(p, 1.0) for p in nodes.points())


class TestUnionNodes:
    def test_same_lattice_twice(self):
        lat = Rank1Lattice((1, 3), 11)
        assert union_nodes([lat, lat]).cardinality == cosine_nodes(lat).cardinality

    def test_upper_bound(self):
        rng = np.random.default_rng(1)
        lats = [
            Rank1Lattice(tuple(int(v) for v in rng.integers(0, 23, size=2)), 23)
            for _ in range(4)
        ]
        got = union_nodes(lats).cardinality
        assert got <= 1 + sum((lat.size - 1) // 2 + 1 - 1 for lat in lats)

    def test_two_lattice_union_matches_float_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            sizes = rng.integers(3, 40, size=2)
            lats = [
                Rank1Lattice(tuple(int(v) for v in rng.integers(0, s, size=2)), int(s))
                for s in sizes
            ]
            assert union_nodes(lats).cardinality == len(float_dedup_nodes(lats))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            union_nodes([Rank1Lattice((1,), 5), Rank1Lattice((1, 2), 5)])

    def test_empty_list(self):
        with pytest.raises(ValueError):
            union_nodes([])


class TestAliasCover:
    def test_spec_example_single_survivor(self):
        # residues of the nine mirror vectors are {0,1,4,2,3,3,4,1,2}
        s = IndexSet([(0, 0), (1, 0), (0, 1), (1, 1)])
        report = alias_cover(s, Rank1Lattice((1, 2), 5))
        assert [tuple(r) for r in report.covered_freqs()] == [(0, 0)]

    def test_spec_example_all_distinct(self):
        s = IndexSet([(0, 0), (1, 0), (0, 1), (1, 1)])
        report = alias_cover(s, Rank1Lattice((1, 3), 13))
        assert report.covered_count == len(s)

    def test_zero_set_always_covered(self):
        s = IndexSet([(0, 0, 0)])
        for size in (1, 2, 7):
            assert alias_cover(s, Rank1Lattice((1, 2, 3), size)).covered_count == 1

    def test_relaxed_is_superset(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            s = make_random_sparse(4, 2, 12, 6, rng_seed=int(rng.integers(10**6)))
            size = int(rng.integers(2, 80))
            lat = Rank1Lattice(tuple(int(v) for v in rng.integers(0, size, size=4)), size)
            strict = set(alias_cover(s, lat).covered)
            relaxed = set(alias_cover_relaxed(s, lat).covered)
            assert strict <= relaxed
            assert relaxed <= set(range(len(s)))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            s = make_random_sparse(3, 2, 8, 5, rng_seed=int(rng.integers(10**6)))
            size = int(rng.integers(2, 60))
            lat = Rank1Lattice(tuple(int(v) for v in rng.integers(0, size, size=3)), size)
            assert set(alias_cover(s, lat).covered) == brute_cover(s, lat)
            assert set(alias_cover_relaxed(s, lat).covered) == brute_cover(s, lat, relaxed=True)

    def test_relaxed_own_family_collisions_ignored(self):
        # with z=(0,1) the variants (1,0) and (-1,0) both land on residue 0:
        # a collision inside one sign-flip family, so strict drops the
        # frequency while relaxed keeps it. (1,0) sorts to storage index 1.
        s = IndexSet([(1, 0), (0, 1)])
        lat = Rank1Lattice((0, 1), 7)
        strict = set(alias_cover(s, lat).covered)
        relaxed = set(alias_cover_relaxed(s, lat).covered)
        assert 1 not in strict and 1 in relaxed
        assert relaxed == brute_cover(s, lat, relaxed=True)

    def test_table_reuse_requires_same_set(self):
        s = make_l1_ball(2, 2)
        other = make_l1_ball(2, 3)
        table = MirrorTable(s)
        with pytest.raises(ValueError):
            alias_cover(other, Rank1Lattice((1, 2), 11), table=table)

    def test_mirror_table_size(self):
        s = make_l1_ball(6, 4)
        assert len(MirrorTable(s)) == mirror_cardinality(s)
