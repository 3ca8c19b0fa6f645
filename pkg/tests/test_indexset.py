import itertools
import json
import math

import numpy as np
import pytest

from cheblat.errors import CapacityError
from cheblat.indexset import (
    IndexSet,
    make_dyadic_hyperbolic_cross,
    make_hyperbolic_cross,
    make_l1_ball,
    make_random_sparse,
    max_degree,
    mirror_cardinality,
    mirror_stream,
    read_index_set,
    write_index_set,
)


def brute_mirror(index_set):
    """Materialized sign-flip closure, the oracle for all mirror counts."""
    out = set()
    for k in index_set:
        nz = [i for i, v in enumerate(k) if v]
        for signs in itertools.product((1, -1), repeat=len(nz)):
            vec = list(k)
            for s, i in zip(signs, nz):
                vec[i] *= s
            out.add(tuple(vec))
    return out


class TestIndexSet:
    def test_sorted_and_deduplicated(self):
        s = IndexSet([(1, 0), (0, 1), (1, 0), (0, 0)])
        assert [tuple(r) for r in s.freqs] == [(0, 0), (0, 1), (1, 0)]
        assert len(s) == 3

    def test_rejects_empty_and_negative(self):
        with pytest.raises(ValueError):
            IndexSet([])
        with pytest.raises(ValueError):
            IndexSet([(0, -1)])

    def test_membership_and_iteration(self):
        s = IndexSet([(2, 3), (0, 0)])
        assert (2, 3) in s and (1, 1) not in s
        assert list(s) == [(0, 0), (2, 3)]

    def test_restrict_keeps_order(self):
        s = make_l1_ball(2, 3)
        mask = np.zeros(len(s), dtype=bool)
        mask[[0, 3, 5]] = True
        sub = s.restrict(mask)
        assert [tuple(r) for r in sub.freqs] == [tuple(s.freqs[i]) for i in (0, 3, 5)]

    def test_support_sizes(self):
        s = IndexSet([(0, 0, 0), (1, 0, 2), (4, 4, 4)])
        assert list(s.support_sizes) == [0, 2, 3]


class TestL1Ball:
    def test_table_cardinalities(self):
        assert len(make_l1_ball(2, 64)) == 2145
        assert len(make_l1_ball(6, 4)) == 210

    def test_zero_degree(self):
        s = make_l1_ball(3, 0)
        assert len(s) == 1 and (0, 0, 0) in s

    def test_membership_matches_predicate(self):
        s = make_l1_ball(3, 5)
        rng = np.random.default_rng(0)
        for _ in range(200):
            k = tuple(int(v) for v in rng.integers(0, 8, size=3))
            assert (k in s) == (sum(k) <= 5)

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            make_l1_ball(8, 40, max_card=10**4)


class TestHyperbolicCross:
    def test_table_cardinalities(self):
        assert len(make_hyperbolic_cross(2, 256)) == 1979
        assert len(make_hyperbolic_cross(6, 16)) == 8684

    def test_degree_one_is_binary_cube(self):
        s = make_hyperbolic_cross(4, 1)
        assert len(s) == 16
        assert all(max(k) <= 1 for k in s)

    def test_membership_matches_predicate(self):
        s = make_hyperbolic_cross(3, 12)
        rng = np.random.default_rng(1)
        for _ in range(200):
            k = tuple(int(v) for v in rng.integers(0, 16, size=3))
            assert (k in s) == (math.prod(max(1, v) for v in k) <= 12)


class TestDyadicCross:
    def test_figure_cardinalities(self):
        # frozen from the plotted axis labels of the d=6 and growing-d runs
        assert len(make_dyadic_hyperbolic_cross(3, 2)) == 10
        assert len(make_dyadic_hyperbolic_cross(6, 2)) == 28
        assert len(make_dyadic_hyperbolic_cross(11, 2)) == 78
        assert len(make_dyadic_hyperbolic_cross(3, 3)) == 23
        assert len(make_dyadic_hyperbolic_cross(6, 3)) == 90
        assert len(make_dyadic_hyperbolic_cross(3, 4)) == 53
        assert len(make_dyadic_hyperbolic_cross(6, 4)) == 264
        assert len(make_dyadic_hyperbolic_cross(3, 5)) == 122
        assert len(make_dyadic_hyperbolic_cross(6, 5)) == 738
        assert len(make_dyadic_hyperbolic_cross(6, 6)) == 1995

    def test_weight_zero(self):
        s = make_dyadic_hyperbolic_cross(5, 0)
        assert len(s) == 1 and (0,) * 5 in s

    def test_downward_closed(self):
        s = make_dyadic_hyperbolic_cross(4, 4)
        members = set(s)
        rng = np.random.default_rng(2)
        picks = rng.choice(len(s), size=60, replace=False)
        for i in picks:
            k = tuple(int(v) for v in s.freqs[i])
            for j in range(4):
                if k[j]:
                    below = k[:j] + (k[j] - 1,) + k[j + 1 :]
                    assert below in members

    def test_union_semantics_small(self):
        # brute force the union of blocks for d=2, weight=3
        blocks = lambda w: range((0 if w == 0 else 1 << (w - 1)) + 1)
        expect = set()
        for w1 in range(4):
            for a in blocks(w1):
                for b in blocks(3 - w1):
                    expect.add((a, b))
        got = set(make_dyadic_hyperbolic_cross(2, 3))
        assert got == expect


class TestRandomSparse:
    def test_exact_support_and_count(self):
        s = make_random_sparse(25, 2, 16, 1024, rng_seed=0)
        assert len(s) == 16 and s.dim == 25
        assert all(int(v) == 2 for v in s.support_sizes)
        assert max_degree(s) <= 1024

    def test_single_admissible_vector(self):
        s = make_random_sparse(3, 3, 1, 1, rng_seed=123)
        assert list(s) == [(1, 1, 1)]

    def test_deterministic(self):
        a = make_random_sparse(10, 3, 50, 64, rng_seed=42)
        b = make_random_sparse(10, 3, 50, 64, rng_seed=42)
        assert a == b
        c = make_random_sparse(10, 3, 50, 64, rng_seed=43)
        assert a != c

    def test_infeasible_count(self):
        with pytest.raises(ValueError):
            make_random_sparse(3, 2, 100, 1, rng_seed=0)  # only C(3,2)=3 vectors exist


class TestMirror:
    def test_cardinality_trivial(self):
        assert mirror_cardinality(IndexSet([(0, 0)])) == 1
        assert mirror_cardinality(IndexSet([(0, 0), (1, 0), (1, 1)])) == 7

    def test_cardinality_matches_brute_force(self):
        for s in (make_l1_ball(6, 4), make_hyperbolic_cross(3, 6), make_dyadic_hyperbolic_cross(4, 3)):
            assert mirror_cardinality(s) == len(brute_mirror(s))

    def test_stream_sign_patterns(self):
        got = [m.entries for m in mirror_stream(IndexSet([(1, 1)]))]
        assert sorted(got) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]

    def test_stream_two_vectors(self):
        got = list(mirror_stream(IndexSet([(0, 0), (1, 0)])))
        assert len(got) == 3

    def test_stream_count_and_abs(self):
        s = make_l1_ball(6, 4)
        seen = set()
        count = 0
        for m in mirror_stream(s):
            count += 1
            assert m.entries not in seen
            seen.add(m.entries)
            absval = tuple(abs(v) for v in m.entries)
            assert absval == tuple(int(v) for v in s.freqs[m.source])
        assert count == mirror_cardinality(s)
        assert {tuple(abs(v) for v in e) for e in seen} == set(s)

    def test_stream_matches_brute_force(self):
        s = make_hyperbolic_cross(3, 4)
        assert {m.entries for m in mirror_stream(s)} == brute_mirror(s)

    def test_max_degree(self):
        assert max_degree(IndexSet([(0, 0)])) == 0
        assert max_degree(make_l1_ball(2, 64)) == 64
        assert max_degree(make_hyperbolic_cross(2, 256)) == 256


class TestFileFormats:
    def test_text_round_trip(self, tmp_path):
        s = make_l1_ball(3, 2)
        path = tmp_path / "set.txt"
        write_index_set(s, path)
        assert path.read_text().splitlines()[0] == "d 3 card 10"
        assert read_index_set(path) == s

    def test_json_round_trip(self, tmp_path):
        s = make_hyperbolic_cross(2, 5)
        path = tmp_path / "set.json"
        write_index_set(s, path)
        obj = json.loads(path.read_text())
        assert obj["dim"] == 2 and obj["card"] == len(s)
        assert read_index_set(path) == s

    def test_header_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("d 2 card 3\n0 0\n1 0\n")
        with pytest.raises(ValueError):
            read_index_set(path)
