import numpy as np
import pytest

from cheblat.construct import StrategyParams, construct_halving, construct_iterative
from cheblat.indexset import IndexSet, make_dyadic_hyperbolic_cross, make_l1_ball, make_random_sparse
from cheblat.verify import VerificationResult, failure_harness, verify_rank


class TestVerifyRank:
    def test_degenerate_constant_set(self):
        s = IndexSet([(0, 0)])
        disc = construct_halving(s, StrategyParams(rng_seed=0))
        result = verify_rank(s, disc)
        assert result.full_rank and result.rank == 1
        assert result.condition_number == pytest.approx(1.0)
        assert result.method == "dense-svd"

    def test_successful_constructions_have_full_rank(self):
        s = make_l1_ball(4, 3)
        for seed in range(5):
            disc = construct_iterative(s, StrategyParams(rng_seed=seed))
            assert disc.success
            assert verify_rank(s, disc).full_rank

    def test_detects_rank_deficiency(self):
        # a single tiny lattice cannot discretize this span
        from cheblat.construct import MultiLatticeDiscretization, ConstructionReport
        from cheblat.lattice import Rank1Lattice

        s = make_l1_ball(2, 3)
        disc = MultiLatticeDiscretization(
            index_set=s,
            lattices=[Rank1Lattice((1, 2), 5)],
            covered=[np.arange(len(s), dtype=np.int64)],
            residual=np.empty(0, dtype=np.int64),
            success=True,  # deliberately wrong
            node_count=3,
            strategy="plain",
            params=StrategyParams(),
            seed=0,
            report=ConstructionReport("plain", 0),
        )
        result = verify_rank(s, disc)
        assert not result.full_rank
        assert result.rank < len(s)

    def test_iterative_agrees_with_dense(self):
        for seed in (0, 1):
            s = make_l1_ball(3, 4)
            disc = construct_halving(s, StrategyParams(rng_seed=seed))
            assert disc.success
            dense = verify_rank(s, disc)
            fast = verify_rank(s, disc, iterative=True)
            assert fast.full_rank == dense.full_rank
            rel = abs(fast.condition_number - dense.condition_number) / dense.condition_number
            assert rel <= 0.05

    def test_dyadic_cross_condition_is_moderate(self):
        s = make_dyadic_hyperbolic_cross(6, 4)
        disc = construct_halving(s, StrategyParams(rng_seed=3))
        assert disc.success
        assert verify_rank(s, disc).condition_number <= 20.0


class TestFailureHarness:
    def test_vacuous_bound(self):
        s = make_l1_ball(2, 2)
        result = failure_harness(s, "plain", StrategyParams(delta=1.0, theory_mode=False), trials=3)
        assert 0.0 <= result.rate <= 1.0
        assert result.ci_low <= result.rate <= result.ci_high

    def test_random_set_failure_rate(self):
        s = make_random_sparse(6, 3, 100, 16, rng_seed=5)
        result = failure_harness(s, "plain", StrategyParams(rng_seed=0), trials=12)
        assert result.failures <= 1
        assert result.trials == 12
        assert len(result.failed_trials) == result.failures

    def test_rank_oracle_checks_every_trial(self):
        s = make_dyadic_hyperbolic_cross(6, 2)
        result = failure_harness(s, "iterative", StrategyParams(rng_seed=1), trials=10)
        assert result.failures == 0

    def test_deterministic(self):
        s = make_l1_ball(2, 4)
        a = failure_harness(s, "halving", StrategyParams(rng_seed=7), trials=5)
        b = failure_harness(s, "halving", StrategyParams(rng_seed=7), trials=5)
        assert a == b

    def test_callable_strategy(self):
        s = make_l1_ball(2, 3)
        result = failure_harness(s, construct_halving, StrategyParams(rng_seed=2), trials=3)
        assert result.failures == 0

    def test_confidence_interval_matches_binomial_tails(self):
        from scipy.stats import binom

        from cheblat.verify import _clopper_pearson

        # the exact interval inverts the binomial tail probabilities
        k, n = 3, 50
        low, high = _clopper_pearson(k, n, 0.95)
        assert binom.sf(k - 1, n, low) == pytest.approx(0.025, abs=1e-9)
        assert binom.cdf(k, n, high) == pytest.approx(0.025, abs=1e-9)

    def test_requires_positive_trials(self):
        with pytest.raises(ValueError):
            failure_harness(make_l1_ball(2, 2), "plain", trials=0)
