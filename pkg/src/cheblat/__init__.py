"""Spatial discretizations of multivariate Chebyshev polynomial spans built
from cosine transformed rank-1 lattices, with FFT-based evaluation and
least-squares coefficient reconstruction."""

from .chebtransform import (
    DENSE_ENTRY_CAP,
    LatticeTransform,
    dense_matrix,
    eval_cheb_point,
    fast_adjoint,
    fast_evaluate,
    reconstruct_cg,
    transform_for,
)
from .construct import (
    STRATEGIES,
    ConstructionReport,
    MultiLatticeDiscretization,
    RoundLog,
    StrategyParams,
    construct_greedy,
    construct_halving,
    construct_iterative,
    construct_plain,
    lattice_size_for,
)
from .errors import CapacityError, ConsistencyError, ConvergenceError
from .indexset import (
    IndexSet,
    MirrorVector,
    index_set_from_json,
    index_set_to_json,
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
from .lattice import (
    AliasReport,
    MirrorTable,
    NodeSet,
    Rank1Lattice,
    alias_cover,
    alias_cover_relaxed,
    cosine_nodes,
    covered_masks,
    union_nodes,
)
from .numtheory import PrimeRange, is_prime, nextprime, primes_in, residue
from .verify import HarnessResult, VerificationResult, failure_harness, verify_rank

__version__ = "0.1.0"

__all__ = [
    "AliasReport",
    "CapacityError",
    "ConsistencyError",
    "ConstructionReport",
    "ConvergenceError",
    "DENSE_ENTRY_CAP",
    "HarnessResult",
    "IndexSet",
    "LatticeTransform",
    "MirrorTable",
    "MirrorVector",
    "MultiLatticeDiscretization",
    "NodeSet",
    "PrimeRange",
    "Rank1Lattice",
    "RoundLog",
    "STRATEGIES",
    "StrategyParams",
    "VerificationResult",
    "alias_cover",
    "alias_cover_relaxed",
    "construct_greedy",
    "construct_halving",
    "construct_iterative",
    "construct_plain",
    "cosine_nodes",
    "covered_masks",
    "dense_matrix",
    "eval_cheb_point",
    "failure_harness",
    "fast_adjoint",
    "fast_evaluate",
    "index_set_from_json",
    "index_set_to_json",
    "is_prime",
    "lattice_size_for",
    "make_dyadic_hyperbolic_cross",
    "make_hyperbolic_cross",
    "make_l1_ball",
    "make_random_sparse",
    "max_degree",
    "mirror_cardinality",
    "mirror_stream",
    "nextprime",
    "primes_in",
    "read_index_set",
    "reconstruct_cg",
    "residue",
    "transform_for",
    "union_nodes",
    "verify_rank",
    "write_index_set",
]
