"""Sparse, leakage-optimal secret shares for straggler-tolerant matrix products over F_q."""

from ._backend import BACKEND
from .field import FieldElement, FieldError, PrimeField, is_prime
from .leakage import analytic_leakage, brute_force_mi, leakage_report, q_entropy, stationarity_residual
from .model import AsymmetricSharePMF, ShareParams, SymmetricSharePMF, feasible_sd_range, share_sparsity
from .optimizer import (
    InfeasibleError,
    RootError,
    grid_search_oracle,
    optimize_asymmetric_n2,
    solve_optimal_pmf,
    sweep_tradeoff,
    tradeoff_point,
    verify_lemma1,
)
from .rng import Xoshiro256
from .sharing import (
    DecodeError,
    ProductEvaluation,
    ShareSet,
    encode_matrix,
    evaluate_products,
    four_task_scheme,
    make_shares,
    read_share_set,
    reconstruct_product,
    sample_padding,
    three_task_scheme,
)
from .simulator import SimConfig, SimReport, compare_schemes, run_simulation
from .spmat import SourceModel, SparseMatrix, read_matrix, sample_source_matrix, sp_mul, write_matrix

__version__ = "0.1.0"
