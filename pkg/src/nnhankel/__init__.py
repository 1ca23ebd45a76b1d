"""Nearest nonnegative Hankel matrices with a prescribed eigenpair."""

from .errors import (
    DimensionMismatch,
    EmptyInput,
    HankelError,
    Infeasible,
    InvalidEigenpair,
    MaxIterations,
    NotHankel,
    TooLarge,
)
from .hankel import (
    Eigenpair,
    HankelGenerator,
    antidiag_weights,
    build_structure_matrix,
    eigmap_apply,
    eigmap_matrix,
    eigpair_residual,
    generator_of,
    hankel_from_generator,
    weighted_frobenius_norm,
)
from .io import load_fixture, read_instance, read_result, write_instance, write_result
from .pipeline import STAGE_A, STAGE_B, SolveResult, nearest_nonneg_hankel, realify, verify_solution
from .solver import (
    KktReport,
    RealifiedSystem,
    SolverConfig,
    check_feasibility,
    enumerate_active_set_oracle,
    kkt_verify,
    nnls,
    solve_stage_a,
    solve_stage_b,
)

__version__ = "0.1.0"
