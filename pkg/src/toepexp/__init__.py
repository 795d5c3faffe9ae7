"""Toeplitz matrix exponential actions ``exp(-tA) v``.

The inverse of the shifted matrix ``I + gamma A`` is represented by the
Gohberg-Semencul formula, built from two circulant-preconditioned GMRES
solves, and drives a shift-and-invert Arnoldi process.  The two solves can
be stopped early at a tolerance derived from the Arnoldi tolerance.
"""

from .bounds import (
    BoundReport, NormKind, PerturbationSpec, bound_report, gh_bound_abs, gh_bound_rel,
    new_bound_abs_1norm, new_bound_abs_2norm, new_bound_rel_1norm, new_bound_rel_2norm,
    perturb_solutions, true_inverse_errors,
)
from .circulant import CirculantOperator, chan_preconditioner, circ_matvec, circ_solve
from .driver import (
    Algorithm, ReferenceMode, RunReport, ToleranceBudget, gap_sweep, reference_solution,
    relative_error, residual_gap, run_exact, run_inexact, tolerance_budget,
)
from .estimator import ToeplitzExpm
from .exceptions import (
    DenseCapExceeded, DiagonalMismatch, DimensionMismatch, SingularHessenberg,
    SingularPreconditioner, SolverFailure, ToeplitzExpmError, UsedAfterBreakdown, XiZero,
    ZeroReference,
)
from .gmres import SolveReport, gmres
from .gsf import (
    GsfInverse, NormMode, apply_inverse, build_gsf, effective_condition_numbers,
    gsf_condition_number, gsf_from_solutions,
)
from .krylov import (
    ArnoldiState, ExpmResult, approx_exponential, arnoldi_step, computed_residual_norm,
    small_coeffs, small_expm,
)
from .toeplitz import (
    SymbolKind, SymbolSpec, ToeplitzMatrix, as_toeplitz, from_columns, from_symbol,
    one_norm_vec, read_matrix, two_norm_vec, write_matrix,
)

__version__ = "0.1.0"
