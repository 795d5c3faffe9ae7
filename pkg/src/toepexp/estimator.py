"""scikit-learn style wrapper around the inexact exponential pipeline.

``fit`` takes the Toeplitz matrix ``A`` (as a :class:`ToeplitzMatrix`, a
``(first_col, first_row)`` pair, or a dense Toeplitz array), solves the two
fundamental systems of ``I + gamma A`` once and keeps the resulting GSF
inverse.  ``transform`` then maps each row ``v`` of its input to
``exp(-t A) v``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .driver import EXACT_TOL_SYS, DEFAULT_M_CAP, tolerance_budget
from .gsf import NormMode, build_gsf, gsf_condition_number
from .krylov import approx_exponential
from .toeplitz import as_toeplitz

__all__ = ["ToeplitzExpm"]


class ToeplitzExpm(TransformerMixin, BaseEstimator):
    """Action of ``exp(-t A)`` for a Toeplitz ``A``.

    Parameters
    ----------
    t : float
        Time in ``exp(-t A)``.
    gamma : float
        Shift of the shift-and-invert operator ``(I + gamma A)^{-1}``.
    tol_exp : float
        Stopping tolerance on the Arnoldi residual.
    tol_sys : {"budget", "exact"} or float
        Tolerance for the two Toeplitz solves.  ``"budget"`` derives it from
        `tol_exp` (inexact variant), ``"exact"`` uses 1e-14.
    m_max : int
        Arnoldi step cap.
    m_cap : int
        Step count assumed by the tolerance budget.
    max_iter : int or None
        GMRES iteration cap.

    Attributes
    ----------
    matrix_ : ToeplitzMatrix
    shifted_ : ToeplitzMatrix
        ``I + gamma A``.
    gsf_ : GsfInverse
    tol_sys_ : float
    budget_ : ToleranceBudget or None
    solve_iterations_ : tuple of int
    n_features_in_ : int
    results_ : list of ExpmResult
        One entry per row of the last ``transform`` call.

    Notes
    -----
    The matrix is the fitted data and the vectors are the samples, so
    ``fit_transform(A)`` applies ``exp(-t A)`` to the rows of ``A`` itself.
    It is allowed but rarely what is wanted; call ``fit(A).transform(V)``.
    """

    def __init__(self, t=1.0, gamma=0.1, tol_exp=1e-6, tol_sys="budget", m_max=100,
                 m_cap=DEFAULT_M_CAP, max_iter=None):
        self.t = t
        self.gamma = gamma
        self.tol_exp = tol_exp
        self.tol_sys = tol_sys
        self.m_max = m_max
        self.m_cap = m_cap
        self.max_iter = max_iter

    def _resolve_tol_sys(self, T):
        if isinstance(self.tol_sys, str):
            if self.tol_sys == "exact":
                return EXACT_TOL_SYS, None
            if self.tol_sys == "budget":
                budget = tolerance_budget(T, self.gamma, self.tol_exp, self.m_cap)
                return budget.tol_sys, budget
            raise ValueError(f"tol_sys must be 'budget', 'exact' or a float, got {self.tol_sys!r}")
        tol = float(self.tol_sys)
        if not tol > 0:
            raise ValueError("tol_sys must be positive")
        return tol, None

    def fit(self, X, y=None):
        """Build the GSF inverse of ``I + gamma A`` for ``A = X``."""
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        A = as_toeplitz(X)
        T = A.shifted(self.gamma)
        self.tol_sys_, self.budget_ = self._resolve_tol_sys(T)
        self.gsf_ = build_gsf(T, self.tol_sys_, max_iter=self.max_iter)
        self.matrix_ = A
        self.shifted_ = T
        self.n_features_in_ = A.n
        self.solve_iterations_ = tuple(r.iterations for r in self.gsf_.solve_reports)
        return self

    def expm_action(self, v):
        """``exp(-t A) v`` for a single vector, returning the full result."""
        check_is_fitted(self, "gsf_")
        return approx_exponential(self.shifted_, self.gsf_.apply, v, self.t, self.gamma,
                                  self.tol_exp, m_max=self.m_max, keep_state=False)

    def transform(self, X):
        """Apply ``exp(-t A)`` to every row of `X` (or to a single vector)."""
        check_is_fitted(self, "gsf_")
        single = np.ndim(X) == 1
        V = np.atleast_2d(np.asarray(X))
        # check_array rejects complex input, so validate by hand
        if V.ndim != 2 or not np.issubdtype(V.dtype, np.number):
            raise ValueError("X must be a numeric vector or 2-D array")
        if not np.all(np.isfinite(V)):
            raise ValueError("X contains NaN or infinity")
        if V.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {V.shape[1]} features, expected {self.n_features_in_}")
        self.results_ = [self.expm_action(v) for v in V]
        out = np.array([r.y_m for r in self.results_])
        if not np.iscomplexobj(V) and self.matrix_.is_real:
            out = out.real
        return out[0] if single else out

    def condition_number(self, norm_mode=NormMode.EXACT_1NORM):
        """GSF condition number of ``I + gamma A``."""
        check_is_fitted(self, "gsf_")
        return gsf_condition_number(self.gsf_, self.shifted_, norm_mode)
