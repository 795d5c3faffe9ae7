"""Gohberg-Semencul representation of a Toeplitz inverse.

With ``x = T^{-1} e_1 = (xi_0, ..., xi_{n-1})`` and
``y = T^{-1} e_n = (eta_0, ..., eta_{n-1})``, and ``xi_0 != 0``::

    T^{-1} = (1/xi_0) (L_x R_y - L_y0 R_x0)

where ``L_x`` is lower triangular Toeplitz with first column x, ``R_y`` is
upper triangular Toeplitz with first row ``(eta_{n-1}, ..., eta_0)``,
``L_y0`` is strictly lower with first column ``(0, eta_0, ..., eta_{n-2})``
and ``R_x0`` is strictly upper with first row ``(0, xi_{n-1}, ..., xi_1)``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .circulant import chan_preconditioner
from .exceptions import SolverFailure, XiZero
from .gmres import gmres
from .toeplitz import ToeplitzMatrix, embedding_length, embedding_spectrum, one_norm_vec
from .validation import check_block, check_dense_cap, check_positive, check_vector

__all__ = [
    "GsfInverse", "NormMode", "build_gsf", "gsf_from_solutions", "apply_inverse",
    "gsf_condition_number", "effective_condition_numbers", "gsf_dense",
    "xi0_threshold",
]

XI0_RELATIVE_THRESHOLD = 1e-12


def xi0_threshold(x):
    return XI0_RELATIVE_THRESHOLD * float(np.linalg.norm(x))


def _check_xi0(x):
    xi0 = x[0]
    if not abs(xi0) > xi0_threshold(x):
        raise XiZero(
            f"|xi_0| = {abs(xi0):.3e} is not above {xi0_threshold(x):.3e}; "
            "the Gohberg-Semencul formula needs xi_0 != 0")
    return xi0


def _factor_columns(x, y):
    """First column / first row of L_x, R_y, L_y0, R_x0."""
    n = x.shape[0]
    zeros = np.zeros(n, dtype=np.complex128)
    lx = (x, np.r_[x[0], zeros[1:]])
    ry = (np.r_[y[-1], zeros[1:]], y[::-1])
    ly0 = (np.r_[0.0, y[:-1]], zeros)
    rx0 = (zeros, np.r_[0.0, x[:0:-1]])
    return lx, ry, ly0, rx0


@dataclass(frozen=True, eq=False)
class GsfInverse:
    """Fast ``T^{-1}`` built from the two fundamental solutions.

    Use :func:`build_gsf` (iterative solves) or :func:`gsf_from_solutions`
    (caller-supplied x and y) to construct one.
    """

    n: int
    x: np.ndarray
    y: np.ndarray
    xi0: complex
    factor_spectra: tuple
    embed_length: int
    solve_reports: tuple = (None, None)

    def apply(self, v):
        return apply_inverse(self, v)

    def __matmul__(self, v):
        return apply_inverse(self, v)

    def to_dense(self):
        return gsf_dense(self.x, self.y)


def gsf_from_solutions(x, y, solve_reports=(None, None)):
    """Assemble a :class:`GsfInverse` from given x = T^{-1}e_1, y = T^{-1}e_n."""
    x = check_vector(x, name="x").copy()
    y = check_vector(y, x.shape[0], name="y").copy()
    xi0 = _check_xi0(x)
    n = x.shape[0]
    L = embedding_length(n)
    spectra = tuple(embedding_spectrum(c, r, L) for c, r in _factor_columns(x, y))
    for arr in (x, y) + spectra:
        arr.flags.writeable = False
    return GsfInverse(n=n, x=x, y=y, xi0=complex(xi0), factor_spectra=spectra,
                      embed_length=L, solve_reports=tuple(solve_reports))


def build_gsf(T, tol_sys, max_iter=None, precondition=True):
    """Solve ``T x = e_1`` and ``T y = e_n`` by circulant-preconditioned GMRES.

    Raises
    ------
    SolverFailure
        Either solve missed `tol_sys`; the report is attached.
    XiZero
        ``x[0]`` is (numerically) zero.
    """
    tol_sys = check_positive(tol_sys, "tol_sys")
    n = T.n
    precond = chan_preconditioner(T).solve if precondition else None
    reports = []
    for label, idx in (("T x = e_1", 0), ("T y = e_n", n - 1)):
        b = np.zeros(n, dtype=np.complex128)
        b[idx] = 1.0
        rep = gmres(T.matvec, precond, b, tol_sys, max_iter=max_iter)
        if not rep.converged:
            raise SolverFailure(
                f"GMRES for {label} stopped after {rep.iterations} iterations at "
                f"preconditioned residual {rep.final_precond_residual:.3e} > {tol_sys:.3e}"
                + (" (stagnation)" if rep.stagnated else ""), report=rep)
        reports.append(rep)
    return gsf_from_solutions(reports[0].solution, reports[1].solution, tuple(reports))


def apply_inverse(G, v):
    """``(1/xi_0)(L_x (R_y v) - L_y0 (R_x0 v))`` using cached spectra.

    Accepts a vector or an (n, k) block.
    """
    V = check_block(v, G.n)
    n, L = G.n, G.embed_length
    s_lx, s_ry, s_ly0, s_rx0 = (s[:, None] for s in G.factor_spectra)
    fv = np.fft.fft(V, n=L, axis=0)
    w1 = np.fft.ifft(s_ry * fv, axis=0)[:n]
    w2 = np.fft.ifft(s_rx0 * fv, axis=0)[:n]
    combined = s_lx * np.fft.fft(w1, n=L, axis=0) - s_ly0 * np.fft.fft(w2, n=L, axis=0)
    out = np.fft.ifft(combined, axis=0)[:n] / G.xi0
    return out[:, 0] if np.ndim(v) == 1 else out


def gsf_dense(x, y):
    """Materialize ``(1/xi_0)(L_x R_y - L_y0 R_x0)`` in O(n^2).

    Uses the displacement recurrence
    ``M[i, j] = M[i-1, j-1] + xi_i eta_{n-1-j} - eta_{i-1} xi_{n-j}``
    with ``M[0, j] = xi_0 eta_{n-1-j}`` and ``M[i, 0] = xi_i eta_{n-1}``.
    """
    x = check_vector(x, name="x")
    y = check_vector(y, x.shape[0], name="y")
    n = x.shape[0]
    check_dense_cap(n, "GSF inverse")
    xi0 = _check_xi0(x)
    M = np.empty((n, n), dtype=np.complex128)
    yr = y[::-1]
    M[0, :] = x[0] * yr
    if n > 1:
        M[1:, 0] = x[1:] * y[-1]
        xr = x[:0:-1]  # xi_{n-j} for j = 1..n-1
        for i in range(1, n):
            M[i, 1:] = M[i - 1, :-1] + x[i] * yr[1:] - y[i - 1] * xr
    return M / xi0


class NormMode(str, Enum):
    EXACT_1NORM = "exact_1norm"
    COLROW_PROXY = "colrow_proxy"


def _matrix_one_norm(T, norm_mode):
    mode = NormMode(norm_mode)
    return T.one_norm() if mode is NormMode.EXACT_1NORM else T.one_norm_proxy()


def effective_condition_numbers(G, T, norm_mode=NormMode.EXACT_1NORM):
    """Return ``(||T||_1 ||y||_1, ||x||_1 / |xi_0|)``.

    The first is the effective condition number of ``T y = e_n``; the second
    estimates the other effective factor, so their product is the GSF
    condition number.
    """
    if not isinstance(T, ToeplitzMatrix):
        raise TypeError("T must be a ToeplitzMatrix")
    _check_xi0(G.x)
    kappa_i = _matrix_one_norm(T, norm_mode) * one_norm_vec(G.y)
    kappa_ii = one_norm_vec(G.x) / abs(G.xi0)
    return kappa_i, kappa_ii


def gsf_condition_number(G, T, norm_mode=NormMode.EXACT_1NORM):
    """``||T||_1 ||y||_1 / (|xi_0| / ||x||_1)``.

    ``norm_mode="colrow_proxy"`` replaces ``||T||_1`` by
    ``max(||first_col||_1, ||first_row||_1)``.
    """
    kappa_i, kappa_ii = effective_condition_numbers(G, T, norm_mode)
    return kappa_i * kappa_ii
