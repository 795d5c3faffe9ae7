"""Shift-and-invert Arnoldi approximation of ``exp(-tA) v``.

The Krylov space is built with ``(I + gamma A)^{-1}``.  After m steps, with
``H_m`` the m x m Hessenberg block and ``beta = ||v||_2``::

    u_m(t) = exp(-(t/gamma) (H_m^{-1} - I)) beta e_1,    y_m(t) = V_m u_m(t)

and the ODE residual ``-A y_m - y_m'`` has norm

    |h_{m+1,m} / gamma * e_m^T H_m^{-1} u_m(t)| * ||(I + gamma A) v_{m+1}||_2

which costs one small solve and one Toeplitz product per step.  When the
inverse is applied inexactly the same quantity is the "computed" residual.
"""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import SingularHessenberg, UsedAfterBreakdown
from .validation import check_positive, check_vector

__all__ = [
    "ArnoldiState", "ExpmResult", "arnoldi_step", "small_expm", "small_coeffs",
    "computed_residual_norm", "approx_exponential",
]

BREAKDOWN_RATIO = 1e-14
REORTH_RATIO = 1.0 / np.sqrt(2.0)
PADE13_THETA = 5.371920351148152
_PADE13 = (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
           1187353796428800.0, 129060195264000.0, 10559470521600.0,
           670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
           960960.0, 16380.0, 182.0, 1.0)


@dataclass
class ArnoldiState:
    """Basis and Hessenberg matrix of a running shift-and-invert Arnoldi process.

    ``V[:, :m+1]`` holds ``v_1 .. v_{m+1}`` (only ``v_1 .. v_m`` after a
    breakdown) and ``H[:m+1, :m]`` the (m+1) x m Hessenberg matrix.  Storage
    grows by doubling.
    """

    gamma: float
    V: np.ndarray
    H: np.ndarray
    m: int = 0
    beta: float = 0.0
    breakdown: bool = False

    @classmethod
    def start(cls, v, gamma, capacity=16):
        v = check_vector(v)
        beta = float(np.linalg.norm(v))
        if beta == 0.0:
            raise ValueError("starting vector must be nonzero")
        capacity = max(1, int(capacity))
        V = np.zeros((v.shape[0], capacity + 1), dtype=np.complex128)
        V[:, 0] = v / beta
        H = np.zeros((capacity + 1, capacity), dtype=np.complex128)
        return cls(gamma=float(gamma), V=V, H=H, m=0, beta=beta)

    @property
    def n(self):
        return self.V.shape[0]

    @property
    def basis(self):
        """``V_m`` (n x m)."""
        return self.V[:, :self.m]

    @property
    def next_vector(self):
        """``v_{m+1}``, or None after a breakdown."""
        return None if self.breakdown else self.V[:, self.m]

    @property
    def hessenberg(self):
        """Square ``H_m``."""
        return self.H[:self.m, :self.m]

    @property
    def subdiagonal(self):
        """``h_{m+1,m}``."""
        return self.H[self.m, self.m - 1].real if self.m else 0.0

    def _grow(self):
        cap = self.H.shape[1]
        new = 2 * cap
        V = np.zeros((self.n, new + 1), dtype=np.complex128)
        V[:, :cap + 1] = self.V
        H = np.zeros((new + 1, new), dtype=np.complex128)
        H[:cap + 1, :cap] = self.H
        self.V, self.H = V, H


def arnoldi_step(state, apply_shifted_inverse):
    """Extend the Arnoldi relation by one column, in place; returns `state`.

    Modified Gram-Schmidt, repeated once when the remainder loses more than
    a factor 1/sqrt(2) of its norm.  A breakdown is flagged when
    ``h_{m+1,m} <= 1e-14 ||w||_2``.
    """
    if state.breakdown:
        raise UsedAfterBreakdown(f"Arnoldi broke down at step {state.m}; the basis is invariant")
    if state.m == state.H.shape[1]:
        state._grow()
    j = state.m
    w = np.array(apply_shifted_inverse(state.V[:, j]), dtype=np.complex128)
    norm_w = np.linalg.norm(w)
    V, H = state.V, state.H
    for i in range(j + 1):
        h = np.vdot(V[:, i], w)
        H[i, j] = h
        w -= h * V[:, i]
    norm_out = np.linalg.norm(w)
    if norm_out < REORTH_RATIO * norm_w:
        for i in range(j + 1):
            h = np.vdot(V[:, i], w)
            H[i, j] += h
            w -= h * V[:, i]
        norm_out = np.linalg.norm(w)
    H[j + 1, j] = norm_out
    state.m = j + 1
    if norm_out <= BREAKDOWN_RATIO * norm_w:
        state.breakdown = True
    else:
        V[:, j + 1] = w / norm_out
    return state


def small_expm(M):
    """Matrix exponential by scaling and squaring with the [13/13] Pade approximant.

    The scaling makes ``||M / 2^s||_1 <= 5.37`` before squaring back.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"small_expm needs a square matrix, got shape {M.shape}")
    m = M.shape[0]
    dtype = np.result_type(M.dtype, np.float64)
    ident = np.eye(m, dtype=dtype)
    if m == 0:
        return ident
    norm = np.linalg.norm(M, 1)
    if not np.isfinite(norm):
        return np.full((m, m), np.nan, dtype=dtype)
    s = 0
    if norm > PADE13_THETA:
        s = int(np.ceil(np.log2(norm / PADE13_THETA)))
    A = M.astype(dtype) / (2.0 ** s)
    b = _PADE13
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    R = scipy.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def _hessenberg_inverse(H, step=None):
    m = H.shape[0]
    try:
        with warnings.catch_warnings():
            # a zero pivot is reported below as SingularHessenberg
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(H, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularHessenberg(f"H_m could not be factored: {exc}", step=step)
    diag = np.abs(np.diag(lu))
    if diag.min() == 0.0:
        raise SingularHessenberg("H_m is singular (zero pivot)", step=step)
    Hinv = scipy.linalg.lu_solve((lu, piv), np.eye(m, dtype=H.dtype))
    cond = np.linalg.norm(H, 1) * np.linalg.norm(Hinv, 1)
    if not np.isfinite(cond) or cond * np.finfo(float).eps >= 1.0:
        raise SingularHessenberg(f"H_m is numerically singular (1-norm condition {cond:.3e})",
                                 step=step)
    return Hinv


def small_coeffs(H_m, t, gamma, beta, step=None, return_inverse=False):
    """``u_m(t) = exp(-(t/gamma)(H_m^{-1} - I)) beta e_1`` and its t-derivative.

    Returns ``(u, du)`` with ``du = -(1/gamma)(H_m^{-1} - I) u``; with
    ``return_inverse=True`` also ``H_m^{-1}``.
    """
    H_m = np.asarray(H_m, dtype=np.complex128)
    m = H_m.shape[0]
    Hinv = _hessenberg_inverse(H_m, step=step)
    K = (Hinv - np.eye(m)) / gamma
    E = small_expm(-t * K)
    u = beta * E[:, 0]
    du = -(K @ u)
    if return_inverse:
        return u, du, Hinv
    return u, du


def computed_residual_norm(state, u_m, T, Hinv=None):
    """Cheap residual norm of the current approximation.

    `T` is the shifted matrix ``I + gamma A``.  Zero after a breakdown.
    """
    if state.breakdown:
        return 0.0
    m = state.m
    if Hinv is None:
        z = scipy.linalg.solve(state.hessenberg, u_m)
        last = z[-1]
    else:
        last = Hinv[-1, :] @ u_m
    scalar = abs(state.subdiagonal / state.gamma * last)
    if scalar == 0.0:
        return 0.0
    return float(scalar * np.linalg.norm(T.matvec(state.V[:, m])))


@dataclass
class ExpmResult:
    """Outcome of :func:`approx_exponential`.

    ``state`` keeps the Arnoldi basis and Hessenberg matrix so the real
    residual can be recomputed later; ``du_m`` is ``u_m'(t)``.
    """

    y_m: np.ndarray
    u_m: np.ndarray
    du_m: np.ndarray
    m: int
    residual_history: np.ndarray
    converged: bool
    breakdown: bool
    tol_exp_used: float
    tol_sys_used: float = None
    t: float = None
    gamma: float = None
    hinv: np.ndarray = field(default=None, repr=False)
    state: ArnoldiState = field(default=None, repr=False)
    timings: dict = field(default_factory=dict)


def approx_exponential(T_shifted, inverse_apply, v, t, gamma, tol_exp, m_max=100,
                       keep_state=True):
    """Run shift-and-invert Arnoldi until the residual drops to `tol_exp`.

    Parameters
    ----------
    T_shifted : ToeplitzMatrix
        ``I + gamma A``; only used for the residual's Toeplitz product.
    inverse_apply : callable
        ``w -> (I + gamma A)^{-1} w``, exact or inexact.
    v : array_like
        Starting vector, nonzero.
    t, gamma : float
    tol_exp : float
        Stop at the first step whose residual norm is <= tol_exp.
    m_max : int
        Step cap; hitting it returns ``converged=False``.
    """
    tol_exp = check_positive(tol_exp, "tol_exp")
    gamma = check_positive(gamma, "gamma")
    m_max = int(m_max)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    v = check_vector(v, T_shifted.n)
    state = ArnoldiState.start(v, gamma, capacity=min(m_max, 16))
    history = []
    converged = False
    u = du = Hinv = None
    t_arnoldi = t_small = 0.0
    while state.m < m_max:
        t0 = time.perf_counter()
        arnoldi_step(state, inverse_apply)
        t1 = time.perf_counter()
        u, du, Hinv = small_coeffs(state.hessenberg, t, gamma, state.beta,
                                   step=state.m, return_inverse=True)
        t2 = time.perf_counter()
        res = computed_residual_norm(state, u, T_shifted, Hinv=Hinv)
        t3 = time.perf_counter()
        t_arnoldi += (t1 - t0) + (t3 - t2)
        t_small += t2 - t1
        history.append(res)
        if state.breakdown or res <= tol_exp:
            converged = True
            break
    y = state.basis @ u
    return ExpmResult(
        y_m=y, u_m=u, du_m=du, m=state.m,
        residual_history=np.asarray(history, dtype=np.float64),
        converged=converged, breakdown=state.breakdown, tol_exp_used=tol_exp,
        t=float(t), gamma=gamma, hinv=Hinv,
        state=state if keep_state else None,
        timings={"arnoldi": t_arnoldi, "small_expm": t_small},
    )
