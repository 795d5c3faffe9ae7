"""Unrestarted, left-preconditioned GMRES.

The iteration minimizes ``||M^{-1}(b - T q)||_2`` over the Krylov space of
``M^{-1} T`` and stops as soon as the Givens-recurrence estimate of that
residual drops to ``tol`` (an absolute threshold, as in the stopping rule
used for the two Toeplitz systems).
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch
from .validation import check_positive, check_vector

__all__ = ["SolveReport", "gmres"]

REORTH_RATIO = 1.0 / np.sqrt(2.0)
HAPPY_BREAKDOWN = 1e-14
STAGNATION_WINDOW = 50
STAGNATION_DECREASE = 1e-14


@dataclass
class SolveReport:
    """Outcome of one GMRES solve.

    ``precond_residual_history[k]`` is the recurrence estimate after k+1
    iterations.  ``true_precond_residual`` is recomputed from the returned
    solution as a final check.
    """

    solution: np.ndarray
    iterations: int
    precond_residual_history: np.ndarray
    converged: bool
    final_precond_residual: float
    true_precond_residual: float = 0.0
    initial_precond_residual: float = 0.0
    stagnated: bool = False
    happy_breakdown: bool = False
    basis: np.ndarray = field(default=None, repr=False)


def _givens(a, b):
    """Return (c, s, r) with [[c, s], [-conj(s), c]] @ [a, b] = [r, 0]."""
    abs_a = abs(a)
    abs_b = abs(b)
    if abs_b == 0.0:
        return 1.0, 0.0, a
    if abs_a == 0.0:
        return 0.0, np.conj(b) / abs_b, abs_b
    r = np.hypot(abs_a, abs_b)
    phase = a / abs_a
    return abs_a / r, phase * np.conj(b) / r, phase * r


def gmres(apply_op, apply_precond, b, tol, max_iter=None, keep_basis=False):
    """Solve ``T q = b`` with left preconditioning ``M^{-1}``.

    Parameters
    ----------
    apply_op, apply_precond : callable
        ``v -> T v`` and ``v -> M^{-1} v``.  Pass ``None`` for no
        preconditioner.
    b : array_like
        Right-hand side.
    tol : float
        Absolute target for ``||M^{-1}(b - T q)||_2``.
    max_iter : int, optional
        Defaults to ``min(n, 1000)``.
    keep_basis : bool
        Keep the Krylov basis on the report (tests check its orthonormality).

    Returns
    -------
    SolveReport
    """
    b = check_vector(b, name="b")
    n = b.shape[0]
    tol = check_positive(tol, "tol")
    if max_iter is None:
        max_iter = min(n, 1000)
    max_iter = int(max_iter)
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    precond = apply_precond if apply_precond is not None else (lambda v: v)

    def op(v):
        # copy: callbacks may hand back their input, which is a column of V
        w = np.array(precond(np.asarray(apply_op(v))), dtype=np.complex128)
        if w.shape != (n,):
            raise DimensionMismatch(f"operator returned shape {w.shape}, expected ({n},)")
        return w

    r0 = np.asarray(precond(b), dtype=np.complex128)
    if r0.shape != (n,):
        raise DimensionMismatch(f"preconditioner returned shape {r0.shape}, expected ({n},)")
    beta = np.linalg.norm(r0)
    if beta == 0.0:
        return SolveReport(np.zeros(n, dtype=np.complex128), 0, np.zeros(0), True, 0.0,
                           0.0, 0.0, basis=np.zeros((n, 0), dtype=np.complex128) if keep_basis else None)

    V = np.zeros((n, max_iter + 1), dtype=np.complex128)
    R = np.zeros((max_iter + 1, max_iter), dtype=np.complex128)
    cs = np.zeros(max_iter)
    sn = np.zeros(max_iter, dtype=np.complex128)
    g = np.zeros(max_iter + 1, dtype=np.complex128)
    g[0] = beta
    V[:, 0] = r0 / beta
    history = []
    converged = happy = stagnated = False
    slow = 0
    k = 0
    for j in range(max_iter):
        w = op(V[:, j])
        norm_in = np.linalg.norm(w)
        for i in range(j + 1):
            h = np.vdot(V[:, i], w)
            R[i, j] = h
            w -= h * V[:, i]
        norm_out = np.linalg.norm(w)
        if norm_out < REORTH_RATIO * norm_in:
            for i in range(j + 1):
                h = np.vdot(V[:, i], w)
                R[i, j] += h
                w -= h * V[:, i]
            norm_out = np.linalg.norm(w)
        h_next = norm_out
        for i in range(j):
            top = cs[i] * R[i, j] + sn[i] * R[i + 1, j]
            R[i + 1, j] = -np.conj(sn[i]) * R[i, j] + cs[i] * R[i + 1, j]
            R[i, j] = top
        c, s, r = _givens(R[j, j], h_next)
        cs[j], sn[j] = c, s
        R[j, j] = r
        g[j + 1] = -np.conj(s) * g[j]
        g[j] = c * g[j]
        res = abs(g[j + 1])
        prev = history[-1] if history else beta
        history.append(res)
        k = j + 1
        if h_next <= HAPPY_BREAKDOWN * max(norm_in, 1e-300):
            happy = True
            converged = True
            break
        if res <= tol:
            converged = True
            break
        if prev - res < STAGNATION_DECREASE * prev:
            slow += 1
            if slow >= STAGNATION_WINDOW:
                stagnated = True
                break
        else:
            slow = 0
        V[:, j + 1] = w / h_next

    coef = np.zeros(k, dtype=np.complex128)
    for i in range(k - 1, -1, -1):
        coef[i] = (g[i] - R[i, i + 1:k] @ coef[i + 1:k]) / R[i, i]
    q = V[:, :k] @ coef
    true_res = float(np.linalg.norm(r0 - precond(np.asarray(apply_op(q)))))
    final = float(history[-1])
    if happy:
        final = min(final, true_res)
    return SolveReport(
        solution=q,
        iterations=k,
        precond_residual_history=np.asarray(history, dtype=np.float64),
        converged=converged,
        final_precond_residual=final,
        true_precond_residual=true_res,
        initial_precond_residual=float(beta),
        stagnated=stagnated,
        happy_breakdown=happy,
        basis=V[:, :k].copy() if keep_basis else None,
    )
