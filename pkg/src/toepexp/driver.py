"""Exact and inexact shift-and-invert Arnoldi runs, tolerance budget, sweeps.

The exact variant solves ``(I + gamma A) x = e_1`` and ``(I + gamma A) y = e_n``
to a preconditioned residual of 1e-14.  The inexact variant stops those
solves at::

    tol_sys = |gamma| tol_exp / (6 sqrt(m_cap) max(||fcol||_2, ||frow||_2))

with fcol/frow the first column/row of ``I + gamma A`` and ``m_cap = 100``.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import ZeroReference
from .gsf import build_gsf, gsf_condition_number, NormMode
from .krylov import approx_exponential, small_expm
from .validation import check_dense_cap, check_positive, check_vector

__all__ = [
    "EXACT_TOL_SYS", "ToleranceBudget", "RunReport", "Algorithm", "ReferenceMode",
    "tolerance_budget", "run_exact", "run_inexact", "run_algorithm",
    "residual_gap", "real_residual", "computed_residual", "relative_error",
    "reference_solution", "assumption_ratio", "gap_sweep", "bench", "condition_numbers",
]

EXACT_TOL_SYS = 1e-14
DEFAULT_M_CAP = 100
TIGHT_TOL_EXP = 1e-14


@dataclass(frozen=True)
class ToleranceBudget:
    tol_exp: float
    tol_sys: float
    gamma: float
    m_cap: int
    norm_factor: float


def tolerance_budget(T, gamma, tol_exp, m_cap=DEFAULT_M_CAP):
    """System tolerance licensed by `tol_exp` for the shifted matrix `T`.

    `T` must already be ``I + gamma A``; its first column and row give the
    2-norm proxy for ``||I + gamma A||_2``.
    """
    tol_exp = check_positive(tol_exp, "tol_exp")
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    m_cap = int(m_cap)
    if m_cap < 1:
        raise ValueError("m_cap must be >= 1")
    norm_factor = max(float(np.linalg.norm(T.first_col)), float(np.linalg.norm(T.first_row)))
    tol_sys = abs(gamma) * tol_exp / (6.0 * np.sqrt(m_cap) * norm_factor)
    return ToleranceBudget(tol_exp=tol_exp, tol_sys=tol_sys, gamma=float(gamma),
                           m_cap=m_cap, norm_factor=norm_factor)


class Algorithm(str, Enum):
    EXACT = "exact"
    INEXACT = "inexact"


@dataclass
class RunReport:
    """One exponential computation plus its diagnostics."""

    algorithm: Algorithm
    expm_result: object
    gsf_solve_iters: tuple
    tol_sys: float
    relative_error: float = None
    wall_times: dict = field(default_factory=dict)
    residual_gap: float = None
    budget: ToleranceBudget = None
    assumption_ratio: float = None
    gsf: object = field(default=None, repr=False)

    @property
    def y(self):
        return self.expm_result.y_m

    def summary(self):
        res = self.expm_result
        out = {
            "algorithm": self.algorithm.value,
            "tol_exp": res.tol_exp_used,
            "tol_sys": self.tol_sys,
            "m": res.m,
            "converged": res.converged,
            "breakdown": res.breakdown,
            "final_residual": float(res.residual_history[-1]) if len(res.residual_history) else 0.0,
            "gsf_solve_iters": list(self.gsf_solve_iters),
            "relative_error": self.relative_error,
            "residual_gap": self.residual_gap,
            "assumption_ratio": self.assumption_ratio,
        }
        if self.budget is not None:
            out["budget"] = {
                "tol_exp": self.budget.tol_exp, "tol_sys": self.budget.tol_sys,
                "gamma": self.budget.gamma, "m_cap": self.budget.m_cap,
                "norm_factor": self.budget.norm_factor,
            }
        return out


def assumption_ratio(T, result):
    """``||I + gamma A||_1 / (||H_m^{-1}||_2 ||u_m||_2)``.

    The practical tolerance assumes this ratio is O(1).
    """
    denom = np.linalg.norm(result.hinv, 2) * np.linalg.norm(result.u_m)
    if denom == 0:
        return float("inf")
    return float(T.one_norm() / denom)


def run_algorithm(A, v, t, gamma, tol_exp, tol_sys, algorithm, m_max=DEFAULT_M_CAP,
                  reference=None, verify=False, budget=None, max_iter=None):
    """Build the GSF of ``I + gamma A`` at `tol_sys` and run Arnoldi with it."""
    v = check_vector(v, A.n)
    gamma = check_positive(gamma, "gamma")
    T = A.shifted(gamma)
    t0 = time.perf_counter()
    G = build_gsf(T, tol_sys, max_iter=max_iter)
    t1 = time.perf_counter()
    res = approx_exponential(T, G.apply, v, t, gamma, tol_exp, m_max=m_max)
    t2 = time.perf_counter()
    res.tol_sys_used = tol_sys
    report = RunReport(
        algorithm=Algorithm(algorithm), expm_result=res,
        gsf_solve_iters=tuple(r.iterations for r in G.solve_reports),
        tol_sys=tol_sys, budget=budget, gsf=G,
        wall_times={"solve_systems": t1 - t0, "arnoldi": res.timings["arnoldi"],
                    "small_expm": res.timings["small_expm"], "total": t2 - t0},
        assumption_ratio=assumption_ratio(T, res),
    )
    if reference is not None:
        report.relative_error = relative_error(reference, res.y_m)
    if verify:
        report.residual_gap = residual_gap(A, res)
    return report


def run_exact(A, v, t, gamma, tol_exp, **kwargs):
    """Solve the two Toeplitz systems to 1e-14, then run Arnoldi."""
    return run_algorithm(A, v, t, gamma, tol_exp, EXACT_TOL_SYS, Algorithm.EXACT, **kwargs)


def run_inexact(A, v, t, gamma, tol_exp, m_cap=DEFAULT_M_CAP, **kwargs):
    """Solve the two Toeplitz systems only to the budgeted tolerance."""
    budget = tolerance_budget(A.shifted(gamma), gamma, tol_exp, m_cap)
    return run_algorithm(A, v, t, gamma, tol_exp, budget.tol_sys, Algorithm.INEXACT,
                         budget=budget, **kwargs)


def real_residual(A, result):
    """``-A V_m u_m - V_m u_m'``, formed with an explicit Toeplitz product."""
    V = result.state.basis
    return -A.matvec(V @ result.u_m) - V @ result.du_m


def computed_residual(result, T):
    """``(h_{m+1,m}/gamma) (e_m^T H_m^{-1} u_m) (I + gamma A) v_{m+1}``; zero on breakdown."""
    state = result.state
    if state.breakdown:
        return np.zeros(state.n, dtype=np.complex128)
    scalar = state.subdiagonal / state.gamma * (result.hinv[-1, :] @ result.u_m)
    return scalar * T.matvec(state.next_vector)


def residual_gap(A, result, t=None, gamma=None):
    """``||r_real - r_comp||_2`` for a finished run.

    `result` must have been produced with ``keep_state=True``.  `t` and
    `gamma` default to the values stored on the result.
    """
    if result.state is None:
        raise ValueError("residual_gap needs the Arnoldi state; run with keep_state=True")
    gamma = result.gamma if gamma is None else gamma
    if t is not None and result.t is not None and t != result.t:
        raise ValueError(f"result was computed at t={result.t}, not t={t}")
    T = A.shifted(gamma)
    return float(np.linalg.norm(real_residual(A, result) - computed_residual(result, T)))


def relative_error(y_ref, y_m):
    """``||y_ref - y_m||_2 / ||y_ref||_2``."""
    y_ref = check_vector(y_ref, name="y_ref")
    y_m = check_vector(y_m, y_ref.shape[0], name="y_m")
    denom = np.linalg.norm(y_ref)
    if denom == 0:
        raise ZeroReference("reference solution has zero norm")
    return float(np.linalg.norm(y_ref - y_m) / denom)


class ReferenceMode(str, Enum):
    DENSE_EXPM = "dense_expm"
    TIGHT_ARNOLDI = "tight_arnoldi"


def reference_solution(A, v, t, mode=ReferenceMode.DENSE_EXPM, gamma=0.1):
    """Reference ``exp(-tA) v``.

    ``dense_expm`` exponentiates the materialized matrix with the same
    Pade routine used on the small Hessenberg matrices; ``tight_arnoldi``
    runs the exact algorithm at ``tol_exp = 1e-14`` (the only option once n
    exceeds the dense cap).
    """
    v = check_vector(v, A.n)
    mode = ReferenceMode(mode)
    if mode is ReferenceMode.DENSE_EXPM:
        check_dense_cap(A.n)
        return small_expm(-t * A.to_dense()) @ v
    return run_exact(A, v, t, gamma, TIGHT_TOL_EXP, m_max=200).y


def _map(fn, items, n_jobs):
    if n_jobs is None or n_jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def gap_sweep(A, v, t, gamma, tol_exp_list, reference=None, m_cap=DEFAULT_M_CAP,
              n_jobs=1):
    """Inexact runs over a list of tolerances, one row per tolerance.

    Rows are returned in input order whatever `n_jobs` is.
    """
    v = check_vector(v, A.n)

    def cell(tol_exp):
        rep = run_inexact(A, v, t, gamma, tol_exp, m_cap=m_cap, reference=reference,
                          verify=True)
        return {"tol_exp": tol_exp, "tol_sys": rep.tol_sys, "gap": rep.residual_gap,
                "error": rep.relative_error, "m": rep.expm_result.m, "report": rep}

    return _map(cell, list(tol_exp_list), n_jobs)


def bench(A, v, t, gamma, tol_exp, reference=None, m_cap=DEFAULT_M_CAP):
    """Exact and inexact runs side by side (one row each)."""
    rows = []
    for rep in (run_exact(A, v, t, gamma, tol_exp, reference=reference),
                run_inexact(A, v, t, gamma, tol_exp, m_cap=m_cap, reference=reference)):
        rows.append({"algorithm": rep.algorithm.value, "tol_sys": rep.tol_sys,
                     "error": rep.relative_error, "m": rep.expm_result.m,
                     "iters": rep.gsf_solve_iters, "report": rep})
    return rows


def condition_numbers(T, tol_sys=EXACT_TOL_SYS, with_dense=True):
    """GSF condition numbers of `T` (proxy and exact norms) and, if the dense
    cap allows, the classical ``kappa_1``."""
    t0 = time.perf_counter()
    G = build_gsf(T, tol_sys)
    proxy = gsf_condition_number(G, T, NormMode.COLROW_PROXY)
    exact = gsf_condition_number(G, T, NormMode.EXACT_1NORM)
    t1 = time.perf_counter()
    out = {"n": T.n, "kappa_gsf_proxy": proxy, "kappa_gsf_exact": exact,
           "gsf": G, "gsf_seconds": t1 - t0, "kappa_1": None, "dense_seconds": None}
    if with_dense:
        try:
            check_dense_cap(T.n)
        except MemoryError:
            return out
        D = T.to_dense()
        out["kappa_1"] = float(np.linalg.norm(D, 1) * np.linalg.norm(np.linalg.inv(D), 1))
        out["dense_seconds"] = time.perf_counter() - t1
    return out
