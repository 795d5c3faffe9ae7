"""Perturbation bounds for the Gohberg-Semencul inverse.

Given perturbed fundamental solutions ``x~``, ``y~`` with relative error at
most ``eps`` and ``eps_tilde = |1/xi_0 - 1/xi~_0| / |1/xi_0|``, the new
bounds share the amplification factor::

    c(eps, eps_tilde) = eps + (eps + (1 + eps) eps_tilde)(1 + eps)

and the Gutknecht-Hochbruck bounds are used in their machine-epsilon-free
form.  :func:`bound_report` evaluates all of them next to the true errors
from a dense oracle.
"""

from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .exceptions import XiZero
from .gsf import apply_inverse, build_gsf, gsf_dense
from .toeplitz import one_norm_vec
from .validation import check_dense_cap, check_vector

__all__ = [
    "NormKind", "PerturbationSpec", "BoundReport", "perturb_solutions",
    "amplification", "relative_xi0_error", "new_bound_abs_1norm",
    "new_bound_rel_1norm", "new_bound_abs_2norm", "new_bound_rel_2norm",
    "gh_bound_abs", "gh_bound_rel", "spectral_norm", "inverse_two_norm",
    "true_inverse_errors", "bound_report",
]

DENSE_SVD_LIMIT = 600
POWER_ITERATIONS = 20


class NormKind(str, Enum):
    ONE_NORM = "one_norm"
    TWO_NORM = "two_norm"


@dataclass(frozen=True)
class PerturbationSpec:
    epsilon: float
    norm_kind: NormKind = NormKind.ONE_NORM
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        object.__setattr__(self, "norm_kind", NormKind(self.norm_kind))


def _vec_norm(v, kind):
    return np.linalg.norm(v, 1) if kind is NormKind.ONE_NORM else np.linalg.norm(v)


def perturb_solutions(x, y, spec):
    """Return ``x + eps ||x|| f`` and ``y + eps ||y|| g``.

    ``f`` and ``g`` are independent standard normal draws from
    ``numpy.random.default_rng(spec.seed)`` (PCG64), each scaled to unit norm
    in ``spec.norm_kind``; ``f`` is drawn first.
    """
    x = check_vector(x, name="x")
    y = check_vector(y, name="y")
    rng = np.random.default_rng(spec.seed)
    out = []
    for v in (x, y):
        f = rng.standard_normal(v.shape[0])
        f /= _vec_norm(f, spec.norm_kind)
        if spec.epsilon == 0:
            out.append(v.copy())
        else:
            out.append(v + (spec.epsilon * _vec_norm(v, spec.norm_kind)) * f)
    return out[0], out[1]


def relative_xi0_error(xi0, xi0_tilde):
    """``|1/xi_0 - 1/xi~_0| / |1/xi_0|``."""
    if xi0 == 0 or xi0_tilde == 0:
        raise XiZero("xi_0 and its perturbation must be nonzero")
    return abs(1 / xi0 - 1 / xi0_tilde) / abs(1 / xi0)


def amplification(eps, eps_tilde):
    return eps + (eps + (1 + eps) * eps_tilde) * (1 + eps)


def _check_xi0(xi0):
    if xi0 == 0:
        raise XiZero("xi_0 = 0")


def new_bound_abs_1norm(eps, eps_tilde, x, y, xi0):
    """Upper bound on ``||T^{-1} - T~^{-1}||_1``."""
    _check_xi0(xi0)
    return abs(2 / xi0) * amplification(eps, eps_tilde) * one_norm_vec(x) * one_norm_vec(y)


def new_bound_rel_1norm(eps, eps_tilde, x, y, xi0):
    """Upper bound on ``||T^{-1} - T~^{-1}||_1 / ||T^{-1}||_1``."""
    _check_xi0(xi0)
    return abs(2 / xi0) * amplification(eps, eps_tilde) * min(one_norm_vec(x), one_norm_vec(y))


def new_bound_abs_2norm(eps, eps_tilde, x, y, xi0):
    # the 2-norm bound has exactly the 1-norm expression
    return new_bound_abs_1norm(eps, eps_tilde, x, y, xi0)


def new_bound_rel_2norm(eps, eps_tilde, x, y, xi0, n):
    """Upper bound on the relative 2-norm error; carries a sqrt(n) factor."""
    _check_xi0(xi0)
    return (abs(2 * np.sqrt(n) / xi0) * amplification(eps, eps_tilde)
            * min(one_norm_vec(x), one_norm_vec(y)))


def gh_bound_abs(eps, x, y, xi0, n):
    """Gutknecht-Hochbruck absolute bound, machine-precision terms dropped."""
    _check_xi0(xi0)
    return abs(4 * n / xi0) * np.linalg.norm(x) * np.linalg.norm(y) * eps


def gh_bound_rel(eps, xi0, n, inv_2norm):
    """Gutknecht-Hochbruck relative bound, machine-precision terms dropped."""
    _check_xi0(xi0)
    return abs(4 * n / xi0) * inv_2norm * eps


def spectral_norm(M):
    """Largest singular value of a dense matrix.

    Full SVD for small matrices; above ``DENSE_SVD_LIMIT`` rows ARPACK's
    ``svds`` (k=1) on the same dense matrix.
    """
    M = np.asarray(M)
    if min(M.shape) <= DENSE_SVD_LIMIT:
        return float(np.linalg.norm(M, 2))
    if not np.any(M):
        return 0.0
    s = scipy.sparse.linalg.svds(M, k=1, tol=1e-12, return_singular_vectors=False,
                                 random_state=0)
    return float(s[0])


def inverse_two_norm(T=None, G=None, dense_inverse=None):
    """``||T^{-1}||_2``.

    Uses the dense inverse when available (or ``T`` fits under the dense
    cap), otherwise 20 power iterations on ``T^{-*} T^{-1}`` with GSF
    applies for ``T^{-1}`` and ``T^{-*}``.
    """
    if dense_inverse is not None:
        return spectral_norm(dense_inverse)
    if T is not None:
        try:
            check_dense_cap(T.n)
            return spectral_norm(np.linalg.inv(T.to_dense()))
        except MemoryError:
            pass
    if G is None:
        raise ValueError("need a dense inverse, a matrix under the dense cap, or a GsfInverse")
    # Toeplitz inverses are persymmetric: T^{-T} = J T^{-1} J, J the reversal
    def adjoint_apply(w):
        return np.conj(apply_inverse(G, np.conj(w[::-1]))[::-1])

    v = np.random.default_rng(0).standard_normal(G.n).astype(np.complex128)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(POWER_ITERATIONS):
        w = adjoint_apply(apply_inverse(G, v))
        wn = np.linalg.norm(w)
        sigma = np.sqrt(wn)
        v = w / wn
    return float(sigma)


def true_inverse_errors(T, x_tilde, y_tilde, dense_inverse=None, inverse_norms=None):
    """Errors of the perturbed GSF inverse against a dense inverse of ``T``.

    Returns ``(abs_1norm, abs_2norm, rel_1norm, rel_2norm)``.  Pass
    ``inverse_norms=(||T^{-1}||_1, ||T^{-1}||_2)`` to skip recomputing them.
    """
    n = T.n
    check_dense_cap(n)
    if dense_inverse is None:
        dense_inverse = scipy.linalg.inv(T.to_dense())
    approx = gsf_dense(x_tilde, y_tilde)
    diff = dense_inverse - approx
    abs1 = float(np.max(np.abs(diff).sum(axis=0)))
    abs2 = spectral_norm(diff)
    if inverse_norms is None:
        inverse_norms = (float(np.max(np.abs(dense_inverse).sum(axis=0))),
                         spectral_norm(dense_inverse))
    inv1, inv2 = inverse_norms
    return abs1, abs2, abs1 / inv1, abs2 / inv2


@dataclass
class BoundReport:
    """One (matrix, eps, seed) cell of the bound comparison.

    ``true_*`` errors come from the 1-norm perturbation recipe (the one the
    new bounds assume); ``gh_true_*`` from the 2-norm recipe used for the
    Gutknecht-Hochbruck bounds.
    """

    n: int
    eps: float
    seed: int
    eps_tilde: float
    abs_bound_1norm: float
    rel_bound_1norm: float
    abs_bound_2norm: float
    rel_bound_2norm: float
    gh_eps_tilde: float
    gh_abs_bound_2norm: float
    gh_rel_bound_2norm: float
    true_abs_1norm: float
    true_rel_1norm: float
    true_abs_2norm: float
    true_rel_2norm: float
    gh_true_abs_2norm: float
    gh_true_rel_2norm: float
    inv_2norm: float

    def as_dict(self):
        return asdict(self)


def bound_report(T, eps, seed=0, x=None, y=None, dense_inverse=None, tol_sys=1e-14,
                 inverse_norms=None):
    """Evaluate every bound and the dense-oracle errors for one cell.

    ``x``/``y`` default to a high-accuracy GSF build (``tol_sys = 1e-14``).
    ``dense_inverse`` and ``inverse_norms`` let a sweep reuse one inversion
    across cells.
    """
    n = T.n
    if x is None or y is None:
        G = build_gsf(T, tol_sys)
        x, y = G.x, G.y
    xi0 = x[0]
    if dense_inverse is None:
        check_dense_cap(n)
        dense_inverse = scipy.linalg.inv(T.to_dense())
    if inverse_norms is None:
        inverse_norms = (float(np.max(np.abs(dense_inverse).sum(axis=0))),
                         spectral_norm(dense_inverse))
    inv1, inv2 = inverse_norms

    x1, y1 = perturb_solutions(x, y, PerturbationSpec(eps, NormKind.ONE_NORM, seed))
    et1 = relative_xi0_error(xi0, x1[0])
    abs1, abs2, rel1, rel2 = true_inverse_errors(T, x1, y1, dense_inverse, (inv1, inv2))

    x2, y2 = perturb_solutions(x, y, PerturbationSpec(eps, NormKind.TWO_NORM, seed))
    et2 = relative_xi0_error(xi0, x2[0])
    _, gabs2, _, grel2 = true_inverse_errors(T, x2, y2, dense_inverse, (inv1, inv2))

    return BoundReport(
        n=n, eps=eps, seed=seed, eps_tilde=et1,
        abs_bound_1norm=new_bound_abs_1norm(eps, et1, x, y, xi0),
        rel_bound_1norm=new_bound_rel_1norm(eps, et1, x, y, xi0),
        abs_bound_2norm=new_bound_abs_2norm(eps, et1, x, y, xi0),
        rel_bound_2norm=new_bound_rel_2norm(eps, et1, x, y, xi0, n),
        gh_eps_tilde=et2,
        gh_abs_bound_2norm=gh_bound_abs(eps, x, y, xi0, n),
        gh_rel_bound_2norm=gh_bound_rel(eps, xi0, n, inv2),
        true_abs_1norm=abs1, true_rel_1norm=rel1,
        true_abs_2norm=abs2, true_rel_2norm=rel2,
        gh_true_abs_2norm=gabs2, gh_true_rel_2norm=grel2,
        inv_2norm=inv2,
    )
