"""T. Chan's optimal circulant preconditioner."""

import numpy as np

from .exceptions import SingularPreconditioner
from .validation import check_block, check_vector

__all__ = ["CirculantOperator", "chan_preconditioner", "circ_solve", "circ_matvec"]

SINGULAR_THRESHOLD = 1e-300


class CirculantOperator:
    """n x n circulant diagonalized by the DFT.

    Parameters
    ----------
    eigenvalues : array_like
        DFT of the circulant's first column.
    check_singular : bool
        Raise :class:`SingularPreconditioner` when an eigenvalue magnitude is
        below ``1e-300``.
    """

    def __init__(self, eigenvalues, check_singular=True):
        eig = check_vector(eigenvalues, name="eigenvalues").copy()
        eig.flags.writeable = False
        self.eigenvalues = eig
        if check_singular:
            smallest = float(np.min(np.abs(eig)))
            if smallest < SINGULAR_THRESHOLD:
                raise SingularPreconditioner(
                    f"circulant has an eigenvalue of magnitude {smallest:.3e} "
                    f"(threshold {SINGULAR_THRESHOLD:g})")

    @classmethod
    def from_first_column(cls, c, check_singular=True):
        return cls(np.fft.fft(check_vector(c, name="c")), check_singular=check_singular)

    @property
    def n(self):
        return self.eigenvalues.shape[0]

    @property
    def first_column(self):
        return np.fft.ifft(self.eigenvalues)

    def matvec(self, v):
        V = check_block(v, self.n)
        out = np.fft.ifft(self.eigenvalues[:, None] * np.fft.fft(V, axis=0), axis=0)
        return out[:, 0] if np.ndim(v) == 1 else out

    def solve(self, b):
        B = check_block(b, self.n, name="b")
        out = np.fft.ifft(np.fft.fft(B, axis=0) / self.eigenvalues[:, None], axis=0)
        return out[:, 0] if np.ndim(b) == 1 else out

    def to_dense(self):
        c = self.first_column
        idx = np.arange(self.n)
        return c[(idx[:, None] - idx[None, :]) % self.n]


def chan_preconditioner(T):
    """Circulant closest to the Toeplitz matrix `T` in Frobenius norm.

    First column ``c_k = ((n - k) t_k + k t_{k-n}) / n``.
    """
    n = T.n
    k = np.arange(n)
    wrapped = np.zeros(n, dtype=np.complex128)
    # t_{k-n} = first_row[n - k] for k >= 1
    wrapped[1:] = T.first_row[:0:-1]
    c = ((n - k) * T.first_col + k * wrapped) / n
    return CirculantOperator.from_first_column(c)


def circ_solve(C, b):
    """Solve ``C x = b``."""
    return C.solve(b)


def circ_matvec(C, v):
    return C.matvec(v)
