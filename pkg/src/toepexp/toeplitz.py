"""Implicit Toeplitz matrices with FFT matvecs via circulant embedding.

A Toeplitz matrix ``T`` with ``T[i, j] = t_{i-j}`` is stored through its
first column ``(t_0, t_1, ..., t_{n-1})`` and first row
``(t_0, t_{-1}, ..., t_{1-n})``.  Products ``T @ v`` are formed by embedding
``T`` in a circulant of length ``L`` (the smallest power of two >= 2n - 1),
so each product costs two FFTs of length ``L`` once the embedding spectrum
is cached.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DiagonalMismatch, DimensionMismatch
from .validation import check_block, check_dense_cap, check_vector

__all__ = [
    "ToeplitzMatrix", "SymbolKind", "SymbolSpec", "from_columns", "from_symbol",
    "fourier_coefficients", "embedding_length", "embedding_spectrum",
    "one_norm_vec", "two_norm_vec", "read_matrix", "write_matrix", "as_toeplitz",
]

DIAGONAL_ATOL = 1e-14


def embedding_length(n):
    """Smallest power of two that is >= 2n - 1."""
    if n < 1:
        raise ValueError("n must be positive")
    return 1 << max(0, (2 * n - 2).bit_length())


def embedding_spectrum(first_col, first_row, L):
    """DFT of the length-L circulant column embedding a Toeplitz matrix.

    The column is ``[t_0, ..., t_{n-1}, 0, ..., 0, t_{1-n}, ..., t_{-1}]``.
    """
    n = len(first_col)
    c = np.zeros(L, dtype=np.complex128)
    c[:n] = first_col
    if n > 1:
        c[L - n + 1:] = first_row[:0:-1]
    return np.fft.fft(c)


class ToeplitzMatrix:
    """An n x n complex Toeplitz matrix held by its first column and row.

    Instances are treated as immutable.  The circulant embedding spectrum is
    computed on first use and cached; concurrent first uses may both compute
    it, but they compute the same array and the last assignment wins.
    """

    __array_priority__ = 20

    def __init__(self, first_col, first_row):
        col = check_vector(first_col, name="first_col")
        row = check_vector(first_row, name="first_row")
        if col.shape[0] != row.shape[0]:
            raise DimensionMismatch(
                f"first_col has length {col.shape[0]} but first_row has {row.shape[0]}")
        if col.shape[0] < 1:
            raise DimensionMismatch("a Toeplitz matrix needs n >= 1")
        if abs(col[0] - row[0]) > DIAGONAL_ATOL:
            raise DiagonalMismatch(
                f"first_col[0] = {col[0]} differs from first_row[0] = {row[0]}")
        row = row.copy()
        row[0] = col[0]
        col = col.copy()
        col.flags.writeable = False
        row.flags.writeable = False
        self._col = col
        self._row = row
        self._spectrum = None

    @property
    def n(self):
        return self._col.shape[0]

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def first_col(self):
        return self._col

    @property
    def first_row(self):
        return self._row

    @property
    def embed_length(self):
        return embedding_length(self.n)

    @property
    def embed_spectrum(self):
        """Cached DFT of the circulant-embedding column (length L)."""
        spec = self._spectrum
        if spec is None:
            spec = embedding_spectrum(self._col, self._row, self.embed_length)
            spec.flags.writeable = False
            self._spectrum = spec
        return spec

    @property
    def has_cached_spectrum(self):
        return self._spectrum is not None

    @property
    def is_real(self):
        return not (np.any(self._col.imag) or np.any(self._row.imag))

    def __repr__(self):
        return f"ToeplitzMatrix(n={self.n})"

    def entry(self, i, j):
        return self._col[i - j] if i >= j else self._row[j - i]

    def matvec(self, v):
        """Return ``T @ v`` for a vector of length n."""
        v = check_vector(v, self.n)
        return self._apply(v[:, None])[:, 0]

    def matmat(self, V):
        """Return ``T @ V`` for an (n, k) block (or a single vector)."""
        V = check_block(V, self.n)
        return self._apply(V)

    def _apply(self, V):
        L = self.embed_length
        prod = np.fft.ifft(self.embed_spectrum[:, None] * np.fft.fft(V, n=L, axis=0), axis=0)
        return prod[:self.n]

    def __matmul__(self, other):
        other = np.asarray(other)
        if other.ndim == 1:
            return self.matvec(other)
        return self.matmat(other)

    def to_dense(self):
        """Explicit n x n matrix; refuses above the configured dense cap."""
        check_dense_cap(self.n, "Toeplitz matrix")
        n = self.n
        # diag[k + n - 1] = t_k for k = 1-n .. n-1
        diag = np.concatenate([self._row[:0:-1], self._col])
        idx = np.arange(n)
        return diag[(idx[:, None] - idx[None, :]) + n - 1]

    def one_norm(self):
        """Exact induced 1-norm in O(n).

        Column j sums |t_k| for k in [-j, n-1-j]; these windows are read off a
        prefix sum over the 2n-1 diagonals.
        """
        n = self.n
        mags = np.abs(np.concatenate([self._row[:0:-1], self._col]))
        prefix = np.concatenate([[0.0], np.cumsum(mags)])
        j = np.arange(n)
        # diagonal k sits at position k + n - 1 of `mags`
        lo = -j + n - 1
        hi = (n - 1 - j) + n - 1
        return float(np.max(prefix[hi + 1] - prefix[lo]))

    def one_norm_proxy(self):
        """``max(||first_col||_1, ||first_row||_1)``, a cheap stand-in for ||T||_1."""
        return max(one_norm_vec(self._col), one_norm_vec(self._row))

    def shifted(self, gamma):
        """Return ``I + gamma * self``."""
        col = gamma * self._col
        row = gamma * self._row
        col[0] += 1.0
        row[0] = col[0]
        return ToeplitzMatrix(col, row)

    def scaled(self, alpha):
        return ToeplitzMatrix(alpha * self._col, alpha * self._row)

    @classmethod
    def identity(cls, n):
        e = np.zeros(n)
        e[0] = 1.0
        return cls(e, e)


def from_columns(first_col, first_row):
    """Build a :class:`ToeplitzMatrix`; no spectrum is cached yet."""
    return ToeplitzMatrix(first_col, first_row)


class SymbolKind(str, Enum):
    THETA_SQUARED = "theta_squared"
    THETA_SQUARED_PLUS_I_THETA_CUBED = "theta_squared_plus_i_theta_cubed"
    PARTER = "parter"


_SYMBOL_FUNCS = {
    SymbolKind.THETA_SQUARED: lambda th: th ** 2,
    SymbolKind.THETA_SQUARED_PLUS_I_THETA_CUBED: lambda th: th ** 2 + 1j * th ** 3,
}


@dataclass(frozen=True)
class SymbolSpec:
    """Which generating function to use and how to get its coefficients.

    ``coefficients`` is ``"analytic"`` (closed-form Fourier coefficients) or
    ``"quadrature"`` (FFT trapezoid rule on ``quadrature_size`` points,
    default ``8 * n``).  Parter matrices ignore both fields.
    """

    kind: SymbolKind
    quadrature_size: int = None
    coefficients: str = "analytic"

    def __post_init__(self):
        object.__setattr__(self, "kind", SymbolKind(self.kind))
        if self.coefficients not in ("analytic", "quadrature"):
            raise ValueError(f"unknown coefficient method {self.coefficients!r}")
        if self.quadrature_size is not None and self.quadrature_size < 1:
            raise ValueError("quadrature_size must be positive")


def fourier_coefficients(func, n, quadrature_size):
    """Coefficients ``a_k``, ``|k| < n``, of a 2*pi-periodic function on [-pi, pi].

    ``a_k = (1/2pi) * integral f(theta) exp(-i k theta) dtheta`` evaluated by the
    trapezoid rule on `quadrature_size` equispaced nodes, i.e. one FFT.  The
    node at -pi takes the average of f(-pi) and f(pi), which is what the
    trapezoid rule sees for symbols whose periodic extension jumps there.

    Returns ``(col, row)`` with ``col[k] = a_k`` and ``row[k] = a_{-k}``.
    """
    N = int(quadrature_size)
    if N < 2 * n - 1:
        raise ValueError(f"quadrature_size {N} cannot resolve {2 * n - 1} coefficients")
    theta = -np.pi + 2 * np.pi * np.arange(N) / N
    samples = np.asarray(func(theta), dtype=np.complex128)
    samples[0] = 0.5 * (func(np.array([-np.pi]))[0] + func(np.array([np.pi]))[0])
    # theta_j = -pi + 2 pi j / N  =>  exp(-i k theta_j) = (-1)^k exp(-2 pi i k j / N)
    spec = np.fft.fft(samples) / N
    k = np.arange(n)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    col = sign * spec[k]
    row = sign * spec[(-k) % N]
    return col, row


def _analytic_coefficients(kind, n):
    k = np.arange(1, n, dtype=np.float64)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    a0 = np.pi ** 2 / 3
    even = 2 * sign / k ** 2
    if kind is SymbolKind.THETA_SQUARED:
        return np.r_[a0, even], np.r_[a0, even]
    # coefficient of i*theta^3 at +k is -(-1)^k (pi^2/k - 6/k^3); odd in k
    odd = -sign * (np.pi ** 2 / k - 6 / k ** 3)
    return np.r_[a0, even + odd], np.r_[a0, even - odd]


def from_symbol(spec, n):
    """Toeplitz matrix generated by a symbol (or the Parter matrix).

    `spec` may be a :class:`SymbolSpec`, a :class:`SymbolKind`/string, or a
    callable ``f(theta)`` on [-pi, pi], which always goes through quadrature.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if callable(spec) and not isinstance(spec, (SymbolSpec, SymbolKind, str)):
        col, row = fourier_coefficients(spec, n, 8 * n)
        return ToeplitzMatrix(col, row)
    if not isinstance(spec, SymbolSpec):
        spec = SymbolSpec(SymbolKind(spec))
    if spec.kind is SymbolKind.PARTER:
        k = np.arange(n, dtype=np.float64)
        return ToeplitzMatrix(1.0 / (k + 0.5), 1.0 / (0.5 - k))
    if spec.coefficients == "analytic":
        col, row = _analytic_coefficients(spec.kind, n)
    else:
        N = spec.quadrature_size or 8 * n
        col, row = fourier_coefficients(_SYMBOL_FUNCS[spec.kind], n, N)
    return ToeplitzMatrix(col, row)


def one_norm_vec(v):
    """Correctly rounded 1-norm (``math.fsum``, independent of summation order)."""
    return math.fsum(np.abs(np.asarray(v)).ravel().tolist())


def two_norm_vec(v):
    """2-norm with the squared moduli summed by ``math.fsum``."""
    a = np.abs(np.asarray(v)).ravel()
    scale = float(a.max()) if a.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    return scale * math.sqrt(math.fsum(((a / scale) ** 2).tolist()))


def _fmt(z):
    return f"{z.real:.17g} {z.imag:.17g}"


def write_matrix(T, path_or_file):
    """Write ``n``, then n ``re im`` lines of first_col, then n of first_row."""
    lines = [str(T.n)]
    lines += [_fmt(z) for z in T.first_col]
    lines += [_fmt(z) for z in T.first_row]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)


def read_matrix(path_or_file):
    """Inverse of :func:`write_matrix`."""
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ValueError(f"first line must be the dimension n, got {lines[0]!r}")
    if n < 1 or len(lines) != 2 * n + 1:
        raise ValueError(f"expected {2 * n + 1} non-empty lines for n={n}, got {len(lines)}")
    vals = np.empty(2 * n, dtype=np.complex128)
    for i, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"line {i + 2}: expected 're im', got {ln!r}")
        vals[i] = complex(float(parts[0]), float(parts[1]))
    return ToeplitzMatrix(vals[:n], vals[n:])


def as_toeplitz(X, atol=0.0):
    """Coerce `X` to a :class:`ToeplitzMatrix`.

    Accepts a ToeplitzMatrix, a ``(first_col, first_row)`` pair, or a square
    dense array whose diagonals are constant to within `atol`.
    """
    if isinstance(X, ToeplitzMatrix):
        return X
    if isinstance(X, tuple) and len(X) == 2:
        return ToeplitzMatrix(*X)
    D = np.asarray(X)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {D.shape}")
    n = D.shape[0]
    if n == 0:
        raise DimensionMismatch("a Toeplitz matrix needs n >= 1")
    diag = np.concatenate([D[0, :0:-1], D[:, 0]])
    idx = np.arange(n)
    dev = float(np.max(np.abs(diag[idx[:, None] - idx[None, :] + n - 1] - D)))
    if dev > atol:
        raise ValueError(f"matrix is not Toeplitz (diagonal deviation {dev:.3e} > {atol:g})")
    return ToeplitzMatrix(D[:, 0], D[0, :])
