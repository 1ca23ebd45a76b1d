"""Hankel structure: generators, the structure matrix and the eigmap operator.

An ``n x n`` Hankel matrix is stored through its generator ``c`` of length
``2n - 1``, with ``H[i, j] = c[i + j]`` (zero-based). Perturbations ``z`` use
the same parameterization, so ``Delta H`` is Hankel by construction.

Vectorization is column-major throughout: ``vec(M)`` stacks the columns of
``M``, i.e. ``M.ravel(order="F")``.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionMismatch, InvalidEigenpair, NotHankel

__all__ = [
    "HankelGenerator",
    "Eigenpair",
    "hankel_from_generator",
    "generator_of",
    "build_structure_matrix",
    "antidiag_weights",
    "weighted_frobenius_norm",
    "hankel_matvec",
    "eigmap_apply",
    "eigmap_matrix",
    "eigpair_residual",
]


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True).reshape(-1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HankelGenerator:
    """Anti-diagonal values of a real ``n x n`` Hankel matrix."""

    c: np.ndarray

    def __post_init__(self):
        c = _frozen(self.c, float)
        if c.size == 0 or c.size % 2 == 0:
            raise DimensionMismatch(
                f"generator length must be 2n - 1 for some n >= 1, got {c.size}"
            )
        object.__setattr__(self, "c", c)

    @property
    def n(self):
        return (self.c.size + 1) // 2

    def dense(self):
        return hankel_from_generator(self)


@dataclass(frozen=True, eq=False)
class Eigenpair:
    """Prescribed eigenvalue ``lam`` and nonzero eigenvector ``x`` (complex)."""

    lam: complex
    x: np.ndarray

    def __post_init__(self):
        x = _frozen(self.x, complex)
        if x.size == 0 or not np.all(np.isfinite(x)):
            raise InvalidEigenpair("eigenvector must be a nonempty finite vector")
        if not np.any(x != 0):
            raise InvalidEigenpair("eigenvector must be nonzero")
        lam = complex(self.lam)
        if not np.isfinite(lam):
            raise InvalidEigenpair("eigenvalue must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "lam", lam)

    @property
    def n(self):
        return self.x.size

    @property
    def is_real(self):
        return self.lam.imag == 0 and not np.any(self.x.imag)


def _as_generator(g):
    if isinstance(g, HankelGenerator):
        return g.c
    c = np.asarray(g)
    if c.ndim != 1 or c.size % 2 == 0:
        raise DimensionMismatch(f"generator length must be odd, got shape {c.shape}")
    return c


def hankel_from_generator(g):
    """Dense Hankel matrix with ``M[i, j] = c[i + j]``.

    Accepts a :class:`HankelGenerator` or any odd-length 1-D array (real or
    complex, so it also reconstructs perturbations ``z``).
    """
    c = _as_generator(g)
    n = (c.size + 1) // 2
    return sliding_window_view(c, n).copy()


def generator_of(M, tol=0.0):
    """Recover the generator of a dense Hankel matrix.

    Each anti-diagonal is summarized by its mean; the matrix is accepted
    when the spread (max - min) of every anti-diagonal is at most ``tol``.

    Raises
    ------
    NotHankel
        On the first anti-diagonal whose spread exceeds ``tol``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    # flip columns so anti-diagonal k becomes diagonal offset n - 1 - k
    F = M[:, ::-1]
    c = np.empty(2 * n - 1)
    for k in range(2 * n - 1):
        d = np.diagonal(F, offset=n - 1 - k)
        spread = np.ptp(d)
        if spread > tol:
            raise NotHankel(k, spread)
        # the mean of equal floats is not always bit-exact
        c[k] = d[0] if spread == 0 else d.mean()
    return HankelGenerator(c)


def build_structure_matrix(n):
    """Explicit 0/1 structure matrix ``S`` with ``vec(H) = S @ c``.

    Shape ``(n*n, 2n - 1)``. Row ``j*n + i`` (column-major position of
    ``H[i, j]``) has its single one in column ``i + j``. Intended for tests
    and small ``n`` only.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    rows = (j * n + i).ravel()
    cols = (i + j).ravel()
    S = np.zeros((n * n, 2 * n - 1))
    S[rows, cols] = 1.0
    return S


def antidiag_weights(n):
    """Number of entries on each anti-diagonal: ``min(k, 2n - k)``, k = 1..2n-1.

    These are the diagonal of ``S.T @ S``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, 2 * n)
    return np.minimum(k, 2 * n - k)


def weighted_frobenius_norm(z, w):
    """Frobenius norm of the Hankel matrix generated by ``z``."""
    z = np.asarray(z)
    w = np.asarray(w)
    if z.shape != w.shape:
        raise DimensionMismatch(f"z has shape {z.shape}, weights {w.shape}")
    return float(np.sqrt(np.sum(w * np.abs(z) ** 2)))


def hankel_matvec(c, x):
    """``hankel_from_generator(c) @ x`` without forming the matrix."""
    c = _as_generator(c)
    x = np.asarray(x)
    n = (c.size + 1) // 2
    if x.shape != (n,):
        raise DimensionMismatch(f"x must have length {n}, got shape {x.shape}")
    return sliding_window_view(c, n) @ x


def eigmap_apply(x, z):
    """``Delta H @ x`` where ``Delta H`` is the Hankel matrix generated by ``z``.

    Linear in ``z``; equals ``eigmap_matrix(x) @ z``.
    """
    return hankel_matvec(z, x)


def eigmap_matrix(x, n=None):
    """Matrix ``C`` of shape ``(n, 2n - 1)`` with ``C @ z = hankel(z) @ x``.

    ``C[i, k]`` sums ``x[j]`` over ``i + j = k``, so row ``i`` is ``x``
    shifted right by ``i`` places. This is ``(x^T kron I_n) S`` under
    column-major vec.
    """
    x = np.asarray(x)
    if n is None:
        n = x.size
    if x.shape != (n,):
        raise DimensionMismatch(f"x must have length {n}, got shape {x.shape}")
    dtype = np.result_type(x.dtype, float)
    C = np.zeros((n, 2 * n - 1), dtype=dtype)
    for i in range(n):
        C[i, i:i + n] = x
    return C


def eigpair_residual(g, pair):
    """Eigenpair residual ``r = lam * x - H @ x`` (complex)."""
    c = _as_generator(g)
    if pair.n != (c.size + 1) // 2:
        raise DimensionMismatch(
            f"eigenvector length {pair.n} does not match n = {(c.size + 1) // 2}"
        )
    return pair.lam * pair.x - hankel_matvec(c, pair.x)
