"""Dense real/complex linear algebra used by the condition-number engine.

Matrices are plain numpy arrays. Real inputs stay ``float64``; complex inputs
are ``complex128``. Every routine is a pure function of its arguments.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LinAlgFailure, PreconditionError

__all__ = [
    "LinAlgFailure",
    "PreconditionError",
    "SvdResult",
    "as_matrix",
    "default_rank_tol",
    "frobenius_norm",
    "operator_norm",
    "orthonormal_complement_basis",
    "pseudoinverse",
    "realify",
    "singular_values",
    "realify_vector",
    "complexify_vector",
    "svd",
]


@dataclass(frozen=True)
class SvdResult:
    left_factor: np.ndarray
    singular_values: np.ndarray
    right_factor_transposed: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u, s, vt = self.left_factor, self.singular_values, self.right_factor_transposed
        k = s.shape[0]
        return (u[:, :k] * s) @ vt[:k, :]


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D float64 or complex128 array."""
    a = np.asarray(m)
    if a.ndim != 2:
        raise PreconditionError(f"expected a 2-D matrix, got shape {a.shape}")
    a = a.astype(np.complex128 if np.iscomplexobj(a) else np.float64, copy=False)
    if not np.all(np.isfinite(a)):
        raise PreconditionError("matrix has non-finite entries")
    return a


def svd(m, full_matrices: bool = True) -> SvdResult:
    a = as_matrix(m)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise LinAlgFailure(f"SVD did not converge for {a.shape[0]}x{a.shape[1]} matrix") from exc
    return SvdResult(u, s, vt)


def singular_values(m) -> np.ndarray:
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros(0)
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise LinAlgFailure(f"SVD did not converge for {a.shape[0]}x{a.shape[1]} matrix") from exc


def default_rank_tol(m) -> float:
    return 1e-12 * max(np.shape(m))


def pseudoinverse(m, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse; singular values below ``rank_tol * sigma_1`` are dropped."""
    a = as_matrix(m)
    if rank_tol is None:
        rank_tol = default_rank_tol(a)
    if rank_tol <= 0:
        raise PreconditionError("rank_tol must be positive")
    if a.size == 0:
        return np.zeros(a.shape[::-1], dtype=a.dtype)
    res = svd(a, full_matrices=False)
    s = res.singular_values
    if s[0] == 0.0:
        return np.zeros(a.shape[::-1], dtype=a.dtype)
    keep = s > rank_tol * s[0]
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    vt, u = res.right_factor_transposed, res.left_factor
    return (vt.conj().T * inv) @ u.conj().T


def operator_norm(m) -> float:
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(as_matrix(m), "fro"))


def realify(m) -> np.ndarray:
    """Real 2r x 2c image of a complex r x c matrix; a+bi becomes [[a, -b], [b, a]].

    Real input is treated as a complex matrix with zero imaginary part.
    Column pairs act on interleaved (Re, Im) coordinates, see :func:`realify_vector`.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise PreconditionError(f"expected a 2-D matrix, got shape {a.shape}")
    r, c = a.shape
    out = np.empty((2 * r, 2 * c))
    out[0::2, 0::2] = a.real
    out[0::2, 1::2] = -a.imag
    out[1::2, 0::2] = a.imag
    out[1::2, 1::2] = a.real
    return out


def realify_vector(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128).ravel()
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def complexify_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size % 2:
        raise PreconditionError("interleaved real vector must have even length")
    return x[0::2] + 1j * x[1::2]


def orthonormal_complement_basis(v, field: str | None = None) -> np.ndarray:
    """Columns form an orthonormal basis of the orthogonal complement of ``v``.

    ``field`` is ``"real"`` or ``"complex"``; by default it follows the dtype
    of ``v``. The basis comes from a complete Householder QR of ``v``, so it is
    deterministic, but only the spanned subspace is meaningful.
    """
    v = np.asarray(v).ravel()
    if field is None:
        field = "complex" if np.iscomplexobj(v) else "real"
    if field not in ("real", "complex"):
        raise PreconditionError(f"unknown field {field!r}")
    dtype = np.complex128 if field == "complex" else np.float64
    if field == "real" and np.iscomplexobj(v) and np.any(v.imag != 0):
        raise PreconditionError("complex vector passed with field='real'")
    v = v.astype(dtype) if field == "complex" else v.real.astype(dtype)
    nv = np.linalg.norm(v)
    if not np.isfinite(nv) or nv == 0.0:
        raise PreconditionError("complement basis needs a nonzero finite vector")
    q, _ = np.linalg.qr((v / nv).reshape(-1, 1), mode="complete")
    return q[:, 1:]
