"""Kernel of a rank-r complex matrix, as a point of the Grassmannian."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import numlin
from ..condcore import ConditionMap, KappaReport
from ..errors import AmbiguousRankError, PreconditionError, TrackingFailure
from .base import ProblemAnalysis, complex_direction, engine_report, register_response


@dataclass(frozen=True, eq=False)
class KernelProblem:
    """``A`` (k x q) of rank ``rank`` with orthonormal kernel basis ``M`` (q x (q - rank))."""

    A: np.ndarray
    rank: int
    M: np.ndarray
    left: np.ndarray
    sigma: np.ndarray
    right: np.ndarray


def solve_kernel(A, rank: int, rank_tol: float | None = None) -> KernelProblem:
    A = numlin.as_matrix(A).astype(np.complex128)
    k, q = A.shape
    r = int(rank)
    if not 1 <= r < q or r > k:
        raise PreconditionError(f"rank must satisfy 1 <= r <= k and r < q, got r={r} for {k}x{q}")
    if rank_tol is None:
        rank_tol = numlin.default_rank_tol(A)
    res = numlin.svd(A)
    s = res.singular_values
    if s[0] == 0.0 or s[r - 1] <= rank_tol * s[0]:
        raise AmbiguousRankError(f"numerical rank below {r}", gap=float(s[r - 1] / max(s[0], 1e-300)))
    if r < s.size and s[r] > rank_tol * s[0]:
        raise AmbiguousRankError(f"numerical rank above {r}", gap=float(s[r] / s[0]))
    V = res.right_factor_transposed.conj().T
    return KernelProblem(A, r, V[:, r:], res.left_factor, s, V)


def tangent_basis(prob: KernelProblem) -> list[np.ndarray]:
    """Orthonormal basis ``u_i v_j^H`` (i < r or j < r) of the tangent space of rank-r matrices."""
    k, q = prob.A.shape
    r = prob.rank
    U, V = prob.left, prob.right
    return [np.outer(U[:, i], V[:, j].conj()) for i in range(k) for j in range(q) if i < r or j < r]


def build_kernel(A, rank: int, rank_tol: float | None = None, p_list=(2,)) -> ProblemAnalysis:
    prob = solve_kernel(A, rank, rank_tol)
    k, q = prob.A.shape
    r = prob.rank
    s = prob.sigma[:r]
    vr = prob.right[:, :r]
    a_pinv = (vr / s) @ prob.left[:, :r].conj().T

    basis = tangent_basis(prob)
    cols = [(-vr.conj().T @ a_pinv @ e @ prob.M).ravel() for e in basis]
    cmap = ConditionMap.from_matrix(np.column_stack(cols))

    ell = q - r
    fro = numlin.frobenius_norm(a_pinv)
    kf = math.sqrt(ell) * fro
    closed = KappaReport(numlin.operator_norm(a_pinv), kf, {2: kf / math.sqrt((k + q - r) * r)})
    return ProblemAnalysis(
        "kernel",
        prob,
        cmap,
        closed,
        engine_report(cmap, p_list),
        input_norm=numlin.frobenius_norm(prob.A),
        output_norm=1.0,
        solution=prob.M,
        notes={"pinv": a_pinv, "tangent_dim": len(basis)},
    )


@register_response("kernel")
def _respond(analysis, d, t):
    prob = analysis.instance
    basis = tangent_basis(prob)
    coef = complex_direction(d, len(basis))
    a_dot = sum(c * e for c, e in zip(coef, basis))
    res = numlin.svd(prob.A + t * a_dot)
    r = prob.rank
    m_new = res.right_factor_transposed.conj().T[:, r:]
    overlap = prob.M.conj().T @ m_new
    if numlin.singular_values(overlap)[-1] < 0.5:
        raise TrackingFailure("perturbed kernel is not close to the original subspace")
    # chart M + (horizontal space): representative X with M^H X = 0
    x = m_new @ np.linalg.inv(overlap) - prob.M
    return numlin.realify_vector(prob.right[:, :r].conj().T @ x)
