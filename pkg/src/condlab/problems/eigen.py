"""Simple eigenvalues and eigenvectors of a complex square matrix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .. import numlin
from ..condcore import ConditionMap, KappaReport
from ..errors import PreconditionError, SigmaError, TrackingFailure
from .base import ProblemAnalysis, checked_inverse, complex_direction, engine_report, register_response


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Matrix ``A`` with a selected simple eigenvalue.

    ``v`` and ``u`` are unit right and left eigenvectors:
    ``A v = lam v`` and ``u^H A = lam u^H``.
    """

    A: np.ndarray
    which: int
    eigenvalue: complex
    v: np.ndarray
    u: np.ndarray
    gap: float


@dataclass(frozen=True, eq=False)
class EigenAnalysis:
    pair: EigenPair
    eigenvector: ProblemAnalysis
    eigenvalue: ProblemAnalysis


def eigen_order(w: np.ndarray) -> list[int]:
    """Indices sorted by descending modulus, ties broken by argument."""
    return sorted(range(w.size), key=lambda i: (-round(abs(w[i]), 12), float(np.angle(w[i]))))


def solve_eigenpair(A, which: int = 0) -> EigenPair:
    A = numlin.as_matrix(A).astype(np.complex128)
    n = A.shape[0]
    if A.shape != (n, n) or n < 2:
        raise PreconditionError(f"need a square matrix of size >= 2, got {A.shape}")
    w, vl, vr = scipy.linalg.eig(A, left=True, right=True)
    order = eigen_order(w)
    if not 0 <= which < n:
        raise IndexError(f"eigenvalue selector {which} outside 0..{n - 1}")
    i = order[which]
    lam = complex(w[i])
    gap = float(np.min(np.abs(np.delete(w, i) - lam)))
    scale = numlin.operator_norm(A)
    if gap <= 1e-8 * max(scale, np.finfo(float).tiny):
        raise SigmaError(f"eigenvalue {lam:.6g} is not simple (gap {gap:.3e})", gap=gap)
    v = vr[:, i] / np.linalg.norm(vr[:, i])
    u = vl[:, i] / np.linalg.norm(vl[:, i])
    return EigenPair(A, which, lam, v, u, gap)


def build_eigen(A, which: int = 0, p_list=(2,)) -> EigenAnalysis:
    pair = solve_eigenpair(A, which)
    A, lam, v, u = pair.A, pair.eigenvalue, pair.v, pair.u
    n = A.shape[0]
    av = np.kron(np.eye(n), v.reshape(1, -1))  # row-major vec(Adot) -> Adot v

    basis = numlin.orthonormal_complement_basis(v)
    restricted = basis.conj().T @ (lam * np.eye(n) - A) @ basis
    r_inv = checked_inverse(restricted, "restriction of (lam I - A) to v-perp")
    vec_map = ConditionMap.from_matrix(r_inv @ basis.conj().T @ av)
    op, fro = numlin.operator_norm(r_inv), numlin.frobenius_norm(r_inv)
    vec_closed = KappaReport(op, fro, {2: fro / n})

    uv = complex(np.vdot(u, v))
    if abs(uv) == 0.0:
        raise SigmaError("left and right eigenvectors are orthogonal", gap=0.0)
    row = (np.outer(u.conj(), v).reshape(1, -1)) / uv
    val_map = ConditionMap.from_matrix(row)
    k2 = float(np.linalg.norm(u) * np.linalg.norm(v) / abs(uv))
    val_closed = KappaReport(k2, k2, {2: k2 / n})

    a_norm = numlin.frobenius_norm(A)
    vec = ProblemAnalysis(
        "eigenvector", pair, vec_map, vec_closed, engine_report(vec_map, p_list),
        input_norm=a_norm, output_norm=1.0, solution=v, notes={"basis": basis},
    )
    val = ProblemAnalysis(
        "eigenvalue", pair, val_map, val_closed, engine_report(val_map, p_list),
        input_norm=a_norm, output_norm=abs(lam), solution=lam,
    )
    return EigenAnalysis(pair, vec, val)


def _tracked(pair: EigenPair, d, t):
    n = pair.A.shape[0]
    a_new = pair.A + t * complex_direction(d, n * n).reshape(n, n)
    w, vr = scipy.linalg.eig(a_new)
    i = int(np.argmin(np.abs(w - pair.eigenvalue)))
    if abs(w[i] - pair.eigenvalue) >= 0.5 * pair.gap:
        raise TrackingFailure("perturbed eigenvalue left the isolating disc of the original one")
    return complex(w[i]), vr[:, i]


@register_response("eigenvalue")
def _respond_value(analysis, d, t):
    lam, _ = _tracked(analysis.instance, d, t)
    return numlin.realify_vector([lam - analysis.instance.eigenvalue])


@register_response("eigenvector")
def _respond_vector(analysis, d, t):
    pair = analysis.instance
    _, v_new = _tracked(pair, d, t)
    overlap = np.vdot(pair.v, v_new)
    if abs(overlap) < 0.5 * np.linalg.norm(v_new):
        raise TrackingFailure("perturbed eigenvector is far from the original direction")
    # affine chart v + v-perp: rescale so that <v, v_new> = 1
    v_new = v_new / overlap
    return numlin.realify_vector(analysis.notes["basis"].conj().T @ (v_new - pair.v))
