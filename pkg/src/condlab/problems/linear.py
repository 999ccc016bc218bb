"""Linear systems ``A y = b`` with b fixed or perturbed together with A."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import numlin
from ..condcore import ConditionMap, KappaReport
from ..errors import PreconditionError
from .base import ProblemAnalysis, checked_inverse, engine_report, register_response


@dataclass(frozen=True, eq=False)
class LinearFixedB:
    A: np.ndarray
    b: np.ndarray


@dataclass(frozen=True, eq=False)
class LinearGeneral:
    A: np.ndarray
    b: np.ndarray


def _prepare(A, b):
    A = numlin.as_matrix(A)
    b = np.asarray(b).ravel()
    n = A.shape[0]
    if A.shape != (n, n):
        raise PreconditionError(f"A must be square, got {A.shape}")
    if b.shape != (n,):
        raise PreconditionError(f"b has length {b.size}, expected {n}")
    is_complex = np.iscomplexobj(A) or np.iscomplexobj(b)
    dtype = np.complex128 if is_complex else np.float64
    return A.astype(dtype), b.astype(dtype), is_complex


def _ay_operator(y: np.ndarray) -> np.ndarray:
    # row-major vec(Adot) -> Adot @ y
    return np.kron(np.eye(y.size), y.reshape(1, -1))


def build_linear_fixed_b(A, b, p_list=(2,)) -> ProblemAnalysis:
    A, b, is_complex = _prepare(A, b)
    n = A.shape[0]
    a_inv = checked_inverse(A, "A")
    y = a_inv @ b
    cmap = ConditionMap.from_matrix(-a_inv @ _ay_operator(y))
    ny = float(np.linalg.norm(y))
    op, fro = numlin.operator_norm(a_inv), numlin.frobenius_norm(a_inv)
    closed = KappaReport(op * ny, fro * ny, {2: fro * ny / n})
    return ProblemAnalysis(
        "linear_fixed_b",
        LinearFixedB(A, b),
        cmap,
        closed,
        engine_report(cmap, p_list),
        input_norm=numlin.frobenius_norm(A),
        output_norm=ny,
        solution=y,
        notes={"complex": is_complex},
    )


def build_linear_general(A, b, p_list=(2,)) -> ProblemAnalysis:
    A, b, is_complex = _prepare(A, b)
    n = A.shape[0]
    a_inv = checked_inverse(A, "A")
    y = a_inv @ b
    cmap = ConditionMap.from_matrix(a_inv @ np.hstack([-_ay_operator(y), np.eye(n)]))
    grow = math.sqrt(1.0 + float(np.linalg.norm(y)) ** 2)
    op, fro = numlin.operator_norm(a_inv), numlin.frobenius_norm(a_inv)
    closed = KappaReport(op * grow, fro * grow, {2: fro * grow / math.sqrt(n * n + n)})
    return ProblemAnalysis(
        "linear_general",
        LinearGeneral(A, b),
        cmap,
        closed,
        engine_report(cmap, p_list),
        input_norm=math.hypot(numlin.frobenius_norm(A), float(np.linalg.norm(b))),
        output_norm=float(np.linalg.norm(y)),
        solution=y,
        notes={"complex": is_complex},
    )


def _split_direction(analysis, d, with_b):
    inst = analysis.instance
    n = inst.A.shape[0]
    if analysis.notes["complex"]:
        d = numlin.complexify_vector(d)
    a_dot = d[: n * n].reshape(n, n)
    b_dot = d[n * n :] if with_b else np.zeros(n, dtype=d.dtype)
    return a_dot, b_dot


def _output_delta(analysis, y_new):
    delta = y_new - analysis.solution
    return numlin.realify_vector(delta) if analysis.notes["complex"] else delta.real


@register_response("linear_fixed_b")
def _respond_fixed_b(analysis, d, t):
    inst = analysis.instance
    a_dot, _ = _split_direction(analysis, d, with_b=False)
    return _output_delta(analysis, np.linalg.solve(inst.A + t * a_dot, inst.b))


@register_response("linear_general")
def _respond_general(analysis, d, t):
    inst = analysis.instance
    a_dot, b_dot = _split_direction(analysis, d, with_b=True)
    return _output_delta(analysis, np.linalg.solve(inst.A + t * a_dot, inst.b + t * b_dot))
