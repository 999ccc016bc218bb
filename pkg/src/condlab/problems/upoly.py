"""Roots of a univariate complex polynomial under the Weyl or canonical metric."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import numlin
from ..condcore import ConditionMap, KappaReport
from ..errors import DegreeDeficientError, PreconditionError, SigmaError, TrackingFailure
from .base import ProblemAnalysis, complex_direction, engine_report, register_response

METRICS = ("weyl", "canonical")


@dataclass(frozen=True, eq=False)
class UPoly:
    """``f(z) = sum_i coefficients[i] * z**i`` with a simple root ``root``."""

    coefficients: np.ndarray
    root: complex
    metric: str = "weyl"

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1


def metric_weights(d: int, metric: str) -> np.ndarray:
    """Norms of ``z**i`` in the dual sense: coefficient = weight * orthonormal coordinate."""
    if metric == "weyl":
        return np.sqrt([math.comb(d, i) for i in range(d + 1)])
    if metric == "canonical":
        return np.ones(d + 1)
    raise PreconditionError(f"unknown metric {metric!r}; expected one of {METRICS}")


def poly_norm(f, metric: str = "weyl") -> float:
    f = np.asarray(f, dtype=np.complex128)
    return float(np.linalg.norm(f / metric_weights(f.size - 1, metric)))


def horner(f, z):
    """Value and derivative of ``f`` at ``z`` (ascending coefficients)."""
    val = 0j
    der = 0j
    for c in f[::-1]:
        der = der * z + val
        val = val * z + c
    return val, der


def _coefficients(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.complex128).ravel()
    if f.size < 2:
        raise PreconditionError("polynomial degree must be at least 1")
    if not np.all(np.isfinite(f)):
        raise PreconditionError("coefficients must be finite")
    return f


def newton_polish(f, z, iters: int = 3):
    """A few guarded Newton steps; a step is kept only if it lowers the residual."""
    val, der = horner(f, z)
    for _ in range(iters):
        if der == 0:
            break
        cand = z - val / der
        cval, cder = horner(f, cand)
        if abs(cval) >= abs(val):
            break
        z, val, der = cand, cval, cder
    return z


def roots_upoly(f, polish: bool = True) -> np.ndarray:
    """All roots from the eigenvalues of the companion matrix, ordered by (Re, Im)."""
    f = _coefficients(f)
    d = f.size - 1
    if abs(f[-1]) <= 1e-14 * np.linalg.norm(f):
        raise DegreeDeficientError("leading coefficient is numerically zero")
    comp = np.zeros((d, d), dtype=np.complex128)
    comp[1:, :-1] = np.eye(d - 1)
    comp[:, -1] = -f[:-1] / f[-1]
    roots = np.linalg.eigvals(comp)
    if polish:
        roots = np.array([newton_polish(f, z) for z in roots])
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]


def root_residual(f, z) -> float:
    return abs(horner(np.asarray(f, dtype=np.complex128), z)[0])


def residual_bound(f, z, rel: float = 1e-6) -> float:
    return rel * float(np.linalg.norm(f)) * max(1.0, abs(z)) ** (np.size(f) - 1)


def closed_form_kappa(f, z, metric: str) -> float:
    f = np.asarray(f, dtype=np.complex128)
    d = f.size - 1
    der = abs(horner(f, z)[1])
    if metric == "weyl":
        num = (1.0 + abs(z) ** 2) ** (d / 2)
    else:
        num = math.sqrt(sum(abs(z) ** (2 * i) for i in range(d + 1)))
    return float(num / der)


def build_upoly(f, root, metric: str = "weyl", p_list=(2,)) -> ProblemAnalysis:
    f = _coefficients(f)
    d = f.size - 1
    z = complex(root)
    weights = metric_weights(d, metric)
    fnorm = float(np.linalg.norm(f / weights))
    val, der = horner(f, z)
    if abs(val) > 1e-9 * float(np.linalg.norm(f)) * max(1.0, abs(z)) ** d:
        raise PreconditionError(f"|f(root)| = {abs(val):.3e} is not a root residual")
    if abs(der) < 1e-12 * fnorm:
        raise SigmaError(f"|f'(root)| = {abs(der):.3e}: root is (nearly) multiple", gap=abs(der))

    row = -(weights * z ** np.arange(d + 1)) / der
    cmap = ConditionMap.from_matrix(row.reshape(1, -1))
    k = float(closed_form_kappa(f, z, metric))
    # two candidate average constants circulate for this family; the first follows from
    # the Frobenius norm of the realified map, the second is smaller by a factor sqrt(2).
    # Both are reported so the sphere oracle can adjudicate.
    derived = k / math.sqrt(d + 1)
    halved = k / math.sqrt(2 * (d + 1))
    closed = KappaReport(k, k, {2: derived})
    engine = engine_report(cmap, p_list)
    engine_avg = engine.kappa_avg.get(2, derived)
    matches = [name for name, v in (("sqrt(d+1)", derived), ("sqrt(2(d+1))", halved))
               if abs(engine_avg - v) <= 1e-10 * max(v, 1e-300)]
    return ProblemAnalysis(
        "upoly",
        UPoly(f, z, metric),
        cmap,
        closed,
        engine,
        input_norm=fnorm,
        output_norm=abs(z),
        solution=z,
        notes={
            "avg_candidates": {"sqrt(d+1)": derived, "sqrt(2(d+1))": halved},
            "engine_avg_matches": matches[0] if matches else "neither",
        },
    )


@register_response("upoly")
def _respond(analysis, d, t):
    inst = analysis.instance
    f_dot = metric_weights(inst.degree, inst.metric) * complex_direction(d, inst.degree + 1)
    g = inst.coefficients + t * f_dot
    z = inst.root
    for _ in range(50):
        val, der = horner(g, z)
        if der == 0:
            raise TrackingFailure("derivative vanished while tracking the root")
        step = val / der
        z -= step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    limit = 10 * t * analysis.engine.kappa * np.linalg.norm(d) + 1e-12 * max(1.0, abs(inst.root))
    if abs(z - inst.root) > limit:
        raise TrackingFailure(f"root moved {abs(z - inst.root):.3e}, more than {limit:.3e}")
    return numlin.realify_vector([z - inst.root])
