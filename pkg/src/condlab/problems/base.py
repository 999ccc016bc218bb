"""Shared pieces of the problem-family adapters."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .. import numlin
from ..condcore import ConditionMap, KappaReport, analyze_map, relative_report
from ..errors import PreconditionError, SigmaError

# family name -> function(analysis, direction, t) returning the realified output displacement
_RESPONSES: dict[str, Callable] = {}


def register_response(family: str):
    def deco(fn):
        _RESPONSES[family] = fn
        return fn

    return deco


@dataclass(frozen=True, eq=False)
class ProblemAnalysis:
    """Assembled condition map of one instance with closed-form and engine reports.

    ``closed_form`` holds the textbook formulas for the family; ``engine``
    holds the same quantities computed from the singular values of ``map``.
    ``notes`` carries family-specific extras (candidate constants, flags).
    """

    family: str
    instance: Any
    map: ConditionMap
    closed_form: KappaReport
    engine: KappaReport
    input_norm: float
    output_norm: float
    solution: Any = None
    notes: dict = field(default_factory=dict)

    def relative(self, which: str = "engine") -> KappaReport:
        report = self.engine if which == "engine" else self.closed_form
        return relative_report(report, self.input_norm, self.output_norm)


def engine_report(cmap: ConditionMap, p_list=(2,)) -> KappaReport:
    return analyze_map(cmap, p_list=p_list, componentwise=True)


def checked_inverse(a: np.ndarray, what: str) -> np.ndarray:
    """Inverse of a square matrix, refusing matrices numerically in the singular set."""
    s = numlin.singular_values(a)
    if s.size == 0:
        raise PreconditionError(f"{what} is empty")
    tol = numlin.default_rank_tol(a) * s[0]
    if s[0] == 0.0 or s[-1] <= tol:
        raise SigmaError(f"{what} is singular (sigma_min={s[-1]:.3e}, sigma_max={s[0]:.3e})", gap=float(s[-1]))
    return np.linalg.inv(a)


def complex_direction(direction, cdim: int) -> np.ndarray:
    """Interleaved real direction of length ``2*cdim`` as a complex vector."""
    d = np.asarray(direction, dtype=np.float64).ravel()
    if d.size != 2 * cdim:
        raise PreconditionError(f"direction has length {d.size}, expected {2 * cdim}")
    return numlin.complexify_vector(d)


def validate_first_order(target, direction, t: float) -> float:
    """Relative gap between a finite-difference response and the condition map.

    ``target`` is a :class:`ProblemAnalysis` or an instance accepted by
    :func:`condlab.problems.analyze_instance`. ``direction`` lives in the real
    coordinates of ``analysis.map`` (interleaved Re/Im for complex inputs).
    """
    from . import analyze_instance

    if t <= 0:
        raise PreconditionError("step t must be positive")
    analysis = target if isinstance(target, ProblemAnalysis) else analyze_instance(target)
    d = np.asarray(direction, dtype=np.float64).ravel()
    if d.size != analysis.map.input_dim:
        raise PreconditionError(f"direction has length {d.size}, map expects {analysis.map.input_dim}")
    predicted = analysis.map.matrix @ d
    scale = np.linalg.norm(predicted)
    if not np.any(d) or scale == 0.0:
        raise PreconditionError("first-order deviation is undefined for a direction with zero image")
    try:
        response = _RESPONSES[analysis.family]
    except KeyError:
        raise PreconditionError(f"no finite-difference response for family {analysis.family!r}") from None
    delta = response(analysis, d, t)
    return float(np.linalg.norm(delta / t - predicted) / scale)
