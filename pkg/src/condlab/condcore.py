"""Condition numbers of a linear condition map and their Monte Carlo oracles.

A :class:`ConditionMap` wraps the derivative of the input-to-output solution
map as a real matrix of shape ``(output_dim, input_dim)``. Complex problems are
realified first, so ``input_dim`` always counts real dimensions.

Two independent routes to the p-th average condition number live here:

* the closed route, a Gamma-function constant times the p-th moment of a
  Gaussian vector with covariance ``diag(sigma**2)``;
* :func:`sphere_average_oracle`, which averages ``|M x|**p`` over uniformly
  random unit directions ``x`` directly.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import kernels, numlin
from .errors import OutputAtOriginError, PreconditionError, UnsupportedModeError

__all__ = [
    "ConditionMap",
    "KappaReport",
    "MomentEstimate",
    "analyze_map",
    "componentwise_avg",
    "componentwise_constant",
    "componentwise_kappa",
    "exact_moment_available",
    "gamma_ratio_constant",
    "gaussian_norm_moment",
    "kappa",
    "kappa_avg",
    "kappa_avg_estimate",
    "kappa_frobenius",
    "relative_report",
    "sphere_average_oracle",
    "sphere_volume",
]

CHUNK_SIZE = 1 << 15

# stream tags keep the oracle and the Gaussian-moment estimator on disjoint draws
_SPHERE_STREAM = 0
_GAUSS_STREAM = 1

_ROUNDING_SPREAD = 64 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class ConditionMap:
    matrix: np.ndarray
    input_dim: int
    output_dim: int

    def __post_init__(self):
        a = np.asarray(self.matrix)
        if a.shape != (self.output_dim, self.input_dim):
            raise PreconditionError(
                f"matrix shape {a.shape} != (output_dim, input_dim) = "
                f"({self.output_dim}, {self.input_dim})"
            )
        if self.input_dim < 1:
            raise PreconditionError("input dimension must be at least 1")

    @classmethod
    def from_matrix(cls, matrix) -> "ConditionMap":
        """Build from a real or complex matrix; complex input is realified."""
        a = np.asarray(matrix)
        if np.iscomplexobj(a):
            a = numlin.realify(a)
        a = numlin.as_matrix(a).astype(np.float64)
        a.setflags(write=False)
        return cls(a, a.shape[1], a.shape[0])

    @cached_property
    def singular_values(self) -> np.ndarray:
        s = numlin.singular_values(self.matrix)
        s.setflags(write=False)
        return s

    def row(self, k: int) -> "ConditionMap":
        """The one-output submap for component ``k`` (1-based)."""
        _check_component(self, k)
        return ConditionMap.from_matrix(self.matrix[k - 1 : k, :])


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    std_error: float
    samples: int
    seed: int | tuple | None = None
    p: int | None = None

    def __post_init__(self):
        if self.std_error < 0:
            raise PreconditionError("std_error must be nonnegative")
        if self.samples < 1:
            raise PreconditionError("samples must be at least 1")


@dataclass(frozen=True)
class KappaReport:
    kappa: float
    kappa_frobenius: float
    kappa_avg: dict = field(default_factory=dict)
    componentwise: list | None = None
    relative_scale: float | None = None


def kappa(cmap: ConditionMap) -> float:
    s = cmap.singular_values
    return float(s[0]) if s.size else 0.0


def kappa_frobenius(cmap: ConditionMap) -> float:
    return float(math.hypot(*cmap.singular_values))


def sphere_volume(m: int) -> float:
    """Surface measure of the unit sphere in R^m."""
    if m < 1:
        raise PreconditionError("sphere dimension m must be >= 1")
    return math.exp(math.log(2.0) + 0.5 * m * math.log(math.pi) - math.lgamma(m / 2))


def gamma_ratio_constant(m: int, p: int) -> float:
    """``(1/sqrt 2) * (Gamma(m/2) / Gamma((m+p)/2)) ** (1/p)`` via log-Gamma."""
    if m < 1 or p < 1:
        raise PreconditionError("need m >= 1 and p >= 1")
    return math.exp((math.lgamma(m / 2) - math.lgamma((m + p) / 2)) / p) / math.sqrt(2.0)


def componentwise_constant(m: int, p: int) -> float:
    if m < 1 or p < 1:
        raise PreconditionError("need m >= 1 and p >= 1")
    log_c = (
        math.lgamma(m / 2)
        - math.lgamma((m + p) / 2)
        + math.lgamma((p + 1) / 2)
        - 0.5 * math.log(math.pi)
    )
    return math.exp(log_c / p)


def _isotropic(nz: np.ndarray) -> bool:
    # all nonzero sigmas equal up to rounding: |eta| is a scaled chi variable
    return nz.size <= 1 or float(np.ptp(nz)) <= 4 * np.finfo(float).eps * float(np.max(nz))


def exact_moment_available(sigmas, p: int) -> bool:
    s = np.abs(np.asarray(sigmas, dtype=np.float64))
    return p % 2 == 0 or _isotropic(s[s != 0.0])


def _exact_moment(sigmas: np.ndarray, p: int) -> float:
    nz = sigmas[sigmas != 0.0]
    if nz.size == 0:
        return 0.0
    if p == 2:
        return float(np.sum(nz ** 2))
    if _isotropic(nz):
        k, s = nz.size, float(np.mean(nz))
        log_chi = (p / 2) * math.log(2.0) + math.lgamma((k + p) / 2) - math.lgamma(k / 2)
        return s ** p * math.exp(log_chi)
    # even p: moments of Q = sum w_j g_j^2 from its cumulants 2^(j-1) (j-1)! sum w^j
    k = p // 2
    w = nz ** 2
    cum = [0.0] + [2.0 ** (j - 1) * math.factorial(j - 1) * float(np.sum(w ** j)) for j in range(1, k + 1)]
    mom = [1.0]
    for r in range(1, k + 1):
        mom.append(sum(math.comb(r - 1, j - 1) * cum[j] * mom[r - j] for j in range(1, r + 1)))
    return mom[k]


def _check_seed(seed):
    """Normalize a seed to a nonnegative int or a tuple of them (a spawn path)."""
    if seed is None:
        return 0
    parts = tuple(int(s) for s in seed) if isinstance(seed, (tuple, list)) else (int(seed),)
    if not parts or min(parts) < 0:
        raise PreconditionError("seed must be a nonnegative integer or a sequence of them")
    return parts if isinstance(seed, (tuple, list)) else parts[0]


def _chunked_stats(kernel, operand, dim, p, samples, seed, stream, workers):
    """Run ``kernel`` over fixed chunks with per-chunk seeds; merge in chunk order."""
    nchunks = -(-samples // CHUNK_SIZE)
    key = seed if isinstance(seed, tuple) else (seed,)

    def one(c):
        size = min(CHUNK_SIZE, samples - c * CHUNK_SIZE)
        rng = np.random.default_rng([*key, stream, c])
        draws = rng.standard_normal((size, dim))
        return kernel(operand, draws, float(p))

    if workers and workers > 1 and nchunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(nchunks)))
    else:
        parts = [one(c) for c in range(nchunks)]
    total = (0, 0.0, 0.0)
    for part in parts:
        total = kernels.merge_stats(total, part)
    return total


def _mean_and_se(stats):
    n, mean, m2 = stats
    sd = math.sqrt(max(m2 / (n - 1), 0.0)) if n > 1 else 0.0
    # a constant integrand (e.g. m = 1 or an isometry) leaves only rounding spread
    if sd <= _ROUNDING_SPREAD * abs(mean):
        sd = 0.0
    return mean, sd / math.sqrt(n)


def _root_estimate(mean, se_mean, p):
    """p-th root of a positive mean with the delta-method standard error."""
    if mean <= 0.0:
        return 0.0, 0.0
    root = mean ** (1.0 / p)
    return root, se_mean / (p * mean ** ((p - 1) / p))


def gaussian_norm_moment(
    sigmas, p: int, mode: str = "exact", samples: int = 100_000, seed: int | None = 0, workers: int = 1
) -> MomentEstimate:
    """``E |eta|**p`` for a centered Gaussian with covariance ``diag(sigmas**2)``.

    ``mode="exact"`` is available for p = 2, for every even p (moments of a
    Gaussian quadratic form), and when the nonzero sigmas are all equal; ``"mc"`` samples.
    """
    s = np.abs(np.asarray(sigmas, dtype=np.float64).ravel())
    if p < 1:
        raise PreconditionError("moment order p must be >= 1")
    if mode == "exact":
        if not exact_moment_available(s, p):
            raise UnsupportedModeError(
                f"no exact Gaussian moment for p={p} with {np.count_nonzero(s)} nonzero sigmas"
            )
        return MomentEstimate(_exact_moment(s, p), 0.0, 1, None, p)
    if mode != "mc":
        raise UnsupportedModeError(f"unknown moment mode {mode!r}")
    seed = _check_seed(seed)
    if samples < 2:
        raise PreconditionError("Monte Carlo needs at least 2 samples")
    if s.size == 0:
        return MomentEstimate(0.0, 0.0, samples, seed, p)
    stats = _chunked_stats(kernels.gaussian_power_stats, s ** 2, s.size, p, samples, seed, _GAUSS_STREAM, workers)
    mean, se = _mean_and_se(stats)
    return MomentEstimate(mean, se, samples, seed, p)


def kappa_avg_estimate(
    cmap: ConditionMap, p: int = 2, mode: str = "auto", samples: int = 100_000, seed: int | None = 0, workers: int = 1
) -> MomentEstimate:
    """p-th average condition number via the Gamma constant and Gaussian moment.

    ``mode="auto"`` picks the exact moment when one exists and Monte Carlo
    otherwise. The returned ``std_error`` is zero for exact evaluation.
    """
    if p < 1:
        raise PreconditionError("moment order p must be >= 1")
    m = cmap.input_dim
    if p == 2:
        return MomentEstimate(kappa_frobenius(cmap) / math.sqrt(m), 0.0, 1, None, 2)
    if mode == "auto":
        mode = "exact" if exact_moment_available(cmap.singular_values, p) else "mc"
    mom = gaussian_norm_moment(cmap.singular_values, p, mode, samples, seed, workers)
    root, se = _root_estimate(mom.value, mom.std_error, p)
    c = gamma_ratio_constant(m, p)
    return MomentEstimate(c * root, c * se, mom.samples, mom.seed, p)


def kappa_avg(cmap: ConditionMap, p: int = 2, mode: str = "auto", **kw) -> float:
    return kappa_avg_estimate(cmap, p, mode, **kw).value


def sphere_average_oracle(
    cmap: ConditionMap, p: int = 2, samples: int = 100_000, seed: int | None = 0, workers: int = 1
) -> MomentEstimate:
    """Direct estimate of the p-th average over uniform unit directions.

    Directions are normalized standard Gaussian draws in R^m; the reported
    value is the p-th root of the sample mean of ``|M x|**p``.
    """
    if samples < 1000:
        raise PreconditionError("sphere oracle needs at least 1000 samples")
    if p < 1:
        raise PreconditionError("moment order p must be >= 1")
    seed = _check_seed(seed)
    stats = _chunked_stats(
        kernels.sphere_power_stats, cmap.matrix, cmap.input_dim, p, samples, seed, _SPHERE_STREAM, workers
    )
    mean, se = _mean_and_se(stats)
    root, root_se = _root_estimate(mean, se, p)
    return MomentEstimate(root, root_se, samples, seed, p)


def _check_component(cmap: ConditionMap, k: int):
    if not 1 <= k <= cmap.output_dim:
        raise IndexError(f"component {k} outside 1..{cmap.output_dim}")


def componentwise_kappa(cmap: ConditionMap, k: int) -> float:
    """Norm of row ``k`` (1-based) of the condition matrix."""
    _check_component(cmap, k)
    return float(np.linalg.norm(cmap.matrix[k - 1]))


def componentwise_avg(cmap: ConditionMap, k: int, p: int = 2) -> float:
    return componentwise_constant(cmap.input_dim, p) * componentwise_kappa(cmap, k)


def analyze_map(
    cmap: ConditionMap,
    p_list=(2,),
    componentwise: bool = False,
    mode: str = "auto",
    samples: int = 100_000,
    seed: int | None = 0,
    workers: int = 1,
) -> KappaReport:
    avg = {int(p): kappa_avg(cmap, int(p), mode, samples=samples, seed=seed, workers=workers) for p in p_list}
    comp = None
    if componentwise:
        comp = [componentwise_kappa(cmap, k) for k in range(1, cmap.output_dim + 1)]
    return KappaReport(kappa(cmap), kappa_frobenius(cmap), avg, comp)


def relative_report(report: KappaReport, norm_x: float, norm_y: float) -> KappaReport:
    """Scale every condition number by ``norm_x / norm_y``."""
    if norm_y == 0:
        raise OutputAtOriginError("relative condition number undefined at an output of norm 0")
    if norm_x < 0 or norm_y < 0:
        raise PreconditionError("norms must be nonnegative")
    s = norm_x / norm_y
    comp = None if report.componentwise is None else [s * c for c in report.componentwise]
    prior = 1.0 if report.relative_scale is None else report.relative_scale
    return replace(
        report,
        kappa=s * report.kappa,
        kappa_frobenius=s * report.kappa_frobenius,
        kappa_avg={p: s * v for p, v in report.kappa_avg.items()},
        componentwise=comp,
        relative_scale=prior * s,
    )
