"""Random instance generators and the statistical experiments built on them.

Every sampler takes an integer seed (or a ready ``numpy.random.Generator``).
Experiments derive one generator per trial from ``(seed, size, trial)`` so
that threaded and sequential runs produce identical numbers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .condcore import KappaReport, relative_report
from .errors import CondlabError, PreconditionError
from .problems.hpoly import HPolySystem, aggregate_kappa_system, homogenize_upoly, monomials, multinomial
from .problems.upoly import residual_bound, root_residual, roots_upoly

__all__ = [
    "EnsembleSpec",
    "ExperimentResult",
    "bootstrap_mean_ci",
    "bp_bound_experiment",
    "edelman_experiment",
    "rank_r_sample_experiment",
    "sample_complex_normal",
    "sample_gaussian_matrix",
    "sample_weyl_system",
    "sample_weyl_system_with_root",
    "sample_weyl_upoly",
]

EDELMAN_C = 1.537
RANK_R_DISCLAIMER = (
    "measure differs from paper: rank-r matrices are sampled as complex Gaussian "
    "factor products G1 @ G2, not from the normalized induced measure; no bound is asserted"
)

_BOOT_KEY = 999_999_937  # spawn key reserved for bootstrap resampling


def _rng(seed, *keys) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    parts = [int(x) for x in seed] if isinstance(seed, (tuple, list)) else [int(seed)]
    if not parts or min(parts) < 0:
        raise PreconditionError("seed must be a nonnegative integer or a sequence of them")
    return np.random.default_rng([*parts, *keys])


@dataclass(frozen=True)
class EnsembleSpec:
    family: str
    sizes: tuple
    trials: int
    seed: int = 0

    FAMILIES = ("gaussian_real", "gaussian_complex", "weyl_upoly", "weyl_system", "rank_r_factors")

    def __post_init__(self):
        if self.family not in self.FAMILIES:
            raise PreconditionError(f"unknown ensemble family {self.family!r}")
        if self.trials < 1:
            raise PreconditionError("trials must be >= 1")
        if not self.sizes or min(self.sizes) < 1:
            raise PreconditionError("size parameters must be positive")
        if self.family == "rank_r_factors":
            k, q, r = self.sizes
            if r > min(k, q):
                raise PreconditionError("rank r must not exceed min(k, q)")


@dataclass
class ExperimentResult:
    name: str
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def row(self, quantity: str, size) -> dict:
        for r in self.rows:
            if r["quantity"] == quantity and r["size"] == size:
                return r
        raise KeyError((quantity, size))


def sample_complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Standard complex normals: real and imaginary parts i.i.d. N(0, 1/2)."""
    size = (size,) if np.isscalar(size) else tuple(size)
    parts = rng.standard_normal(size + (2,))
    return (parts[..., 0] + 1j * parts[..., 1]) / math.sqrt(2.0)


def sample_gaussian_matrix(n: int, field: str = "real", seed=0, cols: int | None = None) -> np.ndarray:
    if n < 1:
        raise PreconditionError("n must be >= 1")
    rng = _rng(seed)
    shape = (n, n if cols is None else cols)
    if field == "real":
        return rng.standard_normal(shape)
    if field == "complex":
        return sample_complex_normal(rng, shape)
    raise PreconditionError(f"unknown field {field!r}")


def sample_weyl_upoly(d: int, seed=0) -> np.ndarray:
    """Coefficients ``f_i = z_i sqrt(binom(d, i))`` with standard complex normal ``z``."""
    if d < 1:
        raise PreconditionError("degree must be >= 1")
    z = sample_complex_normal(_rng(seed), d + 1)
    return z * np.sqrt([math.comb(d, i) for i in range(d + 1)])


def sample_weyl_system(n: int, degrees, seed=0) -> HPolySystem:
    """Weyl-distributed homogeneous system; unit variance in the Weyl-orthonormal basis."""
    degrees = tuple(int(d) for d in degrees)
    if n < 1 or len(degrees) != n or min(degrees) < 1:
        raise PreconditionError("need n >= 1 and n positive degrees")
    rng = _rng(seed)
    polys = []
    for d in degrees:
        mons = monomials(n + 1, d)
        z = sample_complex_normal(rng, len(mons))
        polys.append({a: complex(c * math.sqrt(multinomial(a))) for a, c in zip(mons, z)})
    return HPolySystem(n, degrees, tuple(polys))


def sample_weyl_system_with_root(n: int, degrees, seed=0) -> HPolySystem:
    """Weyl system forced through a uniformly random unit root ``zeta``.

    Each equation ``f_i`` is replaced by ``f_i - f_i(zeta) <x, zeta>**d_i``,
    which vanishes at ``zeta`` because ``<zeta, zeta> = 1``.
    """
    base = sample_weyl_system(n, degrees, seed)
    zeta = sample_complex_normal(_rng(seed, 1), n + 1)
    zeta /= np.linalg.norm(zeta)
    vals = base.evaluate(zeta)
    polys = []
    for d, poly, v in zip(base.degrees, base.polys, vals):
        out = dict(poly)
        for a in monomials(n + 1, d):
            out[a] = out.get(a, 0.0) - v * multinomial(a) * np.prod(zeta.conj() ** np.array(a))
        polys.append(out)
    return HPolySystem(n, base.degrees, tuple(polys), zeta)


def bootstrap_mean_ci(values, seed=0, resamples: int = 1000, level: float = 0.95):
    """Percentile bootstrap interval for the mean."""
    values = np.asarray(values, dtype=np.float64)
    rng = _rng(seed, _BOOT_KEY)
    idx = rng.integers(0, values.size, size=(resamples, values.size))
    means = values[idx].mean(axis=1)
    lo, hi = np.quantile(means, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def _summary(values) -> tuple[float, float]:
    values = np.asarray(values, dtype=np.float64)
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return float(values.mean()), se


def _map_trials(fn, trials, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, range(trials)))
    return [fn(t) for t in range(trials)]


def _weighted_line(x, y, se):
    """Weighted least-squares line; returns slope, intercept and their standard errors."""
    x, y, se = map(np.asarray, (x, y, se))
    w = 1.0 / np.maximum(se, 1e-300) ** 2
    a = np.column_stack([x, np.ones_like(x)])
    cov = np.linalg.inv(a.T @ (a * w[:, None]))
    coef = cov @ (a.T @ (w * y))
    resid = y - a @ coef
    return {
        "slope": float(coef[0]),
        "intercept": float(coef[1]),
        "slope_se": float(math.sqrt(cov[0, 0])),
        "intercept_se": float(math.sqrt(cov[1, 1])),
        "residuals": [float(r) for r in resid],
    }


def edelman_kappas(A: np.ndarray) -> tuple[float, float]:
    """``(||A|| ||A^-1||, relative average condition of A y = b)`` for square ``A``."""
    n = A.shape[0]
    s = np.linalg.svd(A, compute_uv=False)
    inv_fro = math.sqrt(float(np.sum(1.0 / s ** 2)))
    # fixed-b average condition for a unit output: ||A^-1||_F / n, scaled by ||A||_F / ||y||
    report = KappaReport(1.0 / s[-1], inv_fro, {2: inv_fro / n})
    rel = relative_report(report, math.sqrt(float(np.sum(s ** 2))), 1.0)
    return float(s[0] / s[-1]), rel.kappa_avg[2]


def edelman_experiment(sizes, trials: int = 200, seed: int = 0, workers: int = 1) -> ExperimentResult:
    sizes = [int(n) for n in sizes]
    if not sizes or min(sizes) < 2:
        raise PreconditionError("sizes must be >= 2")
    if trials < 50:
        raise PreconditionError("edelman experiment needs at least 50 trials")
    res = ExperimentResult("edelman", meta={"sizes": sizes, "trials": trials, "seed": seed})
    resampled = 0
    log_n, rel_means, rel_ses, av_means, av_ses = [], [], [], [], []
    for n in sizes:

        def one(t, n=n):
            rng = _rng(seed, n, t)
            redraws = 0
            while True:
                A = rng.standard_normal((n, n))
                s_min = np.linalg.svd(A, compute_uv=False)[-1]
                if s_min > 1e-12 * n * np.abs(A).max():
                    return edelman_kappas(A), redraws
                redraws += 1

        out = _map_trials(one, trials, workers)
        resampled += sum(r for _, r in out)
        k_rel = np.log([k for (k, _), _ in out])
        k_av = np.log([a for (_, a), _ in out])
        m_rel, se_rel = _summary(k_rel)
        m_av, se_av = _summary(k_av)
        res.rows.append({"quantity": "log_kappa_rel", "size": n, "mean": m_rel, "std_error": se_rel, "trials": trials})
        res.rows.append(
            {"quantity": "log_kappa_rel_minus_log_n", "size": n, "mean": m_rel - math.log(n),
             "std_error": se_rel, "trials": trials}
        )
        res.rows.append({"quantity": "log_kappa_rel_av", "size": n, "mean": m_av, "std_error": se_av, "trials": trials})
        log_n.append(math.log(n))
        rel_means.append(m_rel)
        rel_ses.append(se_rel)
        av_means.append(m_av)
        av_ses.append(se_av)

    offsets = np.array(rel_means) - np.array(log_n)
    w = 1.0 / np.array(rel_ses) ** 2
    c_hat = float(np.sum(w * offsets) / np.sum(w))
    res.fits["log_kappa_rel_unit_slope"] = {
        "intercept": c_hat,
        "intercept_se": float(1.0 / math.sqrt(np.sum(w))),
        "residuals": [float(o - c_hat) for o in offsets],
        "reference": EDELMAN_C,
    }
    if len(sizes) >= 2:
        res.fits["log_kappa_rel"] = _weighted_line(log_n, rel_means, rel_ses)
        res.fits["log_kappa_rel_av"] = _weighted_line(log_n, av_means, av_ses)
    res.meta["resampled_singular"] = resampled
    return res


def _bp_trial(d, seed, t):
    f = sample_weyl_upoly(d, _rng(seed, d, t))
    roots = roots_upoly(f)
    if roots.size != d or any(root_residual(f, z) > residual_bound(f, z) for z in roots):
        return None
    system = homogenize_upoly(f)
    homog = [np.array([1.0, z]) / math.hypot(1.0, abs(z)) for z in roots]
    try:
        agg = aggregate_kappa_system(system, homog)
    except CondlabError:
        return None
    return agg.kappa ** 2, agg.kappa_avg ** 2


def bp_bound_experiment(
    d: int, trials: int = 2000, seed: int = 0, n: int = 1, workers: int = 1, resamples: int = 1000
) -> ExperimentResult:
    """Mean squared aggregate condition numbers of Weyl-random univariate polynomials."""
    if n != 1:
        raise PreconditionError("only n = 1 is supported (roots come from the companion matrix)")
    if not 1 <= d <= 15:
        raise PreconditionError("degree must be in 1..15")
    if trials < 500:
        raise PreconditionError("bound experiment needs at least 500 trials")
    out = _map_trials(lambda t: _bp_trial(d, seed, t), trials, workers)
    kept = [o for o in out if o is not None]
    big_n = math.comb(d + n, n) - 1
    res = ExperimentResult(
        "bp-bound",
        meta={"d": d, "n": n, "N": big_n, "trials": trials, "seed": seed, "excluded": trials - len(kept)},
    )
    for j, (quantity, bound) in enumerate((("kappa_W_sq", 8 * n * big_n), ("kappa_av_W_sq", 8 * n * n))):
        vals = [o[j] for o in kept]
        mean, se = _summary(vals)
        lo, hi = bootstrap_mean_ci(vals, _rng(seed, d, _BOOT_KEY, j), resamples)
        res.rows.append(
            {"quantity": quantity, "size": d, "mean": mean, "std_error": se, "trials": len(kept),
             "ci_low": lo, "ci_high": hi, "bound": float(bound), "pass": bool(hi < bound)}
        )
    return res


def _rank_r_matrix(rng, k, q, r):
    if r == min(k, q):
        return sample_complex_normal(rng, (k, q))
    return sample_complex_normal(rng, (k, r)) @ sample_complex_normal(rng, (r, q))


def rank_r_sample_experiment(
    k: int, q: int, r: int, trials: int = 500, seed: int = 0, workers: int = 1, resamples: int = 1000
) -> ExperimentResult:
    """Log relative condition statistics of sampled rank-r matrices (report only)."""
    EnsembleSpec("rank_r_factors", (k, q, r), trials, seed)

    def one(t):
        A = _rank_r_matrix(_rng(seed, k, q, r, t), k, q, r)
        s = np.linalg.svd(A, compute_uv=False)[:r]
        a_fro = math.sqrt(float(np.sum(s ** 2)))
        pinv_fro = math.sqrt(float(np.sum(1.0 / s ** 2)))
        rel = a_fro / s[-1]
        rel_av = a_fro * math.sqrt(q - r) * pinv_fro / math.sqrt((k + q - r) * r) if q > r else float("nan")
        return rel, rel_av

    out = _map_trials(one, trials, workers)
    res = ExperimentResult(
        "rank-r", notes=[RANK_R_DISCLAIMER], meta={"k": k, "q": q, "r": r, "trials": trials, "seed": seed}
    )
    ref_rel = math.log((k + q - r) / (k + q - 2 * r + 1)) + 2.6
    ref_av = None
    if q > r:
        ref_av = 0.5 * math.log((k + q - r) * r / ((k + q - 2 * r + 1) ** 2 * q * (q - r))) + 2.6
    for j, (quantity, ref) in enumerate((("log_kappa_rel", ref_rel), ("log_kappa_rel_av", ref_av))):
        vals = np.log([o[j] for o in out])
        if not np.all(np.isfinite(vals)):
            res.notes.append(f"{quantity} undefined: the kernel is trivial when r = q")
            continue
        mean, se = _summary(vals)
        lo, hi = bootstrap_mean_ci(vals, _rng(seed, k, q, r, _BOOT_KEY, j), resamples)
        res.rows.append(
            {"quantity": quantity, "size": f"{k}x{q}r{r}", "mean": mean, "std_error": se, "trials": trials,
             "ci_low": lo, "ci_high": hi, "reference_not_asserted": ref}
        )
    return res
