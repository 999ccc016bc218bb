"""Square systems of homogeneous polynomials on projective space.

A system with ``n`` equations in ``n + 1`` homogeneous variables is stored as
a list of dicts, one per equation, mapping exponent tuples to complex
coefficients. Coordinates with respect to the Weyl-orthonormal monomial basis
``sqrt(multinomial(d; a)) x**a`` are used throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import numlin
from ..condcore import ConditionMap, KappaReport
from ..errors import PreconditionError, SigmaError, TrackingFailure
from .base import ProblemAnalysis, checked_inverse, complex_direction, engine_report, register_response


@lru_cache(maxsize=None)
def monomials(nvars: int, d: int) -> tuple:
    """Exponent tuples of total degree ``d`` in ``nvars`` variables, reverse lexicographic.

    For two variables this lists ``(d, 0), (d-1, 1), ..., (0, d)``.
    """
    if nvars == 1:
        return ((d,),)
    out = []
    for first in range(d, -1, -1):
        out.extend((first,) + rest for rest in monomials(nvars - 1, d - first))
    return tuple(out)


def multinomial(alpha) -> int:
    out = math.factorial(sum(alpha))
    for a in alpha:
        out //= math.factorial(a)
    return out


@dataclass(frozen=True, eq=False)
class HPolySystem:
    n: int
    degrees: tuple
    polys: tuple
    root: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1 or len(self.degrees) != self.n or len(self.polys) != self.n:
            raise PreconditionError("need n >= 1 equations with one degree each")
        for d, poly in zip(self.degrees, self.polys):
            if d < 1:
                raise PreconditionError("degrees must be positive")
            for alpha in poly:
                if len(alpha) != self.n + 1 or sum(alpha) != d or min(alpha) < 0:
                    raise PreconditionError(f"exponent {alpha} is not a degree-{d} monomial in {self.n + 1} variables")

    @property
    def bezout(self) -> int:
        return math.prod(self.degrees)

    @property
    def dim(self) -> int:
        """Complex dimension N of the projective space of systems."""
        return sum(math.comb(d + self.n, self.n) for d in self.degrees) - 1

    def weyl_coordinates(self) -> np.ndarray:
        parts = []
        for d, poly in zip(self.degrees, self.polys):
            for alpha in monomials(self.n + 1, d):
                parts.append(complex(poly.get(alpha, 0.0)) / math.sqrt(multinomial(alpha)))
        return np.array(parts, dtype=np.complex128)

    def weyl_norm(self) -> float:
        return float(np.linalg.norm(self.weyl_coordinates()))

    def scaled(self, c) -> "HPolySystem":
        return HPolySystem(self.n, self.degrees, tuple({a: c * v for a, v in p.items()} for p in self.polys), self.root)

    def with_root(self, root) -> "HPolySystem":
        return HPolySystem(self.n, self.degrees, self.polys, np.asarray(root, dtype=np.complex128))

    @classmethod
    def from_weyl_coordinates(cls, n, degrees, coords, root=None) -> "HPolySystem":
        polys, pos = [], 0
        for d in degrees:
            poly = {}
            for alpha in monomials(n + 1, d):
                poly[alpha] = complex(coords[pos]) * math.sqrt(multinomial(alpha))
                pos += 1
            polys.append(poly)
        return cls(n, tuple(degrees), tuple(polys), root)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        return np.array([sum(c * np.prod(x ** np.array(a)) for a, c in p.items()) for p in self.polys])

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        jac = np.zeros((self.n, self.n + 1), dtype=np.complex128)
        for i, p in enumerate(self.polys):
            for a, c in p.items():
                a = np.array(a)
                for j in range(self.n + 1):
                    if a[j]:
                        e = a.copy()
                        e[j] -= 1
                        jac[i, j] += c * a[j] * np.prod(x ** e)
        return jac


def homogenize_upoly(f, root=None) -> HPolySystem:
    """``sum f_i z**i`` as ``sum f_i x0**(d-i) x1**i``; a root z maps to ``(1, z)/|(1, z)|``."""
    f = np.asarray(f, dtype=np.complex128).ravel()
    d = f.size - 1
    poly = {(d - i, i): complex(f[i]) for i in range(d + 1)}
    zeta = None
    if root is not None:
        zeta = np.array([1.0, complex(root)], dtype=np.complex128)
        zeta /= np.linalg.norm(zeta)
    return HPolySystem(1, (d,), (poly,), zeta)


def refine_root(system: HPolySystem, start, max_iter: int = 50, tol: float = 1e-15) -> np.ndarray:
    """Projective Newton iteration; returns a unit-norm root representative."""
    x = np.asarray(start, dtype=np.complex128)
    x = x / np.linalg.norm(x)
    for _ in range(max_iter):
        lhs = np.vstack([system.jacobian(x), x.conj().reshape(1, -1)])
        rhs = np.concatenate([-system.evaluate(x), [0.0]])
        try:
            dx = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError as exc:
            raise SigmaError("singular Newton system while refining root") from exc
        x = x + dx
        x = x / np.linalg.norm(x)
        if np.linalg.norm(dx) <= tol:
            break
    return x


def _normalized(system: HPolySystem, root):
    if root is None:
        root = system.root
    if root is None:
        raise PreconditionError("a root is required")
    scale = system.weyl_norm()
    if scale == 0.0:
        raise PreconditionError("zero system")
    zeta = np.asarray(root, dtype=np.complex128).ravel()
    if zeta.size != system.n + 1 or np.linalg.norm(zeta) == 0.0:
        raise PreconditionError(f"root must be a nonzero vector of length {system.n + 1}")
    unit = system.scaled(1.0 / scale).with_root(zeta / np.linalg.norm(zeta))
    return unit, scale


def _restricted_inverse(unit: HPolySystem):
    zeta = unit.root
    res = float(np.linalg.norm(unit.evaluate(zeta)))
    if res > 1e-9:
        raise PreconditionError(f"|f(root)| = {res:.3e} for the normalized system; not a root")
    basis = numlin.orthonormal_complement_basis(zeta)
    restricted = unit.jacobian(zeta) @ basis
    return checked_inverse(restricted, "Df(root) restricted to root-perp"), basis


def point_kappas(system: HPolySystem, root=None) -> tuple[float, float]:
    """``(kappa, kappa_avg)`` at one root from the restricted Jacobian alone."""
    unit, _ = _normalized(system, root)
    r_inv, _ = _restricted_inverse(unit)
    return numlin.operator_norm(r_inv), numlin.frobenius_norm(r_inv) / math.sqrt(unit.dim)


def evaluation_matrix(system: HPolySystem, zeta) -> np.ndarray:
    """Map from Weyl coordinates of a system to its value at ``zeta``."""
    n = system.n
    blocks = []
    for i, d in enumerate(system.degrees):
        row = [math.sqrt(multinomial(a)) * np.prod(zeta ** np.array(a)) for a in monomials(n + 1, d)]
        block = np.zeros((n, len(row)), dtype=np.complex128)
        block[i] = row
        blocks.append(block)
    return np.hstack(blocks)


def build_hpoly_system(system: HPolySystem, root=None, p_list=(2,)) -> ProblemAnalysis:
    unit, scale = _normalized(system, root)
    r_inv, basis = _restricted_inverse(unit)
    coords = unit.weyl_coordinates()
    tangent = numlin.orthonormal_complement_basis(coords)
    ev = evaluation_matrix(unit, unit.root)
    cmap = ConditionMap.from_matrix(-r_inv @ ev @ tangent)

    n_dim = unit.dim
    op, fro = numlin.operator_norm(r_inv), numlin.frobenius_norm(r_inv)
    closed = KappaReport(op, fro, {2: fro / math.sqrt(n_dim)})
    return ProblemAnalysis(
        "hpoly_system",
        unit,
        cmap,
        closed,
        engine_report(cmap, p_list),
        input_norm=1.0,
        output_norm=1.0,
        solution=unit.root,
        notes={"scale": scale, "N": n_dim, "tangent": tangent, "root_basis": basis},
    )


@dataclass(frozen=True)
class AggregateKappa:
    kappa: float
    kappa_avg: float
    roots_used: int
    bezout: int
    deficient: bool


def aggregate_kappa_system(system: HPolySystem, roots) -> AggregateKappa:
    """Root-mean-square of pointwise condition numbers, normalized by the Bezout number."""
    roots = list(roots)
    if not roots:
        raise PreconditionError("need at least one root")
    pairs = [point_kappas(system, z) for z in roots]
    total = system.bezout
    k2 = math.fsum(k * k for k, _ in pairs)
    a2 = math.fsum(a * a for _, a in pairs)
    return AggregateKappa(math.sqrt(k2 / total), math.sqrt(a2 / total), len(roots), total, len(roots) < total)


@register_response("hpoly_system")
def _respond(analysis, d, t):
    unit = analysis.instance
    coords = unit.weyl_coordinates() + t * (analysis.notes["tangent"] @ complex_direction(d, unit.dim))
    moved = HPolySystem.from_weyl_coordinates(unit.n, unit.degrees, coords)
    zeta, basis = unit.root, analysis.notes["root_basis"]
    a = np.zeros(unit.n, dtype=np.complex128)
    for _ in range(50):
        x = zeta + basis @ a
        step = np.linalg.solve(moved.jacobian(x) @ basis, moved.evaluate(x))
        a = a - step
        if np.linalg.norm(step) <= 1e-16:
            break
    limit = 10 * t * analysis.engine.kappa * np.linalg.norm(d) + 1e-12
    if np.linalg.norm(a) > limit:
        raise TrackingFailure(f"root moved {np.linalg.norm(a):.3e}, more than {limit:.3e}")
    return numlin.realify_vector(a)
