"""Problem-family adapters: assembled condition maps plus closed-form values."""
from .base import ProblemAnalysis, validate_first_order
from .eigen import EigenAnalysis, EigenPair, build_eigen, solve_eigenpair
from .hpoly import (
    AggregateKappa,
    HPolySystem,
    aggregate_kappa_system,
    build_hpoly_system,
    homogenize_upoly,
    monomials,
    multinomial,
    point_kappas,
    refine_root,
)
from .kernel import KernelProblem, build_kernel, solve_kernel
from .linear import LinearFixedB, LinearGeneral, build_linear_fixed_b, build_linear_general
from .upoly import UPoly, build_upoly, poly_norm, roots_upoly

__all__ = [
    "AggregateKappa",
    "EigenAnalysis",
    "EigenPair",
    "HPolySystem",
    "KernelProblem",
    "LinearFixedB",
    "LinearGeneral",
    "ProblemAnalysis",
    "UPoly",
    "aggregate_kappa_system",
    "analyze_instance",
    "build_eigen",
    "build_hpoly_system",
    "build_kernel",
    "build_linear_fixed_b",
    "build_linear_general",
    "build_upoly",
    "homogenize_upoly",
    "monomials",
    "multinomial",
    "point_kappas",
    "poly_norm",
    "refine_root",
    "roots_upoly",
    "solve_eigenpair",
    "solve_kernel",
    "validate_first_order",
]


def analyze_instance(instance, p_list=(2,)):
    """Dispatch an instance dataclass to its family builder."""
    if isinstance(instance, LinearFixedB):
        return build_linear_fixed_b(instance.A, instance.b, p_list)
    if isinstance(instance, LinearGeneral):
        return build_linear_general(instance.A, instance.b, p_list)
    if isinstance(instance, EigenPair):
        return build_eigen(instance.A, instance.which, p_list)
    if isinstance(instance, KernelProblem):
        return build_kernel(instance.A, instance.rank, p_list=p_list)
    if isinstance(instance, UPoly):
        return build_upoly(instance.coefficients, instance.root, instance.metric, p_list)
    if isinstance(instance, HPolySystem):
        return build_hpoly_system(instance, p_list=p_list)
    raise TypeError(f"unsupported instance type {type(instance).__name__}")
