"""Condition numbers (classical, Frobenius, p-th average, componentwise, relative)
for linear systems, eigenproblems, kernels and polynomial roots, with Monte Carlo
and finite-difference cross-checks."""
from .condcore import (
    ConditionMap,
    KappaReport,
    MomentEstimate,
    analyze_map,
    componentwise_avg,
    componentwise_kappa,
    gaussian_norm_moment,
    kappa,
    kappa_avg,
    kappa_avg_estimate,
    kappa_frobenius,
    relative_report,
    sphere_average_oracle,
)
from .errors import (
    AmbiguousRankError,
    CondlabError,
    DegreeDeficientError,
    LinAlgFailure,
    OutputAtOriginError,
    PreconditionError,
    SigmaError,
    TrackingFailure,
    UnsupportedModeError,
)
from .kernels import BACKEND
from .problems import ProblemAnalysis, analyze_instance, validate_first_order

__version__ = "0.1.0"
