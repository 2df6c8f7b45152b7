"""Verified enclosures of Riemann-Stieltjes delta and nabla integrals on
time scales.

>>> from tsstieltjes import integrate, parse_scale
>>> r = integrate("t", "t^2", parse_scale("uniform(0,3,1)"), 0, 3, "delta")
>>> r.value, r.exact
(13.0, True)
"""

from . import kernels
from .errors import (
    DomainError,
    ExprSyntaxError,
    GNotIncreasing,
    InvalidRatio,
    InvalidScale,
    JobError,
    NoConvergence,
    NonTermination,
    NotCommensurate,
    NotInScale,
    OutOfRange,
    PhiNotIncreasing,
    SampleOutOfBox,
    TooManyPoints,
    TSError,
)
from .expr import Enclosure, Expr, box_derivative, differentiate, eval_interval, evaluate, parse
from .integrator import (
    CheckResult,
    DarbouxSums,
    IntegralResult,
    IntegratorConfig,
    by_parts_residual,
    comparison_check,
    darboux_sums,
    integrate,
    map_scale,
    qscale_oracle,
    riemann_stieltjes_sum,
    scattered_sum_oracle,
    single_step,
    substitution_check,
    transition_residual,
)
from .partition import (
    DeltaFineCertificate,
    Partition,
    certify,
    common_refinement,
    delta_fine,
    grid_partition,
    halve_and_refine,
    verify_certificate,
)
from .timescale import (
    BoxKind,
    GeometricCluster,
    IsolatedPoints,
    RealInterval,
    TimeScale,
    make_qscale,
    make_uniform,
    parse_scale,
)

__all__ = [
    "kernels",
    "DomainError",
    "ExprSyntaxError",
    "GNotIncreasing",
    "InvalidRatio",
    "InvalidScale",
    "JobError",
    "NoConvergence",
    "NonTermination",
    "NotCommensurate",
    "NotInScale",
    "OutOfRange",
    "PhiNotIncreasing",
    "SampleOutOfBox",
    "TooManyPoints",
    "TSError",
    "Enclosure",
    "Expr",
    "box_derivative",
    "differentiate",
    "eval_interval",
    "evaluate",
    "parse",
    "CheckResult",
    "DarbouxSums",
    "IntegralResult",
    "IntegratorConfig",
    "by_parts_residual",
    "comparison_check",
    "darboux_sums",
    "integrate",
    "map_scale",
    "qscale_oracle",
    "riemann_stieltjes_sum",
    "scattered_sum_oracle",
    "single_step",
    "substitution_check",
    "transition_residual",
    "DeltaFineCertificate",
    "Partition",
    "certify",
    "common_refinement",
    "delta_fine",
    "grid_partition",
    "halve_and_refine",
    "verify_certificate",
    "BoxKind",
    "GeometricCluster",
    "IsolatedPoints",
    "RealInterval",
    "TimeScale",
    "make_qscale",
    "make_uniform",
    "parse_scale",
]

__version__ = "0.1.0"
