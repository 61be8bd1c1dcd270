"""Decay analysis for oscillatory integral operators with polynomial phases.

Exact Newton-polyhedron invariants and predicted sharp decay exponents for
the operator with kernel e^{i lambda S(x,y)} phi(x,y) and its damped
variants, plus the numerical machinery to verify the predictions:
discretized appliers, operator-norm estimators, lambda sweeps with slope
fits, and structural diagnostics.
"""

from . import errors
from .damping import (
    DampingFactor,
    build_damping,
    build_modified_damping,
    detect_special_form,
    eval_damped_weight,
)
from .newton import (
    NewtonPolyhedron,
    VertexReport,
    bisectrix_coordinate,
    polyhedron,
    sharp_pair_estimate,
    vertex_reports,
)
from .operators import (
    CutoffSpec,
    DiscretizedOperator,
    SweepResult,
    discretize,
    dyadic_piece,
    l2_norm,
    log_spaced,
    lp_norm_estimate,
    sweep,
)
from .phase import format_phase, parse_phase
from .poly import BivariatePolynomial, degenerate_split_check, mixed_hessian
from .puiseux import (
    PuiseuxSeries,
    RootClusterTree,
    classify_roots,
    invert_linear_root,
    puiseux_roots,
    vertex_crosscheck,
)
from .diagnostics import (
    almost_orthogonality_check,
    critical_exponent_l1_check,
    h1e_atom_check,
    van_der_corput_check,
)

__all__ = [
    "BivariatePolynomial",
    "CutoffSpec",
    "DampingFactor",
    "DiscretizedOperator",
    "NewtonPolyhedron",
    "PuiseuxSeries",
    "RootClusterTree",
    "SweepResult",
    "VertexReport",
    "almost_orthogonality_check",
    "bisectrix_coordinate",
    "build_damping",
    "build_modified_damping",
    "classify_roots",
    "critical_exponent_l1_check",
    "degenerate_split_check",
    "detect_special_form",
    "discretize",
    "dyadic_piece",
    "errors",
    "eval_damped_weight",
    "format_phase",
    "h1e_atom_check",
    "invert_linear_root",
    "l2_norm",
    "log_spaced",
    "lp_norm_estimate",
    "mixed_hessian",
    "parse_phase",
    "polyhedron",
    "puiseux_roots",
    "sharp_pair_estimate",
    "sweep",
    "van_der_corput_check",
    "vertex_crosscheck",
    "vertex_reports",
]

__version__ = "0.1.0"
