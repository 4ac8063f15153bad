"""Reference-element toolkit for H(div) finite elements on rectangles.

Element spaces (RT, BDM, ABF on the unit square), their degrees of freedom,
moment-based interpolation, L2 projection onto the divergence image, Piola
transport to physical rectangles, and a refinement-study harness that fits
empirical convergence rates against directional predictions.
"""

from .elements import (
    ElementFamily,
    ElementSpace,
    MAX_DEGREE,
    ScalarSpace,
    SpaceMember,
    build_div_space,
    build_space,
    component_degrees,
    gram_matrix,
    space_dimension,
    span_check,
)
from .dofs import DofFunctional, DofSet, apply_dof, build_dofs, dof_vector
from .fields import (
    CallableField,
    FIELD_IDS,
    MS_G,
    MS_X,
    MS_Y,
    ManufacturedField,
    ReproductionField,
    commuting_battery,
    env_seed,
    get_field,
    make_reproduction_field,
)
from .harness import (
    ConvergenceTable,
    ErrorRecord,
    MODES,
    PhysicalRect,
    StudyConfig,
    bdm_sharpness_witness,
    default_suite_configs,
    error_Lp,
    interpolate_on_rect,
    norm_Lp,
    piola_pullback,
    piola_push,
    run_refinement_study,
    theorem_suite,
)
from .interpolation import (
    InterpolationOperator,
    L2Projector,
    OperatorConstructionError,
    commuting_residual,
    interpolate,
    reference_operator,
    reference_projector,
    unisolvence_report,
)
from .poly import Polynomial2D, VectorPoly2D, curl_scalar, divergence, integrate_rect
from .quadrature import (
    QuadratureRule1D,
    QuadratureRule2D,
    edge_rule,
    gauss_legendre_01,
    n_for_degree,
    tensor_rule,
)

__version__ = "0.1.0"

__all__ = [
    "CallableField",
    "ConvergenceTable",
    "DofFunctional",
    "DofSet",
    "ElementFamily",
    "ElementSpace",
    "ErrorRecord",
    "FIELD_IDS",
    "InterpolationOperator",
    "L2Projector",
    "MAX_DEGREE",
    "MODES",
    "MS_G",
    "MS_X",
    "MS_Y",
    "ManufacturedField",
    "OperatorConstructionError",
    "PhysicalRect",
    "Polynomial2D",
    "QuadratureRule1D",
    "QuadratureRule2D",
    "ReproductionField",
    "ScalarSpace",
    "SpaceMember",
    "StudyConfig",
    "VectorPoly2D",
    "apply_dof",
    "bdm_sharpness_witness",
    "build_div_space",
    "build_dofs",
    "build_space",
    "commuting_battery",
    "commuting_residual",
    "component_degrees",
    "curl_scalar",
    "default_suite_configs",
    "divergence",
    "dof_vector",
    "edge_rule",
    "env_seed",
    "error_Lp",
    "gauss_legendre_01",
    "get_field",
    "gram_matrix",
    "integrate_rect",
    "interpolate",
    "interpolate_on_rect",
    "make_reproduction_field",
    "n_for_degree",
    "norm_Lp",
    "piola_pullback",
    "piola_push",
    "reference_operator",
    "reference_projector",
    "run_refinement_study",
    "space_dimension",
    "span_check",
    "theorem_suite",
    "unisolvence_report",
]
