"""Degree-shaped polynomial Lax matrices and their integrable structure.

The package models the moduli space M(r,d) of r x r polynomial matrices
with a fixed degree shape, the spectral curves they define, the residual
gauge action with its slices and normal forms, the isospectral vector
fields with a Lie-Poisson origin, and the separation of variables onto
degree-g divisors.  See the module docstrings for the conventions.
"""

from .config import Tolerances
from .errors import (
    DivisionResidue,
    LaxflowError,
    LinearSolveFailure,
    MultipleRoot,
    NotInImage,
    NotInMc,
    NotInSlice,
    NuNotFound,
    ParseError,
    RamifiedPoint,
    ShapeViolation,
    SingularB,
    SliceDeparture,
    ZeroDenominator,
)
from .flows import (
    FieldSpec,
    Trajectory,
    field_eval,
    integrate,
    lie_bracket_residual,
    projected_field,
    upsilon,
    y_fields,
)
from .gauge import (
    GaugeElement,
    LieGaugeElement,
    ThetaReport,
    d_matrix,
    d_poly,
    gauge_apply,
    gauge_compose,
    gauge_identity,
    gauge_invert,
    in_Mc,
    normal_form,
    orbit_tangent_basis,
    theta_membership,
)
from .poisson import (
    MultiPoint,
    Nodes,
    ScalarField,
    bracket,
    casimir,
    default_nodes,
    hamiltonian_field_check,
    image_predicate,
    moment_map,
    phi,
    phi_inverse,
    trace_hamiltonian,
)
from .polymat import (
    INFINITY,
    Poly,
    PolyMatrix,
    eval_matrix,
    from_json,
    in_slice,
    leading_matrix,
    make_polymatrix,
    random_sample,
    to_json,
)
from .sov import (
    Divisor,
    even_mumford_field,
    r3_y_formulas,
    sov_divisor,
    theta_complement_check,
)
from .spectral import (
    CurveReport,
    SpectralCurve,
    char_poly,
    curve_eval,
    genus,
    is_unramified_over,
    smoothness_check,
)
from .verify import CheckResult, VerifyReport, report_to_json, verify_suite

__version__ = "0.1.0"
