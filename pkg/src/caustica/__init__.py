"""Billiard-geometric constructions on constant-curvature surfaces.

String and area constructions, Poritsky and Lazutkin parameters, billiard maps
in Lazutkin coordinates, outer billiards, Ceva and tangent incidence tests, and
the 4-jet ODE for curves with the string Poritsky property.
"""

from .billiards import (
    LazutkinChart,
    PhasePoint,
    WeaklyBilliardMap,
    billiard_involution,
    billiard_lazutkin_chart,
    billiard_map_sy,
    bounce,
    caustic_residual,
    jacobian,
    lazutkin_transform,
    normal_form_check,
    orbit,
    phi_of_y,
    plog_bounds_check,
    reflect,
    toy_map,
    y_of_phi,
)
from .curves import (
    ConicSpec,
    ConvexCurve,
    arc_length,
    circle,
    ellipse,
    geodesic_circle,
    geodesic_curvature,
    geodesic_curvature_normal_chart,
    graph,
    lambda_defect,
    lazutkin_parameter,
    make_conic,
    parse_curve,
    polar_curve,
    quartic_oval,
    string_length_L,
    tangent_geodesic,
    tangent_intersection,
)
from .errors import (
    CausticaError,
    ConstructionError,
    ConvergenceError,
    ConvexityError,
    DomainError,
    IllConditionedError,
    RangeError,
    UnsupportedKindError,
)
from .incidence import (
    GeodesicTriangle,
    ceva_product,
    cevian_feet,
    coboundary_ratio,
    concurrency_residual,
    tangent_incidence_check,
)
from .jets import (
    Jet4,
    conic_through_jet,
    integrate_jet_ode,
    jet_curve,
    lambda6,
    lambda_taylor,
    sigma_n,
    solve_b5,
)
from .outer import (
    area_construction,
    area_cut,
    area_map,
    area_poritsky_check,
    cap_area,
    chord_angle_ratio,
    enclosed_area,
    homothety_fit,
    outer_map,
    outer_map_area,
)
from .strings import (
    PoritskyReport,
    StringCurve,
    bisector_direction,
    lasyl_ratio,
    poritsky_check,
    poritsky_lazutkin_fit,
    string_curve,
    string_curve_discrepancy,
    string_map,
    t_increments,
)
from .surface import (
    Surface,
    UnitTangent,
    big_psi,
    circle_circumference,
    distance,
    exp_map,
    geodesic_flow,
    make_surface,
    normal_chart,
    psi,
    unit_tangent,
)

__version__ = "0.1.0"
