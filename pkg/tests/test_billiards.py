import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caustica.billiards import (
    LazutkinChart,
    PhasePoint,
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
from caustica.curves import circle, ellipse, geodesic_circle, lazutkin_parameter
from caustica.errors import DomainError, RangeError
from caustica.surface import UnitTangent, angle, make_surface, unit_tangent

CIRC = circle(1.0)
ELL = ellipse(2, 1)
SQRT8 = 2 * math.sqrt(2)


# phi(y) loses conditioning as y -> 2, so stay a little away from pi
@settings(max_examples=50, deadline=None)
@given(st.floats(1e-8, 3.0))
def test_phase_conversions_roundtrip(phi):
    assert phi_of_y(y_of_phi(phi)) == pytest.approx(phi, abs=1e-14)
    assert y_of_phi(phi) == pytest.approx(1 - math.cos(phi), abs=1e-15)


def test_phase_point_domain():
    assert PhasePoint.from_y(0.1, 1 - math.cos(0.3)).phi == pytest.approx(0.3, abs=1e-14)
    with pytest.raises(DomainError):
        PhasePoint(0.0, math.pi)
    with pytest.raises(DomainError):
        PhasePoint.from_y(0.0, 2.0)


def test_circle_map_is_rotation():
    F = billiard_map_sy(CIRC)
    y = 1 - math.cos(0.1)
    s1, y1 = F(0.0, y)
    assert s1 == pytest.approx(0.2, abs=1e-13)
    assert y1 == pytest.approx(y, abs=1e-15)
    assert y == pytest.approx(4.99583e-3, abs=1e-8)


def test_small_y_advance_rate():
    F = billiard_map_sy(CIRC)
    errs = [abs(F(0.0, y)[0] / math.sqrt(y) - SQRT8) for y in (1e-4, 1e-6)]
    assert errs[1] < 1e-5 and errs[1] < errs[0] / 50


def test_x_axis_fixed():
    assert billiard_map_sy(ELL)(0.7, 0.0) == (0.7, 0.0)


@pytest.mark.parametrize("curve", [CIRC, ELL], ids=["circle", "ellipse"])
def test_jacobian_unit_at_sample_point(curve):
    J = jacobian(billiard_map_sy(curve), 0.3, 1e-3)
    assert abs(np.linalg.det(J) - 1) < 1e-6


def test_symplectic_on_grid_is_unit():
    F = billiard_map_sy(ELL)
    for s in np.linspace(-1.0, 1.0, 3):
        for y in (1e-4, 1e-2):
            assert abs(np.linalg.det(jacobian(F, s, y)) - 1) < 1e-6


@pytest.mark.parametrize("phi", [0.3, 1.0, 2.0])
def test_involution_squares_to_identity(phi):
    s1, p1 = billiard_involution(ELL, 0.4, phi)
    s2, p2 = billiard_involution(ELL, s1, p1)
    assert math.remainder(s2 - 0.4, ELL.length) == pytest.approx(0, abs=1e-8)
    assert p2 == pytest.approx(phi, abs=1e-8)


def test_advance_matches_curvature_radius():
    u0 = float(ELL.u_of_s(0.4))
    k = float(ELL.kappa(0.4))
    errs = []
    for phi in (1e-2, 1e-3):
        u1, _ = bounce(ELL, u0, phi)
        errs.append(abs((float(ELL.s_of_u(u1)) - 0.4) / (2 * phi / k) - 1))
    assert errs[1] <= errs[0] / 2


def test_bounce_rejects_tangent_angle():
    with pytest.raises(DomainError):
        bounce(ELL, 0.0, 0.0)


def test_reflect_circle_preserves_angle():
    phi = 0.4
    g = unit_tangent(make_surface("euclidean"), [1.0, 0.0], [-math.sin(phi), math.cos(phi)])
    # start just inside the boundary so the first forward hit is the far end of the chord
    h = reflect(CIRC, UnitTangent(g.point + 1e-9 * g.vector, g.vector))
    th = math.atan2(h.point[1], h.point[0])
    assert th == pytest.approx(2 * phi, abs=1e-8)
    tan = np.array([-math.sin(th), math.cos(th)])
    assert math.acos(np.clip(h.vector @ tan, -1, 1)) == pytest.approx(phi, abs=1e-8)


def test_reflect_normal_incidence_reverses():
    g = UnitTangent(np.array([0.0, 0.0]), np.array([1.0, 0.0]))
    h = reflect(CIRC, g)
    np.testing.assert_allclose(h.point, [1, 0], atol=1e-12)
    np.testing.assert_allclose(h.vector, [-1, 0], atol=1e-12)


def test_reflect_sphere_small_circle_angle_equality():
    S = make_surface("sphere")
    c = geodesic_circle("sphere", 0.6)
    g = unit_tangent(S, [0.0, 0.0, 1.0], [1.0, 0.3, 0.0])
    h = reflect(c, g)
    P = h.point
    # incoming direction at P, obtained by flowing g to P
    from caustica.surface import distance, geodesic_flow

    v_in = geodesic_flow(S, g, distance(S, g.point, P)).vector
    T = np.cross(np.array([0, 0, 1.0]), P)
    T /= np.linalg.norm(T)
    assert abs(angle(S, P, v_in, T) - angle(S, P, h.vector, T)) < 1e-9


def test_reflect_missing_curve():
    g = UnitTangent(np.array([2.0, 0.0]), np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        reflect(CIRC, g)


def test_lazutkin_transform_examples():
    X, Y = lazutkin_transform(lambda x: SQRT8 + 0 * np.asarray(x), (0.4, 0.005))
    assert X == pytest.approx(0.2, abs=1e-13) and Y == pytest.approx(0.01, abs=1e-15)
    X, Y = lazutkin_transform(lambda x: 1 + 0 * np.asarray(x), (0.4, 0.005))
    assert (X, Y) == pytest.approx((0.4, 0.005), abs=1e-14)


def test_lazutkin_chart_matches_lazutkin_parameter():
    chart = billiard_lazutkin_chart(ELL)
    s = np.linspace(-2, 2, 9)
    lp = np.array([lazutkin_parameter(ELL, v) for v in s])
    assert np.max(np.abs(chart.X(s) * SQRT8 ** (2 / 3) - lp)) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(1e-6, 0.5))
def test_lazutkin_chart_inverse(x, y):
    chart = billiard_lazutkin_chart(ELL)
    X, Y = chart(np.array(x), np.array(y))
    x1, y1 = chart.inverse(X, Y)
    assert float(x1) == pytest.approx(x, abs=1e-11)
    assert float(y1) == pytest.approx(y, rel=1e-10)


def test_normal_form_circle():
    rep = normal_form_check(billiard_map_sy(CIRC), billiard_lazutkin_chart(CIRC))
    assert abs(rep.slope - 0.5) < 1e-4 and abs(rep.coefficient - 1) < 1e-3
    assert np.max(np.abs(rep.dY)) < 1e-15


def test_normal_form_ellipse():
    rep = normal_form_check(billiard_map_sy(ELL), billiard_lazutkin_chart(ELL))
    assert rep.passed()
    assert abs(rep.slope - 0.5) < 0.01 and abs(rep.coefficient - 1) < 0.02


def test_normal_form_refined_f2_off_vertex():
    chart = billiard_lazutkin_chart(ELL)
    rep = normal_form_check(billiard_map_sy(ELL), chart, X0=float(chart.X(np.array(0.6))))
    assert rep.f2_measured is not None
    assert rep.f2_measured == pytest.approx(rep.f2_predicted, rel=0.05)


def test_normal_form_toy_map_exact():
    F = toy_map()
    rep = normal_form_check(F, LazutkinChart(F.w, (-1, 1)))
    assert rep.passed()
    assert rep.slope == pytest.approx(0.5, abs=1e-12) and rep.coefficient == pytest.approx(1, abs=1e-12)


def test_normal_form_needs_samples():
    F = toy_map()
    with pytest.raises(ValueError):
        normal_form_check(F, LazutkinChart(F.w, (-1, 1)), n=5)


def test_circle_orbit_constant_step():
    rec = orbit(billiard_map_sy(CIRC), billiard_lazutkin_chart(CIRC), (0.0, 1e-4), 0.5)
    step = np.diff(rec.X)
    assert np.ptp(step) < 1e-12
    assert 0.5 - step[0] <= rec.m * step[0] <= 0.5
    bounds = plog_bounds_check(rec)
    assert bounds.alpha < 1e-10 and bounds.beta < 1e-5


def test_orbit_fixed_point_capped():
    rec = orbit(toy_map(), LazutkinChart(toy_map().w, (-1, 1)), (0.0, 0.0), 0.5)
    assert rec.capped and rec.m == math.inf


def test_orbit_budget_and_window():
    F = toy_map()
    chart = LazutkinChart(F.w, (-1, 1))
    assert orbit(F, chart, (0.0, 1e-8), 0.5, budget=10).capped
    with pytest.raises(RangeError):
        orbit(F, chart, (0.6, 1e-4), 0.5)


def test_ellipse_orbit_plog_trend():
    F, chart = billiard_map_sy(ELL), billiard_lazutkin_chart(ELL)
    stats = []
    for Y0 in (1e-4, 1e-5, 1e-6):
        rec = orbit(F, chart, (0.0, Y0), 0.5)
        assert np.all(np.diff(rec.X) > 0)
        stats.append(plog_bounds_check(rec))
    alphas = [b.alpha for b in stats]
    assert alphas[0] > alphas[1] > alphas[2]
    assert stats[2].beta < 0.1
    assert stats[0].beta > stats[1].beta > stats[2].beta


def test_caustic_property():
    assert caustic_residual(ELL, 1e-3, 0.7) < 1e-7
    assert caustic_residual(geodesic_circle("sphere", 0.5), 1e-3, 0.2) < 1e-7
