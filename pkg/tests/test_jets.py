import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from caustica.curves import L_of_params, circle, ellipse, graph
from caustica.errors import ConvexityError, DomainError, IllConditionedError, UnsupportedKindError
from caustica.jets import (
    Jet4,
    conic_through_jet,
    conic_y,
    integrate_jet_ode,
    jet_curve,
    lambda6,
    lambda_taylor,
    sigma_n,
    solve_b5,
)
from caustica.surface import make_surface

CIRCLE_JET = Jet4(0.0, (0.0, 0.0, 1.0, 0.0, 3.0))


def _ellipse_poly(a, b, N=30):
    """Series of ``b - b sqrt(1 - x^2/a^2)`` (lower arc through the origin)."""
    c = np.zeros(2 * N + 1)
    for n in range(1, N + 1):
        c[2 * n] = -math.comb(2 * n, n) / ((1 - 2 * n) * 4**n) / a ** (2 * n)
    return b * c


def _ellipse_derivs(a, b, x0, k=5):
    p, out = _ellipse_poly(a, b), []
    for _ in range(k + 1):
        out.append(float(P.polyval(x0, p)))
        p = P.polyder(p)
    return out


def _ellipse_y(a, b, x):
    return b - b * np.sqrt(1 - x * x / (a * a))


def test_series_oracle_matches_closed_form():
    x = np.linspace(-0.5, 0.5, 11)
    assert np.allclose(P.polyval(x, _ellipse_poly(2, 1)), _ellipse_y(2, 1, x), atol=1e-15)


def test_jet_validation():
    with pytest.raises(ValueError):
        Jet4(0.0, (1, 2, 3))
    J = Jet4.from_sequence([0.5, 1, 2, 3, 4, 5])
    assert J.x == 0.5 and J.b == (1.0, 2.0, 3.0, 4.0, 5.0)
    np.testing.assert_array_equal(J.as_array(), [0.5, 1, 2, 3, 4, 5])


def test_jet_curve_rejects_concave():
    with pytest.raises(ConvexityError):
        jet_curve("euclidean", 0.0, (0.0, 0.0, -1.0))


def test_sigma_values():
    assert sigma_n((0, 0, 0, 1), "euclidean", 5) == pytest.approx(1 / 720, rel=1e-9)
    assert sigma_n((0, 0, 0, 1), "euclidean", 3) == 0
    assert sigma_n((0, 0, 0, 1), "euclidean", 4) == 0
    assert sigma_n((0, 0, 0, 1), "euclidean", 6) == 0


def test_sigma_scaling_with_curvature():
    # kappa = 2 and |u| = 1: sigma_5 scales like kappa^-5
    assert sigma_n((0, 0, 0, 2), "euclidean", 5) == pytest.approx(1 / 720 / 32, rel=1e-9)
    # slope b1 = 1: |u| = sqrt(2), |w| = 1/sqrt(2), kappa = 2^(-3/2), so |u| kappa = 1/2
    assert sigma_n((0, 0, 1, 1), "euclidean", 5) == pytest.approx(32 / 720 / math.sqrt(2), rel=1e-9)


def test_lambda_taylor_circle_zero():
    lt = lambda_taylor(circle(1.0))
    assert np.max(np.abs(lt.coeffs)) < 1e-9


def test_lambda_taylor_ellipse_below_noise():
    lt = lambda_taylor(ellipse(2, 1))
    assert abs(lt[4]) < 1e-8 and abs(lt[6]) < 1e-5
    assert lt[3] == 0 and lt[5] == 0
    assert lt.up_to(6).keys() == {3, 4, 5, 6}


def test_lambda_taylor_order_and_conditioning():
    with pytest.raises(ValueError):
        lambda_taylor(circle(1.0), order=2)
    with pytest.raises(IllConditionedError):
        lambda_taylor(circle(1.0), t_min_ratio=1e-4, max_degree=40)


def test_lambda6_of_perturbed_parabola():
    g = graph([0.0, 1.0, 0.0, 0.0, 1.0], half_width=0.8)
    assert lambda_taylor(g)[6] == pytest.approx(1 / 720, rel=0.02)


@pytest.mark.parametrize("kind", ["euclidean", "sphere", "hyperbolic"])
def test_lambda6_slope_is_sigma5(kind):
    J = Jet4(0.0, (0.0, 0.0, 1.0, 0.0, 0.0))
    l0, l1, l2 = (lambda6(kind, J, b) for b in (0.0, 1.0, 2.0))
    sig = sigma_n((0, 0, 0, 1), kind, 5)
    assert (l1 - l0) / sig == pytest.approx(1, rel=0.02)
    # affinity: three-point collinearity
    assert abs((l2 - l1) - (l1 - l0)) < 0.01 * abs(l1 - l0)


def test_even_perturbation_leaves_lambda6():
    noise = 1e-6
    base = lambda6("euclidean", Jet4(0.0, (0.0, 0.0, 1.0, 0.0, 0.0)), 0.0)
    for b4 in (0.5, 1.0):
        pert = lambda6("euclidean", Jet4(0.0, (0.0, 0.0, 1.0, 0.0, b4)), 0.0)
        assert abs(pert - base) < noise
    assert noise < 0.01 / 720


def test_lambda6_ignores_continuation_beyond_degree5():
    J = Jet4(0.0, (0.0, 0.0, 1.0, 0.3, 0.5))
    a = lambda6("euclidean", J, 0.7)
    b = lambda6("euclidean", J, 0.7, tail=(2.0,))
    assert abs(a - b) < 2e-3 / 720


@pytest.mark.parametrize("b", [0.2, -0.2])
def test_l_difference_for_degree5_perturbation(b):
    g0 = graph([0.0, 1.0], half_width=0.5)
    g1 = graph([0.0, 1.0, 0.0, 0.0, 120 * b], half_width=0.5)
    t = 0.025
    d = [float(L_of_params(g, np.array(0.0), g.u_of_t(np.array(t)))) for g in (g0, g1)]
    assert (d[1] - d[0]) / (b * t**6) == pytest.approx(1 / 12, rel=0.03)


def test_solve_b5_circle_and_vertex():
    assert abs(solve_b5(CIRCLE_JET)) < 1e-3
    d = _ellipse_derivs(2, 1, 0.0)
    assert abs(solve_b5(Jet4(0.0, tuple(d[:5])))) < 1e-5


@pytest.mark.parametrize("x0", [0.3, 0.5, -0.6])
def test_solve_b5_matches_conic_fifth_derivative(x0):
    d = _ellipse_derivs(2, 1, x0)
    assert solve_b5(Jet4(x0, tuple(d[:5]))) == pytest.approx(d[5], rel=1e-3)


def test_solve_b5_rejects_general_chart():
    S = make_surface({"kind": "general-chart", "metric": lambda p: np.diag([1.0, 1.0])})
    with pytest.raises(UnsupportedKindError):
        solve_b5(CIRCLE_JET, S)


def test_conic_through_jet_recovers_ellipse():
    d = _ellipse_derivs(2, 1, 0.5)
    c = conic_through_jet(Jet4(0.5, tuple(d[:5])))
    c = c / c[0]
    # x^2 + 4 y^2 - 8 y = 0 for the ellipse x^2/4 + (y - 1)^2 = 1
    np.testing.assert_allclose(c, [1, 0, 4, 0, -8, 0], atol=1e-9)
    x = np.linspace(0.3, 0.7, 5)
    np.testing.assert_allclose(conic_y(c, x, np.zeros_like(x)), _ellipse_y(2, 1, x), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(0.5, 3.0), st.floats(0.5, 3.0))
def test_conic_through_jet_of_ellipses(x0, a, b):
    d = _ellipse_derivs(a, b, x0 * a / 2, k=4)
    c = conic_through_jet(Jet4(x0 * a / 2, tuple(d)))
    xs = x0 * a / 2 + np.linspace(-0.05, 0.05, 5)
    assert np.allclose(conic_y(c, xs, _ellipse_y(a, b, xs)), _ellipse_y(a, b, xs), atol=1e-9)


def test_jet_ode_circle():
    sol = integrate_jet_ode(CIRCLE_JET, x_range=0.1, step=1e-2)
    assert sol.complete
    assert sol.x[0] == pytest.approx(-0.1) and sol.x[-1] == pytest.approx(0.1)
    assert np.max(np.abs(sol.y - (1 - np.sqrt(1 - sol.x**2)))) < 1e-5


@pytest.mark.parametrize("x0", [0.0, 0.5])
def test_jet_ode_ellipse(x0):
    d = _ellipse_derivs(2, 1, x0)
    sol = integrate_jet_ode(Jet4(x0, tuple(d[:5])), x_range=0.1, step=1e-2)
    assert np.max(np.abs(sol.y - _ellipse_y(2, 1, sol.x))) < 1e-5


def test_jet_ode_two_jets_same_conic_overlap():
    sols = [integrate_jet_ode(Jet4(x0, tuple(_ellipse_derivs(2, 1, x0)[:5])), x_range=0.1, step=1e-2)
            for x0 in (0.0, 0.05)]
    a, b = sols
    common = np.intersect1d(np.round(a.x, 12), np.round(b.x, 12))
    assert len(common) >= 10
    ya = np.interp(common, a.x, a.y)
    yb = np.interp(common, b.x, b.y)
    assert np.max(np.abs(ya - yb)) < 1e-5


def _sphere_circle_graph(r):
    """``y(x)`` of the geodesic circle of radius ``r`` through the origin in the exponential chart."""
    cen = np.array([0.0, math.sin(r), math.cos(r)])

    def model(x, y):
        rho = math.hypot(x, y)
        if rho == 0:
            return np.array([0.0, 0.0, 1.0])
        return np.array([math.sin(rho) * x / rho, math.sin(rho) * y / rho, math.cos(rho)])

    return lambda x: brentq(lambda y: math.acos(min(1.0, model(x, y) @ cen)) - r, -0.3, 0.3, xtol=1e-16)


def test_jet_ode_sphere_geodesic_circle():
    r = 0.5
    yc = _sphere_circle_graph(r)
    xs = 0.2 * np.cos(np.pi * (np.arange(60) + 0.5) / 60)
    fit = C.Chebyshev.fit(xs, [yc(x) for x in xs], 28, domain=[-0.2, 0.2])
    b = tuple(float(fit.deriv(k)(0.0)) for k in range(5))
    assert b[2] == pytest.approx(1 / math.tan(r), rel=1e-10)
    sol = integrate_jet_ode(Jet4(0.0, b), "sphere", x_range=0.1, step=2e-2)
    assert sol.complete
    assert np.max(np.abs(sol.y - np.array([yc(x) for x in sol.x]))) < 1e-6


def test_jet_ode_range_validation():
    with pytest.raises(DomainError):
        integrate_jet_ode(CIRCLE_JET, x_range=(0.1, 0.2))
