import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caustica.curves import L_of_params, circle, ellipse, geodesic_circle, quartic_oval
from caustica.errors import RangeError
from caustica.strings import (
    bisector_direction,
    lasyl_ratio,
    poritsky_check,
    poritsky_lazutkin_fit,
    string_curve,
    string_curve_discrepancy,
    string_map,
    t_increments,
    tangency_params,
)
from caustica.surface import distance, make_surface, to_model

ELL = ellipse(2, 1)

# regression value measured on the quartic oval x^4 + y^4 = 1 (arc of half-width 0.6)
QUARTIC_PORITSKY_DEV = 3.80e-3


def _confocal_mu(x, y, a2=4.0, b2=1.0):
    """``mu`` with ``x^2/(a2+mu) + y^2/(b2+mu) = 1`` (outer root)."""
    B = a2 + b2 - x * x - y * y
    C = a2 * b2 - x * x * b2 - y * y * a2
    return (-B + np.sqrt(B * B - 4 * C)) / 2


def test_string_map_circle():
    p = 2 * math.tan(0.05) - 0.1
    assert string_map(circle(1.0), p, 0.3) - 0.3 == pytest.approx(0.1, abs=1e-12)
    assert string_map(circle(1.0), 8.34169e-5, 0.0) == pytest.approx(0.1, abs=1e-6)


def test_string_map_rejects_nonpositive_p():
    with pytest.raises(RangeError):
        string_map(ELL, 0.0, 0.1)


def test_string_curve_circle_radius():
    th = 0.05
    sc = string_curve(circle(1.0), 2 * math.tan(th) - 2 * th, n_samples=16)
    assert np.allclose(np.linalg.norm(sc.points, axis=1), 1 / math.cos(th), atol=1e-12)
    assert 1 / math.cos(th) == pytest.approx(1.001251, abs=1e-6)


def test_string_curve_ellipse_is_confocal():
    sc = string_curve(ELL, 1e-3, n_samples=64)
    mu = _confocal_mu(sc.points[:, 0], sc.points[:, 1])
    assert np.ptp(mu) < 1e-6
    assert np.max(np.abs(sc.residuals())) < 1e-12


def test_string_curve_approaches_curve_as_p_shrinks():
    dense = ELL.point(np.linspace(0, ELL.length, 4000))
    dists = []
    for p in (1e-2, 1e-3, 1e-4, 1e-5):
        pts = string_curve(ELL, p, n_samples=32).points
        dists.append(max(np.min(np.linalg.norm(dense - q, axis=1)) for q in pts))
    assert all(a > b for a, b in zip(dists, dists[1:]))


def test_string_map_commutes_with_central_symmetry():
    half = ELL.length / 2
    for s in (0.2, 1.4, 2.9):
        assert string_map(ELL, 1e-3, s + half) == pytest.approx(string_map(ELL, 1e-3, s) + half, abs=1e-10)


def _kappa_arc_spread(p, midpoint=False):
    vals = []
    for s in np.linspace(0, ELL.length, 12, endpoint=False):
        sB = string_map(ELL, p, s)
        k = float(ELL.kappa((s + sB) / 2 if midpoint else s))
        vals.append(k ** (2 / 3) * (sB - s))
    return np.ptp(vals) / np.mean(vals)


def test_kappa_weighted_arc_tends_to_constant():
    spreads = [_kappa_arc_spread(p) for p in (1e-4, 1e-5, 1e-6)]
    # first-order correction is proportional to the arc, i.e. to p^(1/3)
    for a, b in zip(spreads, spreads[1:]):
        assert a / b == pytest.approx(10 ** (1 / 3), rel=0.1)
    assert spreads[-1] < 0.03


def test_kappa_weighted_arc_at_midpoint():
    assert _kappa_arc_spread(1e-4, midpoint=True) < 0.005


def test_bisector_ode_matches_rootfind():
    sc = string_curve(ELL, 1e-3, method="bisector-ode", n_samples=24, s_range=(0.0, 2.0))
    assert string_curve_discrepancy(sc) < 1e-9
    assert np.max(np.abs(sc.residuals())) < 1e-9


def test_string_curve_unknown_method():
    with pytest.raises(ValueError):
        string_curve(ELL, 1e-3, method="guess")


@pytest.mark.parametrize("kind", ["sphere", "hyperbolic"])
def test_string_curve_of_geodesic_circle_is_concentric(kind):
    S = make_surface(kind)
    centre = np.array([0, 0, 1.0]) if kind == "sphere" else np.zeros(2)
    sc = string_curve(geodesic_circle(kind, 0.7), 1e-3, n_samples=12)
    d = [distance(S, centre, q) for q in sc.points]
    assert np.ptp(d) < 1e-12 and d[0] > 0.7


def test_poritsky_check_ellipse_and_circle():
    rep = poritsky_check(ELL, [1e-3], n_samples=50)
    assert rep.passed and rep.max_deviation[0] < 1e-6
    inc = t_increments(circle(1.0), 1e-3, 20)
    assert np.ptp(inc) < 1e-13


def test_poritsky_check_quartic_fails():
    rep = poritsky_check(quartic_oval(), [1e-3], n_samples=50)
    assert not rep.passed
    assert rep.max_deviation[0] > 1e-4
    assert rep.max_deviation[0] == pytest.approx(QUARTIC_PORITSKY_DEV, rel=0.1)


def test_poritsky_lazutkin_fit_ellipse():
    err, slope = poritsky_lazutkin_fit(ELL, 1e-3)
    assert err < 1e-3 and slope > 0


def test_lasyl_ratio_circle():
    c = circle(1.0)
    assert lasyl_ratio(c, 0.0, 0.1) == pytest.approx(1.001001, abs=1e-6)
    assert lasyl_ratio(c, 0.0, 0.01) == pytest.approx(1.0000100, abs=1e-7)


def test_lasyl_ratio_ellipse_vertex_halving():
    r1, r2 = lasyl_ratio(ELL, 0.0, 1e-2), lasyl_ratio(ELL, 0.0, 5e-3)
    assert abs(r1 - 1) < 0.05
    assert abs(r2 - 1) <= 0.5 * abs(r1 - 1)


@pytest.mark.parametrize("s", [1.0, 1.938, 3.875, 5.813])
def test_lasyl_ratio_error_is_first_order_off_vertex(s):
    # away from the vertices the leading error is proportional to delta
    e = [abs(lasyl_ratio(ELL, s, d) - 1) for d in (1e-2, 5e-3)]
    assert e[1] / e[0] == pytest.approx(0.5, abs=0.01)


def test_bisector_direction_circle():
    d = bisector_direction(circle(1.0), [1.2, 0.0])
    np.testing.assert_allclose(d, [0, 1], atol=1e-14)


def _L_at(curve, C):
    S = curve.surface
    uA, uB = tangency_params(curve, to_model(S, np.asarray(C)))
    return float(L_of_params(curve, uA, uB))


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(1.02, 1.2))
def test_bisector_is_level_direction_of_L(th, scale):
    C = scale * np.array([2 * math.cos(th), math.sin(th)])
    d = bisector_direction(ELL, C)
    h = 1e-5
    dL = (_L_at(ELL, C + h * d) - _L_at(ELL, C - h * d)) / (2 * h)
    assert abs(dL) < 1e-8
    mu = _confocal_mu(*C)
    grad = np.array([C[0] / (4 + mu), C[1] / (1 + mu)])
    assert abs(np.dot(grad / np.linalg.norm(grad), d)) < 1e-7
