import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from caustica.curves import ConicSpec, circle, ellipse, geodesic_circle, make_conic, quartic_oval
from caustica.errors import ConstructionError, DomainError
from caustica.incidence import (
    GeodesicTriangle,
    ceva_product,
    cevian_feet,
    coboundary_ratio,
    concurrency_residual,
    tangent_incidence_check,
)
from caustica.surface import distance, make_surface, normalize_model

ELL = ellipse(2, 1)

# regression values measured on the quartic oval x^4 + y^4 = 1 (arc of half-width 0.6)
QUARTIC_TINC = 2.45e-3  # triple (-0.5, 0.1, 0.45)
QUARTIC_COBOUNDARY_GAP = 4.56e-3  # pair (0.0, 0.3)

TRIANGLES = {
    "euclidean": ([[0.0, 0.0], [1.0, 0.1], [0.3, 0.9]], [0.4, 0.3]),
    "sphere": ([[0.3, 0.0, 1.0], [-0.2, 0.3, 1.0], [0.0, -0.3, 1.0]], [0.02, 0.01, 1.0]),
    "hyperbolic": ([[0.4, 0.0], [-0.3, 0.4], [-0.1, -0.5]], [0.0, 0.05]),
}


def _setup(kind):
    S = make_surface(kind)
    verts, P = TRIANGLES[kind]
    if kind == "sphere":
        verts = [normalize_model(S, np.array(v)) for v in verts]
        P = normalize_model(S, np.array(P))
    return S, GeodesicTriangle(S, *map(np.asarray, verts)), np.asarray(P, dtype=float)


def test_euclidean_medians():
    S = make_surface("euclidean")
    A, B, C = np.array([0.0, 0.0]), np.array([2.0, 0.0]), np.array([0.5, 1.5])
    T = GeodesicTriangle(S, A, B, C)
    assert ceva_product(S, T, (B + C) / 2, (C + A) / 2, (A + B) / 2) == pytest.approx(1, abs=1e-15)


@pytest.mark.parametrize("kind", ["euclidean", "sphere", "hyperbolic"])
def test_concurrent_cevians_give_unit_product(kind):
    S, T, P = _setup(kind)
    assert ceva_product(S, T, *cevian_feet(S, T, P)) == pytest.approx(1, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.05, 0.9), st.floats(0.05, 0.9))
def test_sphere_ceva_random_interior_point(a, b, c):
    S, T, _ = _setup("sphere")
    P = sum(w * v for w, v in zip((a, b, c), T.model()))
    assert ceva_product(S, T, *cevian_feet(S, T, P)) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("kind", ["sphere", "hyperbolic"])
def test_perturbed_foot_breaks_product(kind):
    S, T, P = _setup(kind)
    A1, B1, C1 = cevian_feet(S, T, P)
    A, B, C = T.model()
    from caustica.incidence import _direction
    from caustica.surface import from_model, model_flow, to_model

    X = normalize_model(S, to_model(S, A1))
    X2, _ = model_flow(S, X, _direction(S, X, B), 1e-3)
    A1p = from_model(S, normalize_model(S, X2))
    assert abs(ceva_product(S, T, A1p, B1, C1) - 1) > 1e-4


@pytest.mark.parametrize("kind", ["euclidean", "sphere", "hyperbolic"])
def test_ceva_converse(kind):
    S, T, P = _setup(kind)
    A1, B1, C1 = cevian_feet(S, T, P)
    A, B, C = T.model()
    from caustica.incidence import _direction
    from caustica.surface import from_model, model_flow

    V = _direction(S, B, A)
    d_BA = distance(S, from_model(S, B), from_model(S, A))

    def foot(x):
        X, _ = model_flow(S, B, V, x)
        return from_model(S, normalize_model(S, X))

    x = brentq(lambda x: ceva_product(S, T, A1, B1, foot(x)) - 1, 1e-3 * d_BA, (1 - 1e-3) * d_BA, xtol=1e-15)
    assert distance(S, foot(x), C1) < 1e-7


def test_foot_off_line_rejected():
    S, T, P = _setup("euclidean")
    A1, B1, C1 = cevian_feet(S, T, P)
    with pytest.raises(DomainError):
        ceva_product(S, T, A1 + np.array([0.0, 1e-3]), B1, C1)


def test_degenerate_triangles_rejected():
    S = make_surface("euclidean")
    with pytest.raises(ConstructionError):
        GeodesicTriangle(S, [0, 0], [0, 0], [1, 1])
    with pytest.raises(ConstructionError):
        GeodesicTriangle(S, [0, 0], [1, 1], [2, 2])


def test_concurrency_residual():
    assert concurrency_residual([[1, 0, 0], [0, 1, 0], [1, 1, 0]]) < 1e-15
    assert concurrency_residual(np.eye(3)) == pytest.approx(1)


def _conic(kind):
    if kind == "euclidean":
        return ELL
    if kind == "sphere":
        th = 0.6
        return make_conic(ConicSpec("sphere", np.diag([1.0, 0.5, -math.tan(th) ** 2])),
                          [math.sin(th), 0.0, math.cos(th)])
    return make_conic(ConicSpec("hyperbolic", np.diag([1.0, 2.0, -math.tanh(1.0) ** 2])), [math.tanh(0.5), 0.0])


@pytest.mark.parametrize("kind", ["euclidean", "sphere", "hyperbolic"])
@pytest.mark.parametrize("triple", [(0.1, 0.9, 2.2), (0.3, 0.5, 0.8), (1.0, 2.5, 3.9)])
def test_conic_tangent_incidence(kind, triple):
    assert tangent_incidence_check(_conic(kind), *triple) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 9.6), st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_ellipse_tangent_incidence_random(a, d1, d2):
    assert tangent_incidence_check(ELL, a, a + d1, a + d1 + d2) < 1e-8


@pytest.mark.parametrize("curve", [circle(1.0), geodesic_circle("sphere", 0.5), geodesic_circle("hyperbolic", 0.5)],
                         ids=["plane", "sphere", "hyperbolic"])
def test_circle_symmetric_triple(curve):
    L = curve.length
    assert tangent_incidence_check(curve, 0.0, L / 3, 2 * L / 3) < 1e-12
    assert tangent_incidence_check(curve, 0.2, 0.5, 0.8) < 1e-12


def test_quartic_tangent_incidence_fails():
    q = quartic_oval()
    r = tangent_incidence_check(q, -0.5, 0.1, 0.45)
    assert r > 1e-4
    assert r == pytest.approx(QUARTIC_TINC, rel=0.05)


def test_tangent_incidence_input_errors():
    q = quartic_oval()
    with pytest.raises(DomainError):
        tangent_incidence_check(q, -0.5, 0.1, 5.0)
    with pytest.raises(DomainError):
        tangent_incidence_check(ELL, 0.1, 0.1, 2.0)


def test_coboundary_circle():
    assert coboundary_ratio(circle(1.0), 0.2, 1.1) == pytest.approx((1, 1), abs=1e-14)
    m, p = coboundary_ratio(geodesic_circle("sphere", 0.5), 0.2, 1.1)
    assert m == pytest.approx(1, abs=1e-13) and p == pytest.approx(1, abs=1e-13)


@pytest.mark.parametrize("pair", [(0.0, 0.5), (0.3, 1.0), (2.0, 3.5), (0.1, 4.0)])
def test_coboundary_ellipse(pair):
    m, p = coboundary_ratio(ELL, *pair)
    assert m == pytest.approx(p, abs=1e-6)


def test_coboundary_ellipse_vertex_pair():
    s_top = float(ELL.s_of_u(np.array(math.pi / 2)))
    m, p = coboundary_ratio(ELL, 0.0, s_top)
    # kappa is 2 at the end of the major axis and 1/4 at the end of the minor axis
    assert p == pytest.approx((0.25 / 2) ** (1 / 3), abs=1e-12)
    assert m == pytest.approx(p, abs=1e-6)


@pytest.mark.parametrize("kind", ["euclidean", "sphere", "hyperbolic"])
def test_coboundary_cocycle(kind):
    c = _conic(kind)
    a, b, d = 0.3, 1.0, 1.9
    m = lambda x, y: coboundary_ratio(c, x, y)[0]  # noqa: E731
    assert m(a, b) * m(b, d) * m(d, a) == pytest.approx(1, abs=1e-8)
    assert m(a, b) == pytest.approx(coboundary_ratio(c, a, b)[1], abs=1e-6)


def test_coboundary_quartic_fails():
    m, p = coboundary_ratio(quartic_oval(), 0.0, 0.3)
    assert abs(m - p) > 1e-4
    assert abs(m - p) == pytest.approx(QUARTIC_COBOUNDARY_GAP, rel=0.05)

