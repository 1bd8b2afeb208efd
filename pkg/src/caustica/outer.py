"""Outer billiards, the area construction ``gamma_p`` and the area-Poritsky check.

A chord is described by its endpoints ``E1, E2`` on the curve, ``E2`` ahead of
``E1``; the cut-off region ``Omega_-`` is bounded by the arc from ``E1`` to
``E2`` and the chord.  On curved models its area comes from Gauss-Bonnet, in
the plane from Green's theorem.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import make_interp_spline
from scipy.optimize import brentq

from .curves import ConvexCurve, grid_roots
from .errors import DomainError, RangeError, UnsupportedKindError
from .strings import PoritskyReport, _direction_to, tangency_params
from .surface import (
    UnitTangent,
    from_model,
    model_distance,
    model_flow,
    model_inner,
    model_normal,
    normalize_model,
    push_tangent,
    to_model,
)

_X, _W = leggauss(24)


def _gl(f, a, b, panels: int = 8):
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = (lo + hi) / 2 + (hi - lo) / 2 * _X
    return float(np.sum(f(nodes) * _W * (hi - lo) / 2))


def _turn(S, X, a, b) -> float:
    """Oriented angle from unit tangent ``a`` to unit tangent ``b`` at ``X``."""
    return math.atan2(float(model_inner(S, b, model_normal(S, X, a))), float(model_inner(S, b, a)))


def _require_model(curve: ConvexCurve):
    if curve.lift == "native":
        raise UnsupportedKindError("outer billiards need a constant-curvature model")


def cap_area(curve: ConvexCurve, u1: float, u2: float) -> float:
    """Area bounded by the arc ``u1 -> u2`` (forward along the curve) and the chord back."""
    _require_model(curve)
    S = curve.surface
    if S.kind == "euclidean":
        def green(u):
            c0, c1 = curve.chart(u, 0), curve.chart(u, 1)
            return c0[..., 0] * c1[..., 1] - c0[..., 1] * c1[..., 0]

        P1, P2 = curve.chart(np.array(u1), 0), curve.chart(np.array(u2), 0)
        chord = P2[0] * P1[1] - P2[1] * P1[0]
        return 0.5 * (_gl(green, u1, u2) + chord)
    total_k = _gl(lambda u: curve.kappa_u(u) * curve.speed(u), u1, u2)
    X1, X2 = curve.model_point(np.array(u1)), curve.model_point(np.array(u2))
    T1, T2 = curve.model_tangent(np.array(u1)), curve.model_tangent(np.array(u2))
    d21 = _direction_to(S, X2, X1)
    arrive1 = -_direction_to(S, X1, X2)
    turning = _turn(S, X2, T2, d21) + _turn(S, X1, arrive1, T1)
    return (2 * math.pi - total_k - turning) / S.curvature


def _chord_roots(curve: ConvexCurve, X, V):
    n = np.cross(X, V)
    return grid_roots(lambda u: curve.model(u)[0] @ n, *curve.domain, 4097, curve.periodic)


def _along(S, X, V, P) -> float:
    if S.kind == "euclidean":
        return float(model_inner(S, P - X, V))
    if S.kind == "sphere":
        return math.atan2(float(model_inner(S, P, V)), float(model_inner(S, P, X)))
    return math.asinh(float(model_inner(S, P, V)))


def area_cut(curve: ConvexCurve, g: UnitTangent) -> float:
    """Area of the part of the interior lying to the right of the oriented geodesic ``g``."""
    _require_model(curve)
    S = curve.surface
    X = normalize_model(S, to_model(S, g.point))
    V = push_tangent(S, g.point, g.vector)
    V = V / np.sqrt(model_inner(S, V, V))
    roots = _chord_roots(curve, X, V)
    if len(roots) < 2:
        raise DomainError("geodesic meets the curve in fewer than two points")
    roots = sorted(roots, key=lambda u: _along(S, X, V, curve.model_point(np.array(u))))
    u1, u2 = roots[0], roots[-1]
    if curve.periodic:
        period = curve.domain[1] - curve.domain[0]
        while u2 < u1:
            u2 += period
    elif u2 < u1:
        raise DomainError("cut region leaves the working arc")
    return cap_area(curve, u1, u2)


def enclosed_area(curve: ConvexCurve) -> float:
    if not curve.periodic:
        raise DomainError("curve is not closed")
    S = curve.surface
    lo, hi = curve.domain
    if S.kind == "euclidean":
        def green(u):
            P, V = curve.chart(u, 0), curve.chart(u, 1)
            return P[..., 0] * V[..., 1] - P[..., 1] * V[..., 0]

        return 0.5 * _gl(green, lo, hi, 32)
    return (2 * math.pi - _gl(lambda u: curve.kappa_u(u) * curve.speed(u), lo, hi, 32)) / S.curvature


def _solve_u2(curve: ConvexCurve, u1: float, p: float) -> float:
    lo_dom, hi_dom = curve.domain
    limit = u1 + 0.999 * (hi_dom - lo_dom) if curve.periodic else hi_dom
    k = float(curve.kappa_u(np.array(u1)))
    d0 = (12 * p / k) ** (1 / 3) / float(curve.speed(np.array(u1)))
    f = lambda d: cap_area(curve, u1, u1 + d) - p  # noqa: E731
    lo = d0 / 2
    while f(lo) > 0:
        lo /= 2
    hi = min(2 * d0, limit - u1)
    while f(hi) < 0:
        if u1 + hi >= limit:
            raise RangeError(f"no chord cuts area {p} inside the working arc")
        hi = min(2 * hi, limit - u1)
    return u1 + brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def area_map(curve: ConvexCurve, p: float, s: float) -> float:
    """``T_p`` on the curve: the far endpoint of the area-``p`` chord starting at ``s``."""
    return float(curve.s_of_u(_solve_u2(curve, float(curve.u_of_s(s)), p)))


@dataclass
class AreaCurve:
    """Sampled envelope ``gamma_p`` with its generating chords ``(u1, u2)``."""

    parent: ConvexCurve
    p: float
    u1: np.ndarray
    u2: np.ndarray
    points: np.ndarray

    def bisection_residual(self) -> float:
        """Max ``| |E1 X| - |X E2| |`` over samples."""
        c, S = self.parent, self.parent.surface
        E1, E2 = c.model_point(self.u1), c.model_point(self.u2)
        X = normalize_model(S, to_model(S, self.points))
        return float(np.max(np.abs(model_distance(S, E1, X) - model_distance(S, X, E2))))


def _chord_normal(curve, u1, u2):
    n = np.cross(curve.model_point(np.array(u1)), curve.model_point(np.array(u2)))
    return n / np.linalg.norm(n)


def area_construction(curve: ConvexCurve, p: float, n_samples: int = 256, h: float = 1e-3) -> AreaCurve:
    """Envelope of the chords cutting area ``p``, one chord per anchor ``E1``."""
    _require_model(curve)
    S = curve.surface
    lo, hi = curve.domain
    if curve.periodic:
        if not 0 < p < 0.5 * enclosed_area(curve):
            raise RangeError("p must lie between 0 and half the enclosed area")
        us = np.linspace(lo, hi, n_samples, endpoint=False)
    else:
        u_end = brentq(lambda u: cap_area(curve, u, hi) - p, lo, hi - 1e-9)
        us = np.linspace(lo + 2 * h, u_end - 2 * h, n_samples)
    u2s, pts = [], []
    for u in us:
        ns = [_chord_normal(curve, v, _solve_u2(curve, v, p)) for v in u + h * np.arange(-2, 3)]
        dn = (ns[0] - 8 * ns[1] + 8 * ns[3] - ns[4]) / (12 * h)
        X = normalize_model(S, np.cross(ns[2], dn), near=curve.model_point(np.array(u)))
        u2s.append(_solve_u2(curve, u, p))
        pts.append(X)
    pts = np.array(pts)
    native = from_model(S, pts)
    if S.kind == "euclidean" and len(native) > 4:
        d = np.diff(native, axis=0)
        turn = np.sign(d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0])
        if np.any(turn != turn[0]):
            warnings.warn("area-construction envelope has a cusp", RuntimeWarning, stacklevel=2)
    return AreaCurve(curve, p, us, np.array(u2s), native)


def centroid(curve: ConvexCurve) -> np.ndarray:
    """Area centroid of a closed Euclidean curve (Green's theorem)."""
    if curve.surface.kind != "euclidean" or not curve.periodic:
        raise UnsupportedKindError("centroid needs a closed Euclidean curve")
    lo, hi = curve.domain

    def moments(u):
        P, V = curve.chart(u, 0), curve.chart(u, 1)
        return np.stack([P[..., 0] * V[..., 1] - P[..., 1] * V[..., 0],
                         P[..., 0] ** 2 * V[..., 1], -P[..., 1] ** 2 * V[..., 0]])

    a, mx, my = (_gl(lambda u, i=i: moments(u)[i], lo, hi, 16) for i in range(3))
    return np.array([mx, my]) / a


def homothety_fit(ac: AreaCurve, center=None) -> tuple[float, float]:
    """Fit ``gamma_p`` by ``center + lam (gamma - center)``; returns ``(lam, max |lam_i - lam|)``.

    ``lam_i`` is the ratio of distances from ``center`` to the envelope point and
    to the parent point on the same ray.
    """
    curve = ac.parent
    c = centroid(curve) if center is None else np.asarray(center, dtype=float)
    lo, hi = curve.domain
    lams = []
    for X in ac.points:
        d = X - c

        def f(u):
            Q = curve.chart(u, 0) - c
            return Q[..., 0] * d[1] - Q[..., 1] * d[0]

        roots = [u for u in grid_roots(f, lo, hi, periodic=True)
                 if np.dot(curve.chart(np.array(u), 0) - c, d) > 0]
        if len(roots) != 1:
            raise DomainError("center does not see the curve as star-shaped")
        lams.append(np.linalg.norm(d) / np.linalg.norm(curve.chart(np.array(roots[0]), 0) - c))
    lams = np.array(lams)
    lam = float(np.mean(lams))
    return lam, float(np.max(np.abs(lams - lam)))


def outer_map(curve: ConvexCurve, A) -> np.ndarray:
    """Reflect ``A`` through the tangency point of its right tangent geodesic."""
    _require_model(curve)
    S = curve.surface
    X = normalize_model(S, to_model(S, np.asarray(A, dtype=float)))
    _, uB = tangency_params(curve, X)
    B = curve.model_point(np.array(uB))
    d = float(model_distance(S, X, B))
    V = -_direction_to(S, B, X)
    Y, _ = model_flow(S, B, V, d)
    return from_model(S, normalize_model(S, Y))


def outer_map_area(curve: ConvexCurve, p: float, A) -> np.ndarray:
    """Outer billiard map about ``gamma_p`` for a point ``A`` inside the curve, near it."""
    _require_model(curve)
    S = curve.surface
    X = normalize_model(S, to_model(S, np.asarray(A, dtype=float)))

    def side(u1):
        u2 = _solve_u2(curve, u1, p)
        return float(np.linalg.det(np.stack([curve.model_point(np.array(u1)),
                                             curve.model_point(np.array(u2)), X])))

    # chords through A; the right tangent has A before the chord midpoint
    lo, hi = curve.domain
    grid = np.linspace(lo, hi, 257 if curve.periodic else 65)
    vals = np.array([side(u) for u in grid])
    roots = list(grid[vals == 0])
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(brentq(side, grid[i], grid[i + 1], xtol=1e-15))
    candidates = []
    for u1 in roots:
        u2 = _solve_u2(curve, u1, p)
        E1, E2 = curve.model_point(np.array(u1)), curve.model_point(np.array(u2))
        M = normalize_model(S, E1 + E2 if S.kind != "euclidean" else (E1 + E2) / 2)
        candidates.append((u1, E1, E2, M))

    for u1, E1, E2, M in candidates:
        V = _direction_to(S, E1, E2)
        if _along(S, E1, V, X) < _along(S, E1, V, M):
            d = float(model_distance(S, X, M))
            Y, _ = model_flow(S, M, -_direction_to(S, M, X), d)
            return from_model(S, normalize_model(S, Y))
    raise DomainError("no tangent chord of gamma_p through A")


def chord_angle_ratio(curve: ConvexCurve, s_A: float, s_B: float) -> float:
    """``sin(alpha) / sin(beta)`` for the chord ``AB`` and the curve angles at ``A`` and ``B``."""
    _require_model(curve)
    S = curve.surface
    uA, uB = curve.u_of_s(np.array([s_A, s_B]))
    PA, PB = curve.model_point(uA), curve.model_point(uB)
    NA = model_normal(S, PA, curve.model_tangent(uA))
    NB = model_normal(S, PB, curve.model_tangent(uB))
    sa = abs(float(model_inner(S, _direction_to(S, PA, PB), NA)))
    sb = abs(float(model_inner(S, _direction_to(S, PB, PA), NB)))
    return sa / sb


# --- area-Poritsky check ---------------------------------------------------------------


def area_orbit(curve: ConvexCurve, p: float, s0: float, s_stop: float) -> np.ndarray:
    """``s0, T_p(s0), ...`` until the orbit passes ``s_stop``."""
    u = [float(curve.u_of_s(s0))]
    u_stop = float(curve.u_of_s(s_stop))
    while u[-1] < u_stop:
        try:
            u.append(_solve_u2(curve, u[-1], p))
        except RangeError:
            if curve.periodic:
                raise
            break
    return curve.s_of_u(np.array(u))


def empirical_area_parameter(curve: ConvexCurve, p_ref: float, s0: float, s_stop: float):
    """Spline ``s -> t`` with unit increments along a ``T_{p_ref}``-orbit, rescaled to length units."""
    s = area_orbit(curve, p_ref, s0, s_stop)
    m = np.arange(len(s), dtype=float)
    m *= (s[-1] - s[0]) / m[-1]
    return make_interp_spline(s, m, k=5)


def area_poritsky_check(curve: ConvexCurve, p_list, n_samples: int = 50, p_ref: float | None = None,
                        tol: float = 1e-5) -> PoritskyReport:
    """Test the area-Poritsky property with a parameter bootstrapped from the orbit of ``T_{p_ref}``."""
    _require_model(curve)
    p_list = [float(p) for p in p_list]
    p_ref = min(p_list) / 8 if p_ref is None else p_ref
    if curve.periodic:
        lo, hi = 0.0, curve.length
        k = float(np.min(curve.kappa_u(np.linspace(*curve.domain, 129))))
        reach = 2 * (12 * max(p_list) / k) ** (1 / 3)
        t = empirical_area_parameter(curve, p_ref, lo, hi + reach)
    else:
        s_lo, s_hi = curve.s_range
        t = empirical_area_parameter(curve, p_ref, s_lo, s_hi - 1e-6)
        u_last = brentq(lambda u: cap_area(curve, u, curve.domain[1]) - max(p_list), curve.domain[0],
                        curve.domain[1] - 1e-9)
        lo, hi = s_lo, min(float(curve.s_of_u(u_last)), float(t.t[-1]))
        hi -= 1e-6
    cs, devs = [], []
    sA = np.linspace(lo, hi, n_samples, endpoint=not curve.periodic)
    for p in p_list:
        sB = np.array([area_map(curve, p, s) for s in sA])
        ok = sB <= t.t[-1]
        inc = t(sB[ok]) - t(sA[ok])
        cs.append(float(np.mean(inc)))
        devs.append(float(np.max(np.abs(inc - inc.mean()))))
    return PoritskyReport(p_list, cs, devs, tol, bool(max(devs) < tol))
