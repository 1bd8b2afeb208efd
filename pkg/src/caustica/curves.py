"""Convex curves on surfaces, the string length ``L(A, B)`` and the defect ``Lambda(t)``.

A :class:`ConvexCurve` is a parametrization ``u -> chart point`` with analytic
derivatives.  On constant-curvature surfaces the chart point is lifted to the
projective model, either through a projective chart (``lift="projective"``:
affine plane, gnomonic chart, Beltrami-Klein chart) or through the normal chart
at the model's base point (``lift="normal"``).  All lengths, curvatures and
tangent-line intersections are then closed-form in the model.

Public operations take natural length ``s`` measured from the curve's base
point ``s = 0``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    ConstructionError,
    ConvergenceError,
    ConvexityError,
    DomainError,
    IllConditionedError,
)
from .surface import (
    Surface,
    UnitTangent,
    flow_points,
    from_model,
    make_surface,
    metric_tensor,
    model_distance,
    model_inner,
    normal_chart,
    normalize_model,
    pull_tangent,
    to_model,
)

_GL_X, _GL_W = leggauss(20)


class CumulativeIntegral:
    """``u -> int_{u_ref}^u f`` backed by a composite Gauss-Legendre table."""

    def __init__(self, f: Callable, lo: float, hi: float, u_ref: float, n_panels: int = 64,
                 periodic: bool = False):
        self.f = f
        self.lo, self.hi = float(lo), float(hi)
        self.periodic = periodic
        self.edges = np.linspace(self.lo, self.hi, n_panels + 1)
        a, b = self.edges[:-1], self.edges[1:]
        half = (b - a) / 2
        nodes = (a + b)[:, None] / 2 + half[:, None] * _GL_X
        vals = f(nodes)
        if not np.all(np.isfinite(vals)):
            raise ConvexityError("integrand is not finite on the curve domain")
        panel = np.sum(vals * _GL_W, axis=1) * half
        self.cum = np.concatenate([[0.0], np.cumsum(panel)])
        self.total = float(self.cum[-1])
        self.offset = 0.0
        self.offset = float(self._raw(np.array(u_ref)))

    def _raw(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        shift = np.zeros_like(u)
        if self.periodic:
            period = self.hi - self.lo
            k = np.floor((u - self.lo) / period)
            u = u - k * period
            shift = k * self.total
        idx = np.clip(np.searchsorted(self.edges, u, side="right") - 1, 0, len(self.edges) - 2)
        a = self.edges[idx]
        half = (u - a) / 2
        nodes = (u + a)[..., None] / 2 + half[..., None] * _GL_X
        part = np.sum(self.f(nodes) * _GL_W, axis=-1) * half
        return self.cum[idx] + part + shift

    def __call__(self, u) -> np.ndarray:
        return self._raw(u) - self.offset

    def inverse(self, value, tol: float = 1e-15) -> np.ndarray:
        """Parameter ``u`` with ``self(u) = value`` (Newton from table interpolation)."""
        value = np.asarray(value, dtype=float)
        target = value + self.offset
        if self.periodic:
            k = np.floor(target / self.total)
            base = target - k * self.total
            u = np.interp(base, self.cum, self.edges) + k * (self.hi - self.lo)
        else:
            u = np.interp(target, self.cum, self.edges)
            lo_ext = self.lo - (self.cum[0] - target) / self.f(np.array(self.lo))
            hi_ext = self.hi + (target - self.cum[-1]) / self.f(np.array(self.hi))
            u = np.where(target < self.cum[0], lo_ext, np.where(target > self.cum[-1], hi_ext, u))
        for _ in range(30):
            err = self._raw(u) - target
            u = u - err / self.f(u)
            if np.all(np.abs(err) <= tol * np.maximum(1.0, np.abs(target))):
                break
        return u


# --- exponential-chart lift for curved models -----------------------------------

_NTERMS = 28


def _series(K: float, even: bool):
    """Power-series coefficients in rho of cos/cosh (even) or sin(r)/r, sinh(r)/r."""
    return np.array([(-K) ** k / math.factorial(2 * k + (0 if even else 1)) for k in range(_NTERMS)])


def _eval_series(coef, rho, order):
    out = []
    c = coef.copy()
    for _ in range(order + 1):
        out.append(np.polynomial.polynomial.polyval(rho, c))
        c = np.polynomial.polynomial.polyder(c) if len(c) > 1 else np.zeros(1)
    return out


def _normal_lift(K: float, c0, c1, c2):
    """Model point ``F(c)`` and two derivatives along a chart curve for the normal chart."""
    x, y = c0[..., 0], c0[..., 1]
    x1, y1 = c1[..., 0], c1[..., 1]
    x2, y2 = c2[..., 0], c2[..., 1]
    rho = x * x + y * y
    r1 = 2 * (x * x1 + y * y1)
    r2 = 2 * (x1 * x1 + y1 * y1 + x * x2 + y * y2)
    S0, S1, S2 = _eval_series(_series(K, False), rho, 2)
    C0, C1, C2 = _eval_series(_series(K, True), rho, 2)
    s_1 = S1 * r1
    s_2 = S2 * r1 * r1 + S1 * r2
    Q = np.stack([S0 * x, S0 * y, C0], axis=-1)
    Q1 = np.stack([s_1 * x + S0 * x1, s_1 * y + S0 * y1, C1 * r1], axis=-1)
    Q2 = np.stack(
        [s_2 * x + 2 * s_1 * x1 + S0 * x2, s_2 * y + 2 * s_1 * y1 + S0 * y2, C2 * r1 * r1 + C1 * r2],
        axis=-1,
    )
    return Q, Q1, Q2


class ConvexCurve:
    """A parametrized curve with positive geodesic curvature.

    Parameters
    ----------
    surface : Surface
    chart_fn : callable
        ``chart_fn(u, k)`` returns the ``k``-th parameter derivative of the chart
        point, broadcasting over ``u``; ``k`` up to 2 is required.
    domain : (float, float)
        Parameter interval (one period for closed curves).
    base : float, optional
        Parameter of the point with ``s = 0`` (defaults to the domain midpoint).
    lift : {"projective", "normal", "native"}
        How chart points map to the surface; ``native`` for general-chart surfaces.
    frame : (3, 3) array, optional
        Model isometry applied after the lift.
    orientation : +1 or -1
        ``-1`` reverses the parametrization.
    """

    def __init__(self, surface: Surface, chart_fn: Callable, domain, *, base: float | None = None,
                 lift: str = "projective", frame=None, periodic: bool = False, orientation: int = 1,
                 n_panels: int = 64, name: str = "curve", check_convexity: bool = True):
        self.surface = make_surface(surface)
        lo, hi = map(float, domain)
        if orientation not in (1, -1):
            raise ConstructionError("orientation must be +1 or -1")
        if orientation == -1:
            fn = chart_fn
            chart_fn = lambda u, k=0: (-1) ** k * fn(-np.asarray(u), k)  # noqa: E731
            lo, hi = -hi, -lo
            base = None if base is None else -base
        self.chart_fn = chart_fn
        self.domain = (lo, hi)
        self.periodic = periodic
        self.lift = "native" if self.surface.kind == "general-chart" else lift
        self.frame = np.eye(3) if frame is None else np.asarray(frame, dtype=float)
        self.name = name
        self.base = 0.5 * (lo + hi) if base is None else float(base)
        if check_convexity:
            grid = np.linspace(lo, hi, 257)
            k = self.kappa_u(grid)
            if not np.all(k > 0):
                raise ConvexityError(f"{name}: geodesic curvature is not positive on the domain")
        self._s = CumulativeIntegral(self.speed, lo, hi, self.base, n_panels, periodic)
        self._kappa0 = float(self.kappa_u(np.array(self.base)))
        self._t = CumulativeIntegral(
            lambda u: np.cbrt(self.kappa_u(u)) ** 2 * self.speed(u), lo, hi, self.base, n_panels, periodic
        )

    def __repr__(self):
        return f"ConvexCurve({self.name!r}, {self.surface.kind}, domain={self.domain})"

    # -- geometry in the parameter u ------------------------------------------------

    def chart(self, u, k: int = 0) -> np.ndarray:
        return np.asarray(self.chart_fn(np.asarray(u, dtype=float), k), dtype=float)

    def model(self, u):
        """Homogeneous lift ``Q(u)`` with first and second derivatives."""
        c0, c1, c2 = (self.chart(u, k) for k in range(3))
        kind = self.surface.kind
        if self.lift == "normal" and kind != "euclidean":
            Q, Q1, Q2 = _normal_lift(self.surface.curvature, c0, c1, c2)
        else:
            one = np.ones(c0.shape[:-1] + (1,))
            Q = np.concatenate([c0, one], axis=-1)
            Q1 = np.concatenate([c1, 0 * one], axis=-1)
            Q2 = np.concatenate([c2, 0 * one], axis=-1)
        if kind != "euclidean":
            Q, Q1, Q2 = Q @ self.frame.T, Q1 @ self.frame.T, Q2 @ self.frame.T
        return Q, Q1, Q2

    def _norm2(self, Q):
        S = self.surface
        if S.kind == "euclidean":
            return Q[..., 2] ** 2
        return S.curvature * model_inner(S, Q, Q)

    def speed(self, u) -> np.ndarray:
        """``ds/du``."""
        S = self.surface
        if self.lift == "native":
            c0, c1 = self.chart(u, 0), self.chart(u, 1)
            return np.sqrt(np.einsum("...i,...ij,...j->...", c1, metric_tensor(S, c0), c1))
        Q, Q1, _ = self.model(u)
        if S.kind == "euclidean":
            return np.hypot(Q1[..., 0], Q1[..., 1])
        N = self._norm2(Q)
        eps = S.curvature
        v2 = model_inner(S, Q1, Q1) / N - eps * model_inner(S, Q, Q1) ** 2 / N**2
        return np.sqrt(v2)

    def kappa_u(self, u) -> np.ndarray:
        """Signed geodesic curvature at parameter ``u`` (positive = turning left)."""
        S = self.surface
        if self.lift == "native":
            c0, c1, c2 = (self.chart(u, k) for k in range(3))
            g = metric_tensor(S, c0)
            acc = c2 + np.einsum("...ijk,...j,...k->...i", S.christoffel(c0), c1, c1)
            sp = np.sqrt(np.einsum("...i,...ij,...j->...", c1, g, c1))
            cross = c1[..., 0] * acc[..., 1] - c1[..., 1] * acc[..., 0]
            return np.sqrt(np.linalg.det(g)) * cross / sp**3
        Q, Q1, Q2 = self.model(u)
        det = np.linalg.det(np.stack([Q, Q1, Q2], axis=-2))
        N = self._norm2(Q)
        return det / N**1.5 / self.speed(u) ** 3

    def model_point(self, u) -> np.ndarray:
        Q, _, _ = self.model(u)
        return normalize_model(self.surface, Q)

    def model_tangent(self, u) -> np.ndarray:
        """Unit model tangent vector at the normalized point."""
        S = self.surface
        Q, Q1, _ = self.model(u)
        if S.kind == "euclidean":
            T = Q1.copy()
            T[..., 2] = 0.0
            return T / np.hypot(T[..., 0], T[..., 1])[..., None]
        N = self._norm2(Q)
        P1 = Q1 - (model_inner(S, Q, Q1) / model_inner(S, Q, Q))[..., None] * Q
        P1 = P1 / np.sqrt(N)[..., None]
        return P1 / np.sqrt(model_inner(S, P1, P1))[..., None]

    def point_u(self, u) -> np.ndarray:
        if self.lift == "native":
            return self.chart(u, 0)
        return from_model(self.surface, self.model(u)[0])

    def tangent_u(self, u) -> np.ndarray:
        """Native unit tangent vector."""
        if self.lift == "native":
            c0, c1 = self.chart(u, 0), self.chart(u, 1)
            return c1 / self.speed(u)[..., None]
        return pull_tangent(self.surface, self.model_point(u), self.model_tangent(u))

    def tangent_plane(self, u) -> np.ndarray:
        """Normal of the model plane carrying the tangent geodesic at ``u``."""
        Q, Q1, _ = self.model(u)
        return np.cross(Q, Q1)

    # -- natural length ----------------------------------------------------------------

    def s_of_u(self, u) -> np.ndarray:
        return self._s(u)

    def u_of_s(self, s) -> np.ndarray:
        return self._s.inverse(s)

    def t_of_u(self, u, normalized: bool = True) -> np.ndarray:
        t = self._t(u)
        return np.cbrt(self._kappa0) * t if normalized else t

    def u_of_t(self, t, normalized: bool = True) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self._t.inverse(t / np.cbrt(self._kappa0) if normalized else t)

    @property
    def length(self) -> float:
        """Length of one period (closed curves) or of the whole domain."""
        return self._s.total

    @property
    def s_range(self) -> tuple[float, float]:
        lo, hi = self.domain
        return float(self._s(np.array(lo))), float(self._s(np.array(hi)))

    def kappa(self, s) -> np.ndarray:
        return self.kappa_u(self.u_of_s(s))

    def point(self, s) -> np.ndarray:
        return self.point_u(self.u_of_s(s))


def grid_roots(f, lo: float, hi: float, n: int = 2049, periodic: bool = False) -> list[float]:
    """All roots of the scalar function ``f`` on ``[lo, hi]`` resolved by an ``n``-point grid.

    With ``periodic`` the grid is shifted by half a step and wraps once, so roots
    on the seam are found exactly once.
    """
    from scipy.optimize import brentq

    if periodic:
        step = (hi - lo) / (n - 1)
        grid = lo + step * (np.arange(n) + 0.5)
    else:
        grid = np.linspace(lo, hi, n)
    vals = f(grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    roots = [brentq(lambda v: float(f(np.array(v))), grid[i], grid[i + 1], xtol=1e-16) for i in idx]
    roots = roots + [float(g) for g in grid[vals == 0]]
    if periodic:
        roots = [r - (hi - lo) if r > hi else r for r in roots]
    return sorted(roots)


# --- operations ----------------------------------------------------------------------


def arc_length(curve: ConvexCurve, a: float, b: float) -> float:
    """Signed length of the arc between parameters ``a`` and ``b``."""
    return float(curve.s_of_u(b) - curve.s_of_u(a))


def geodesic_curvature(curve: ConvexCurve, s: float) -> float:
    """Geodesic curvature at natural parameter ``s``; raises if not positive."""
    k = float(curve.kappa(s))
    if not k > 0:
        raise ConvexityError(f"geodesic curvature {k} is not positive at s={s}")
    return k


def geodesic_curvature_normal_chart(curve: ConvexCurve, s: float, h: float = 1e-3) -> float:
    """Euclidean curvature of the curve drawn in normal coordinates at ``curve.point(s)``.

    Independent of :func:`geodesic_curvature`: only uses curve points, the
    normal chart and five-point finite differences.
    """
    S = curve.surface
    u0 = float(curve.u_of_s(s))
    chart = normal_chart(S, curve.point_u(u0), curve.tangent_u(u0))
    us = curve.u_of_s(s + h * np.arange(-2, 3))
    xy = chart.to_chart(curve.point_u(us))
    d1 = (xy[0] - 8 * xy[1] + 8 * xy[3] - xy[4]) / (12 * h)
    d2 = (-xy[0] + 16 * xy[1] - 30 * xy[2] + 16 * xy[3] - xy[4]) / (12 * h * h)
    return float((d1[0] * d2[1] - d1[1] * d2[0]) / np.hypot(*d1) ** 3)


def lazutkin_parameter(curve: ConvexCurve, s: float, normalized: bool = False) -> float:
    """``int_{s0}^{s} kappa^(2/3)``; the normalized variant multiplies by ``kappa(s0)^(1/3)``."""
    return float(curve.t_of_u(curve.u_of_s(s), normalized=normalized))


def tangent_geodesic(curve: ConvexCurve, s: float) -> UnitTangent:
    """Oriented geodesic tangent to the curve at ``s``."""
    u = curve.u_of_s(s)
    return UnitTangent(curve.point_u(u), curve.tangent_u(u))


def _model_intersection(curve: ConvexCurve, uA, uB):
    """Normalized model point of the intersection of the tangent geodesics at ``uA``, ``uB``."""
    S = curve.surface
    PA = curve.model_point(uA)
    X = np.cross(curve.tangent_plane(uA), curve.tangent_plane(uB))
    return PA, normalize_model(S, X, near=PA)


def _model_L(curve: ConvexCurve, uA, uB) -> np.ndarray:
    S = curve.surface
    PA, C = _model_intersection(curve, uA, uB)
    PB = curve.model_point(uB)
    sA, sB = curve.s_of_u(uA), curve.s_of_u(uB)
    lam = np.abs(sB - sA)
    if curve.periodic:
        # the arc cut off by the two tangents is the one whose midpoint is nearer C
        P = curve.length
        lam = np.mod(lam, P)
        mid = curve.model_point(curve.u_of_s(np.minimum(sA, sB) + lam / 2))
        far = curve.model_point(curve.u_of_s(np.minimum(sA, sB) + lam / 2 + P / 2))
        lam = np.where(model_distance(S, mid, C) <= model_distance(S, far, C), lam, P - lam)
    return model_distance(S, PA, C) + model_distance(S, PB, C) - lam


def _general_intersection(curve: ConvexCurve, uA: float, uB: float, tol: float = 1e-13):
    """Flow times ``(tA, tB)`` and point where the tangent geodesics at ``uA``, ``uB`` meet."""
    S = curve.surface
    pA, pB = curve.point_u(uA), curve.point_u(uB)
    vA, vB = curve.tangent_u(uA), curve.tangent_u(uB)
    M = np.stack([vA, -vB], axis=1)
    tau = np.linalg.solve(M, pB - pA)
    for _ in range(50):
        (qA, qB), (wA, wB) = flow_points(S, np.stack([pA, pB]), np.stack([vA, vB]), tau)
        F = qA - qB
        if np.linalg.norm(F) < tol:
            return tau, qA
        tau = tau - np.linalg.solve(np.stack([wA, -wB], axis=1), F)
    raise ConvergenceError("tangent-geodesic intersection did not converge")


def _check_separation(sA: float, sB: float) -> None:
    if abs(sA - sB) < 1e-8:
        raise IllConditionedError("tangency points closer than 1e-8")


def tangent_intersection(curve: ConvexCurve, s_A: float, s_B: float) -> np.ndarray:
    """Point ``C_AB`` where the tangent geodesics at ``s_A`` and ``s_B`` meet."""
    _check_separation(s_A, s_B)
    uA, uB = curve.u_of_s(np.array([s_A, s_B]))
    if curve.lift == "native":
        return _general_intersection(curve, uA, uB)[1]
    _, C = _model_intersection(curve, uA, uB)
    return from_model(curve.surface, C)


def string_length_L(curve: ConvexCurve, s_A: float, s_B: float) -> float:
    """``L(A, B) = |AC| + |BC| - lambda(A, B)`` with ``C`` the tangent-line intersection."""
    _check_separation(s_A, s_B)
    uA, uB = curve.u_of_s(np.array([s_A, s_B]))
    if curve.lift == "native":
        (tA, tB), _ = _general_intersection(curve, uA, uB)
        return float(abs(tA) + abs(tB) - abs(s_B - s_A))
    return float(_model_L(curve, uA, uB))


def L_of_params(curve: ConvexCurve, uA, uB) -> np.ndarray:
    """Vectorized ``L`` in curve parameters (constant-curvature surfaces)."""
    if curve.lift == "native":
        return np.vectorize(
            lambda a, b: string_length_L(curve, float(curve.s_of_u(a)), float(curve.s_of_u(b)))
        )(uA, uB)
    return _model_L(curve, np.asarray(uA, float), np.asarray(uB, float))


def lambda_defect(curve: ConvexCurve, t) -> np.ndarray | float:
    """``Lambda(t) = L(0, t) - L(-t, 0)`` in the normalized Lazutkin parameter."""
    t = np.asarray(t, dtype=float)
    u_p = curve.u_of_t(t)
    u_m = curve.u_of_t(-t)
    u0 = np.full_like(u_p, curve.base)
    out = L_of_params(curve, u0, u_p) - L_of_params(curve, u_m, u0)
    return float(out) if out.ndim == 0 else out


# --- constructors ---------------------------------------------------------------------


def ellipse(a: float, b: float, surface="euclidean", center=(0.0, 0.0), **kw) -> ConvexCurve:
    """Ellipse ``(a cos u, b sin u)`` in a projective chart, base point at ``u = 0``."""
    if a <= 0 or b <= 0:
        raise ConstructionError("semi-axes must be positive")
    cx, cy = center

    def fn(u, k=0):
        ph = u + k * np.pi / 2
        out = np.stack([a * np.cos(ph), b * np.sin(ph)], axis=-1)
        if k == 0:
            out = out + np.array([cx, cy])
        return out

    kw.setdefault("name", f"ellipse(a={a},b={b})")
    return ConvexCurve(surface, fn, (-np.pi, np.pi), base=0.0, periodic=True, **kw)


def circle(r: float = 1.0, surface="euclidean", **kw) -> ConvexCurve:
    kw.setdefault("name", f"circle(r={r})")
    return ellipse(r, r, surface, **kw)


def geodesic_circle(S, r: float) -> ConvexCurve:
    """Metric circle of radius ``r`` about the model base point (exponential chart)."""
    S = make_surface(S)

    def fn(u, k=0):
        ph = u + k * np.pi / 2
        return r * np.stack([np.cos(ph), np.sin(ph)], axis=-1)

    return ConvexCurve(S, fn, (-np.pi, np.pi), base=0.0, periodic=True, lift="normal",
                       name=f"geodesic_circle(r={r})")


def graph(coeffs, surface="euclidean", half_width: float = 0.5, **kw) -> ConvexCurve:
    """Graph ``y = sum_k b_k x^k / k!`` (``coeffs = [b1, b2, ...]``) in a normal chart."""
    c = np.zeros(len(coeffs) + 1)
    for k, bk in enumerate(coeffs, start=1):
        c[k] = bk / math.factorial(k)
    polys = [c]
    for _ in range(2):
        polys.append(np.polynomial.polynomial.polyder(polys[-1]) if len(polys[-1]) > 1 else np.zeros(1))

    def fn(u, k=0):
        u = np.asarray(u, dtype=float)
        x = u if k == 0 else (np.ones_like(u) if k == 1 else np.zeros_like(u))
        return np.stack([x, np.polynomial.polynomial.polyval(u, polys[k])], axis=-1)

    kw.setdefault("name", f"graph{list(coeffs)}")
    kw.setdefault("lift", "normal")
    return ConvexCurve(surface, fn, (-half_width, half_width), base=0.0, **kw)


def polar_curve(r_fn: Callable, domain, surface="euclidean", **kw) -> ConvexCurve:
    """Curve ``r(theta) (cos theta, sin theta)``; ``r_fn(theta, k)`` gives ``r^(k)``."""

    def fn(u, k=0):
        r0, r1, r2 = (r_fn(u, j) for j in range(3))
        c, s = np.cos(u), np.sin(u)
        if k == 0:
            return np.stack([r0 * c, r0 * s], axis=-1)
        if k == 1:
            return np.stack([r1 * c - r0 * s, r1 * s + r0 * c], axis=-1)
        return np.stack([r2 * c - 2 * r1 * s - r0 * c, r2 * s + 2 * r1 * c - r0 * s], axis=-1)

    return ConvexCurve(surface, fn, domain, **kw)


def quartic_oval(half_width: float = 0.6, surface="euclidean", **kw) -> ConvexCurve:
    """Arc of ``x^4 + y^4 = 1`` centered at the diagonal (non-conic control curve)."""

    def r_fn(th, k):
        g = (3 + np.cos(4 * th)) / 4
        g1 = -np.sin(4 * th)
        g2 = -4 * np.cos(4 * th)
        if k == 0:
            return g**-0.25
        if k == 1:
            return -0.25 * g**-1.25 * g1
        return 5 / 16 * g**-2.25 * g1**2 - 0.25 * g**-1.25 * g2

    kw.setdefault("name", "quartic_oval")
    c = np.pi / 4
    return polar_curve(r_fn, (c - half_width, c + half_width), surface, base=c, **kw)


@dataclass(frozen=True)
class ConicSpec:
    """Conic ``{<Cx, x> = 0}`` intersected with the standard model of ``kind``."""

    kind: str
    C: np.ndarray

    def __post_init__(self):
        C = np.array(self.C, dtype=float)
        if C.shape != (3, 3) or not np.allclose(C, C.T):
            raise ConstructionError("conic matrix must be symmetric 3x3")
        C.setflags(write=False)
        object.__setattr__(self, "C", C)


def _frame_to(X0) -> np.ndarray:
    """Rotation whose third column is the unit vector ``X0``."""
    z = X0 / np.linalg.norm(X0)
    seed = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    x = seed - np.dot(seed, z) * z
    x /= np.linalg.norm(x)
    return np.stack([x, np.cross(z, x), z], axis=1)


def make_conic(spec: ConicSpec, base, orientation: int = 1, half_width: float = 1.0) -> ConvexCurve:
    """Branch of a conic through ``base``, oriented to have positive geodesic curvature."""
    S = make_surface(spec.kind)
    X0 = normalize_model(S, to_model(S, np.asarray(base, float)))
    if S.kind == "sphere":
        # centre the gnomonic chart on the axis of the cone so the conic is an ellipse there
        lam, vec = np.linalg.eigh(spec.C)
        odd = 0 if np.sum(lam > 0) == 2 else 2
        if np.sum(lam > 0) not in (1, 2) or np.any(lam == 0):
            raise ConstructionError("spherical conic must be a non-degenerate cone")
        axis = vec[:, odd] * np.sign(vec[:, odd] @ X0 or 1.0)
        M = _frame_to(axis)
    else:
        M = np.eye(3)
    C = M.T @ spec.C @ M
    grad = spec.C @ X0
    if abs(X0 @ spec.C @ X0) > 1e-8 * max(1.0, np.abs(spec.C).max()):
        raise ConstructionError("base point is not on the conic")
    if np.linalg.norm(grad - (grad @ X0) / (X0 @ X0) * X0) < 1e-12:
        raise ConstructionError("conic is singular at the base point")
    A, bvec, c = C[:2, :2], C[:2, 2], C[2, 2]
    if abs(np.linalg.det(A)) < 1e-12 * max(1.0, np.abs(A).max()) ** 2:
        raise ConstructionError("conic is parabolic in the chart at the base point")
    m = -np.linalg.solve(A, bvec)
    k = bvec @ np.linalg.solve(A, bvec) - c
    lam, R = np.linalg.eigh(A)
    Y0 = M.T @ X0
    p0 = Y0[:2] / Y0[2] - m
    if np.all(lam * k > 0):
        ax = np.sqrt(k / lam)

        def fn(u, kk=0):
            ph = u + kk * np.pi / 2
            out = np.stack([ax[0] * np.cos(ph), ax[1] * np.sin(ph)], axis=-1) @ R.T
            return out + m if kk == 0 else out

        q = R.T @ p0
        u0 = math.atan2(q[1] / ax[1], q[0] / ax[0])
        domain, periodic = (u0 - np.pi, u0 + np.pi), True
    elif np.any(lam * k > 0):
        i = int(np.argmax(lam * k > 0))
        j = 1 - i
        ai, aj = math.sqrt(k / lam[i]), math.sqrt(-k / lam[j])
        q = R.T @ p0
        sign = 1.0 if q[i] > 0 else -1.0

        def fn(u, kk=0):
            ch = np.cosh(u) if kk % 2 == 0 else np.sinh(u)
            sh = np.sinh(u) if kk % 2 == 0 else np.cosh(u)
            loc = np.zeros(np.shape(u) + (2,))
            loc[..., i] = sign * ai * ch
            loc[..., j] = aj * sh
            out = loc @ R.T
            return out + m if kk == 0 else out

        u0 = math.asinh(q[j] / aj)
        domain, periodic = (u0 - half_width, u0 + half_width), False
    else:
        raise ConstructionError("conic has no real points in the chart")
    frame = M if S.kind == "sphere" else None
    curve = ConvexCurve(S, fn, domain, base=u0, frame=frame, periodic=periodic,
                        check_convexity=False, name=f"conic[{spec.kind}]")
    if curve.kappa_u(np.array(u0)) * orientation < 0:
        curve = ConvexCurve(S, fn, domain, base=u0, frame=frame, periodic=periodic,
                            orientation=-1, check_convexity=False, name=f"conic[{spec.kind}]")
    if not np.all(curve.kappa_u(np.linspace(*curve.domain, 129)) > 0):
        raise ConvexityError("conic branch is not convex on its domain")
    return curve


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_curve(text: str, surface=None) -> ConvexCurve:
    """Build a curve from the CLI mini-language.

    ``circle:r=1``, ``ellipse:a=2,b=1``, ``conic:k=sphere,c=[c11,...,c33],base=[...]``,
    ``graph:coeffs=[b1,b2,b3,b4,b5]``, ``quartic`` (optionally ``:w=0.6``);
    ``s=<kind>`` selects the surface for circle/ellipse/graph/quartic.
    """
    name, _, rest = text.partition(":")
    params: dict[str, object] = {}
    for m in re.finditer(r"(\w+)=(\[[^\]]*\]|[^,]+)", rest):
        key, val = m.group(1), m.group(2)
        if val.startswith("["):
            params[key] = [float(x) for x in re.findall(_NUM, val)]
        elif re.fullmatch(_NUM, val):
            params[key] = float(val)
        else:
            params[key] = val
    kind = params.pop("s", None) or params.pop("surface", None) or surface or "euclidean"
    try:
        if name == "circle":
            return circle(params.pop("r", 1.0), kind)
        if name == "ellipse":
            return ellipse(params.pop("a"), params.pop("b"), kind)
        if name == "graph":
            return graph(params.pop("coeffs"), kind, half_width=params.pop("w", 0.5))
        if name == "quartic":
            return quartic_oval(params.pop("w", 0.6), kind)
        if name == "conic":
            C = np.array(params.pop("c"), dtype=float).reshape(3, 3)
            k = params.pop("k", kind)
            base = params.pop("base", None)
            if base is None:
                raise ConstructionError("conic spec needs base=[...]")
            return make_conic(ConicSpec(k, C), np.array(base))
    except KeyError as exc:
        raise ConstructionError(f"curve spec {text!r} is missing {exc}") from None
    raise ConstructionError(f"unknown curve spec {text!r}")
