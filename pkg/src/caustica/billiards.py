"""Billiard maps in ``(s, y = 1 - cos phi)`` coordinates and modified Lazutkin coordinates.

The billiard map is realized by geometric reflection: the chord leaving the
boundary at ``s`` with angle ``phi`` to the tangent is intersected with the
boundary again, and the new angle is read off at the hit point.  Near-boundary
asymptotics (``s`` advances by ``w(s) sqrt(y)``) are only checked, never used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .curves import ConvexCurve, CumulativeIntegral, grid_roots
from .errors import ConvergenceError, DomainError, RangeError
from .surface import (
    UnitTangent,
    flow_points,
    from_model,
    model_distance,
    model_flow,
    model_inner,
    model_normal,
    inner,
    norm,
    normalize_model,
    orthonormal_frame,
    pull_tangent,
    push_tangent,
    to_model,
)

SQRT8 = 2 * math.sqrt(2)


def y_of_phi(phi):
    """``1 - cos(phi)`` without cancellation."""
    return 2 * np.sin(np.asarray(phi) / 2) ** 2


def phi_of_y(y):
    return 2 * np.arcsin(np.sqrt(np.asarray(y) / 2))


@dataclass(frozen=True)
class PhasePoint:
    """Boundary point ``s`` with the angle ``phi`` between the outgoing chord and the tangent."""

    s: float
    phi: float

    def __post_init__(self):
        if not 0 <= self.phi < math.pi:
            raise DomainError("phi must lie in [0, pi)")

    @property
    def y(self) -> float:
        return float(y_of_phi(self.phi))

    @classmethod
    def from_y(cls, s: float, y: float) -> "PhasePoint":
        if not 0 <= y < 2:
            raise DomainError("y must lie in [0, 2)")
        return cls(float(s), float(phi_of_y(y)))


# --- chord geometry --------------------------------------------------------------------


def _outgoing(curve: ConvexCurve, u0: float, phi: float):
    """Model point and unit model direction leaving ``u0`` at angle ``phi`` (inwards)."""
    S = curve.surface
    P = curve.model_point(np.array(u0))
    T = curve.model_tangent(np.array(u0))
    N = model_normal(S, P, T)
    return P, math.cos(phi) * T + math.sin(phi) * N


def _next_hit(curve: ConvexCurve, u0: float, P, V, guess: float) -> float:
    """Parameter of the second intersection of the chord ``(P, V)`` with the curve."""
    n = np.cross(P, V)

    def g(u):
        return curve.model(u)[0] @ n

    lo, hi = curve.domain
    limit = u0 + (hi - lo) if curve.periodic else hi
    if not limit > u0:
        raise DomainError("chord leaves the working arc")
    offsets = guess * 1.15 ** np.arange(-30, 60)
    offsets = offsets[u0 + offsets < limit]
    offsets = np.append(offsets, limit - u0 - 1e-12 * (hi - lo))
    vals = g(u0 + offsets)
    change = np.nonzero(np.sign(vals[1:]) != np.sign(vals[0]))[0]
    if len(change) == 0:
        raise DomainError("chord does not meet the working arc again")
    k = change[0]
    a, b = offsets[k], offsets[k + 1]
    return u0 + brentq(lambda d: float(g(u0 + d)), a, b, xtol=1e-16, rtol=4 * np.finfo(float).eps)


def _arrival_angle(curve: ConvexCurve, u1: float, P0, P1) -> float:
    """Angle at ``u1`` between the reflected chord and the forward tangent."""
    S = curve.surface
    if S.kind == "euclidean":
        back = P0 - P1
    else:
        back = P0 - S.curvature * model_inner(S, P0, P1) * P1
    T1 = curve.model_tangent(np.array(u1))
    N1 = model_normal(S, P1, T1)
    # the outgoing direction is the incoming one mirrored in the tangent: (-<back,T>, <back,N>)
    return math.atan2(float(model_inner(S, back, N1)), -float(model_inner(S, back, T1)))


def bounce(curve: ConvexCurve, u0: float, phi: float) -> tuple[float, float]:
    """One billiard step in ``(u, phi)``."""
    if not 0 < phi < math.pi:
        raise DomainError("phi must lie in (0, pi)")
    if curve.lift == "native":
        return _bounce_general(curve, u0, phi)
    P, V = _outgoing(curve, u0, phi)
    k = float(curve.kappa_u(np.array(u0)))
    guess = 2 * math.sin(phi) / k / float(curve.speed(np.array(u0)))
    u1 = _next_hit(curve, u0, P, V, guess)
    P1 = curve.model_point(np.array(u1))
    return u1, _arrival_angle(curve, u1, P, P1)


def _bounce_general(curve: ConvexCurve, u0: float, phi: float):
    S = curve.surface
    p = curve.point_u(np.array(u0))
    e1, e2 = orthonormal_frame(S, p, curve.tangent_u(np.array(u0)))
    v = math.cos(phi) * e1 + math.sin(phi) * e2
    k = float(curve.kappa_u(np.array(u0)))
    u = u0 + 2 * math.sin(phi) / k / float(curve.speed(np.array(u0)))
    tau = 2 * math.sin(phi) / k
    for _ in range(60):
        (q,), (w,) = flow_points(S, p[None], v[None], np.array([tau]))
        F = q - curve.point_u(np.array(u))
        if np.linalg.norm(F) < 1e-13:
            break
        J = np.stack([w, -curve.chart(np.array(u), 1)], axis=1)
        tau, u = np.array([tau, u]) - np.linalg.solve(J, F)
    else:
        raise ConvergenceError("chord-curve intersection did not converge")
    f1, f2 = orthonormal_frame(S, q, curve.tangent_u(np.array(u)))
    return float(u), math.atan2(-float(inner(S, q, w, f2)), float(inner(S, q, w, f1)))


def billiard_involution(curve: ConvexCurve, s: float, phi: float) -> tuple[float, float]:
    """``beta(s, phi) = (s1, pi - phi1)``: the billiard map followed by reversing the chord."""
    u1, phi1 = bounce(curve, float(curve.u_of_s(s)), phi)
    return float(curve.s_of_u(u1)), math.pi - phi1


def reflect(curve: ConvexCurve, g: UnitTangent) -> UnitTangent:
    """Reflect the oriented geodesic ``g`` off the curve at its first forward hit."""
    S = curve.surface
    if curve.lift == "native":
        raise DomainError("reflect of arbitrary geodesics needs a constant-curvature model")
    X = normalize_model(S, to_model(S, g.point))
    V = push_tangent(S, g.point, g.vector)
    V = V / np.sqrt(model_inner(S, V, V))
    n = np.cross(X, V)
    roots = grid_roots(lambda u: curve.model(u)[0] @ n, *curve.domain, 4097, curve.periodic)
    best = None
    for u in roots:
        P = curve.model_point(np.array(u))
        ahead = model_inner(S, P - X, V) if S.kind == "euclidean" else model_inner(S, P, V)
        if ahead > 1e-14:
            d = float(model_distance(S, X, P))
            if best is None or d < best[0]:
                best = (d, u, P)
    if best is None:
        raise DomainError("geodesic does not hit the curve")
    d, u, P = best
    _, V1 = model_flow(S, X, V, d)
    N = model_normal(S, P, curve.model_tangent(np.array(u)))
    c = float(model_inner(S, V1, N))
    if abs(c) < 1e-12:
        raise DomainError("tangential incidence")
    out = V1 - 2 * c * N
    p = from_model(S, P)
    v = pull_tangent(S, P, out)
    return UnitTangent(p, v / norm(S, p, v))


# --- weakly billiard-like maps ---------------------------------------------------------


@dataclass(frozen=True)
class WeaklyBilliardMap:
    """Area-preserving map ``(x, y) -> (x + w(x) sqrt(y) + O(y), y + O(y^1.5))``."""

    forward: Callable[[float, float], tuple[float, float]]
    w: Callable
    domain: tuple

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return self.forward(x, y)


def billiard_map_sy(curve: ConvexCurve) -> WeaklyBilliardMap:
    """Billiard ball map ``delta_+`` in ``(s, y)`` with ``w(s) = 2 sqrt(2) / kappa(s)``."""

    def forward(s, y):
        if y == 0:
            return float(s), 0.0
        u1, phi1 = bounce(curve, float(curve.u_of_s(s)), float(phi_of_y(y)))
        return float(curve.s_of_u(u1)), float(y_of_phi(phi1))

    def w(s):
        return SQRT8 / curve.kappa(s)

    return WeaklyBilliardMap(forward, w, (curve.s_range, (0.0, 2.0)))


def toy_map(w0: float = 1.0) -> WeaklyBilliardMap:
    """``(x, y) -> (x + w0 sqrt(y), y)``; its Lazutkin normal form is exact."""
    return WeaklyBilliardMap(lambda x, y: (x + w0 * math.sqrt(y), y), lambda x: w0 + 0 * np.asarray(x),
                             ((-np.inf, np.inf), (0.0, np.inf)))


def jacobian(F: Callable, x: float, y: float, hx: float = 1e-6, hy: float | None = None) -> np.ndarray:
    """Central finite-difference Jacobian of ``(x, y) -> F(x, y)``."""
    hy = 1e-4 * y if hy is None else hy
    fx = (np.array(F(x + hx, y)) - np.array(F(x - hx, y))) / (2 * hx)
    fy = (np.array(F(x, y + hy)) - np.array(F(x, y - hy))) / (2 * hy)
    return np.column_stack([fx, fy])


class LazutkinChart:
    """``X(x) = int_{x0}^x w^(-2/3)``, ``Y = w(x)^(2/3) y``."""

    def __init__(self, w: Callable, x_range, x0: float = 0.0, n_panels: int = 64):
        self.w = w
        lo, hi = x_range
        self._X = CumulativeIntegral(lambda x: np.asarray(w(x), dtype=float) ** (-2 / 3), lo, hi, x0,
                                     n_panels)

    def X(self, x):
        return self._X(x)

    def Y(self, x, y):
        return np.asarray(self.w(x), dtype=float) ** (2 / 3) * y

    def __call__(self, x, y):
        return self.X(x), self.Y(x, y)

    def inverse(self, X, Y):
        x = self._X.inverse(X)
        return x, Y / np.asarray(self.w(x), dtype=float) ** (2 / 3)


def lazutkin_transform(w: Callable, q, x_range=None, x0: float = 0.0):
    """Modified Lazutkin coordinates ``(X, Y)`` of ``q = (x, y)``."""
    x, y = q
    if x_range is None:
        r = abs(x - x0) + 1.0
        x_range = (x0 - r, x0 + r)
    X, Y = LazutkinChart(w, x_range, x0)(np.asarray(x, float), np.asarray(y, float))
    return float(X), float(Y)


def billiard_lazutkin_chart(curve: ConvexCurve, x0: float = 0.0) -> LazutkinChart:
    lo, hi = curve.s_range
    if curve.periodic:
        lo, hi = x0 - curve.length, x0 + curve.length
    return LazutkinChart(lambda s: SQRT8 / curve.kappa(s), (lo, hi), x0)


def _lazutkin_map(F: WeaklyBilliardMap, chart: LazutkinChart):
    def G(X, Y):
        x, y = chart.inverse(np.asarray(X, float), np.asarray(Y, float))
        x1, y1 = F(float(x), float(y))
        return float(chart.X(np.array(x1))), float(chart.Y(np.array(x1), y1))

    return G


@dataclass
class NormalFormReport:
    Y: np.ndarray
    dX: np.ndarray
    dY: np.ndarray
    slope: float
    coefficient: float
    dY_exponent: float | None
    f2_measured: float | None
    f2_predicted: float
    residual: float

    def passed(self, slope_tol: float = 0.01, coef_tol: float = 0.02) -> bool:
        ok = abs(self.slope - 0.5) <= slope_tol and abs(self.coefficient - 1) <= coef_tol
        return ok and (self.dY_exponent is None or self.dY_exponent >= 1.5 - 0.05)


def normal_form_check(F: WeaklyBilliardMap, chart: LazutkinChart, Y_range=(1e-6, 1e-3), X0: float = 0.0,
                      n: int = 16) -> NormalFormReport:
    """Fit ``log dX = log c + a log Y`` and the growth of ``dY`` in Lazutkin coordinates."""
    if n < 12:
        raise ValueError("need at least 12 samples")
    G = _lazutkin_map(F, chart)
    Ys = np.geomspace(*Y_range, n)
    out = np.array([G(X0, Y) for Y in Ys])
    dX, dY = out[:, 0] - X0, out[:, 1] - Ys
    A = np.column_stack([np.ones(n), np.log(Ys)])
    sol, res, *_ = np.linalg.lstsq(A, np.log(dX), rcond=None)
    residual = float(np.sqrt(res[0] / n)) if len(res) else 0.0
    big = np.abs(dY) > 1e-11 * Ys
    dY_exp = None
    if np.count_nonzero(big) >= n // 2:
        dY_exp = float(np.polyfit(np.log(Ys[big]), np.log(np.abs(dY[big])), 1)[0])
    # f2(x, y) = y - (2/3) w'(x) y^1.5 + o(y^1.5) in the original coordinates
    x0, _ = chart.inverse(np.array(X0), np.array(0.0))
    x0 = float(x0)
    h = 1e-5
    wp = float((F.w(np.array(x0 + h)) - F.w(np.array(x0 - h))) / (2 * h))
    f2 = None
    if abs(wp) > 1e-8:
        ys = np.geomspace(Y_range[0], Y_range[1], n) / float(F.w(np.array(x0))) ** (2 / 3)
        dy = np.array([F(x0, y)[1] - y for y in ys])
        B = np.column_stack([np.ones(n), np.sqrt(ys)])
        f2 = float(np.linalg.lstsq(B, dy / ys**1.5, rcond=None)[0][0])
    return NormalFormReport(Ys, dX, dY, float(sol[1]), float(np.exp(sol[0])), dY_exp, f2, -2 / 3 * wp,
                            residual)


@dataclass
class OrbitRecord:
    X: np.ndarray
    Y: np.ndarray
    m: float
    delta: float
    capped: bool = False


def orbit(F: WeaklyBilliardMap, chart: LazutkinChart, q0, delta: float, budget: int = 10**6) -> OrbitRecord:
    """Iterate in Lazutkin coordinates from ``q0 = (X0, Y0)`` until ``X`` exceeds ``delta``."""
    X0, Y0 = map(float, q0)
    if X0 > delta:
        raise RangeError("q0 is outside the window")
    if Y0 == 0:
        return OrbitRecord(np.array([X0]), np.array([Y0]), math.inf, delta, True)
    G = _lazutkin_map(F, chart)
    Xs, Ys = [X0], [Y0]
    for _ in range(budget):
        X, Y = G(Xs[-1], Ys[-1])
        if X > delta:
            return OrbitRecord(np.array(Xs), np.array(Ys), len(Xs) - 1, delta)
        Xs.append(X)
        Ys.append(Y)
    return OrbitRecord(np.array(Xs), np.array(Ys), budget, delta, True)


@dataclass
class PlogBounds:
    alpha: float
    beta: float
    step_beta: float
    m: float


def plog_bounds_check(rec: OrbitRecord) -> PlogBounds:
    """Empirical ``alpha = max |ln(Y_j / Y_0)|`` and the band width ``beta`` for the X-steps."""
    Y0 = rec.Y[0]
    alpha = float(np.max(np.abs(np.log(rec.Y / Y0))))
    if len(rec.X) < 2:
        return PlogBounds(alpha, 0.0, 0.0, rec.m)
    j = np.arange(1, len(rec.X))
    beta = float(np.max(np.abs(np.log((rec.X[1:] - rec.X[0]) / (j * math.sqrt(Y0))))))
    step_beta = float(np.max(np.abs(np.log(np.diff(rec.X) / math.sqrt(Y0)))))
    return PlogBounds(alpha, beta, step_beta, rec.m)


# --- caustic check ---------------------------------------------------------------------


def caustic_residual(curve: ConvexCurve, p: float, s_A: float, h: float = 1e-3) -> float:
    """Angle between the reflection of ``G_A`` off ``Gamma_p`` at ``C`` and the tangent ``CB``.

    The tangent of ``Gamma_p`` is taken from a five-point difference of rootfound
    string points, independently of the bisector construction.
    """
    from .curves import _model_intersection
    from .strings import _direction_to, _solve_uB

    S = curve.surface
    sA = s_A + h * np.arange(-2, 3)
    uA = curve.u_of_s(sA)
    uB = np.array([_solve_uB(curve, a, p) for a in uA])
    _, C = _model_intersection(curve, uA, uB)
    X = C[2]
    dC = (C[0] - 8 * C[1] + 8 * C[3] - C[4]) / (12 * h)
    if S.kind == "euclidean":
        dC[2] = 0.0
    else:
        dC = dC - S.curvature * model_inner(S, dC, X) * X
    Tg = dC / np.sqrt(model_inner(S, dC, dC))
    Ng = model_normal(S, X, Tg)
    PA = curve.model_point(np.array(uA[2]))
    PB = curve.model_point(np.array(uB[2]))
    v_in = -_direction_to(S, X, PA)
    v_out = v_in - 2 * model_inner(S, v_in, Ng) * Ng
    zB = _direction_to(S, X, PB)
    cross = model_inner(S, v_out, model_normal(S, X, zB))
    return float(abs(math.atan2(cross, model_inner(S, v_out, zB))))
