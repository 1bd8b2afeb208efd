"""String construction ``Gamma_p``, string maps ``T_p`` and Poritsky-property checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .curves import ConvexCurve, L_of_params, _model_intersection, grid_roots, string_length_L
from .errors import DomainError, RangeError, UnsupportedKindError
from .surface import from_model, model_inner, normalize_model, pull_tangent, to_model

ROOT_XTOL = 1e-15


def _L_minus_p(curve: ConvexCurve, uA: float, p: float):
    if curve.lift == "native":
        sA = float(curve.s_of_u(uA))
        return lambda uB: string_length_L(curve, sA, float(curve.s_of_u(uB))) - p
    return lambda uB: float(L_of_params(curve, uA, uB)) - p


def _solve_uB(curve: ConvexCurve, uA: float, p: float) -> float:
    """Parameter of ``B = T_p(A)`` for ``A`` at parameter ``uA``."""
    if p <= 0:
        raise RangeError("p must be positive")
    sp = float(curve.speed(np.array(uA)))
    k = float(curve.kappa_u(np.array(uA)))
    d0 = (12 * p / k**2) ** (1 / 3) / sp
    lo_dom, hi_dom = curve.domain
    hi_lim = uA + 0.5 * (hi_dom - lo_dom) if curve.periodic else hi_dom
    f = _L_minus_p(curve, uA, p)
    lo = d0 / 2
    while f(uA + lo) > 0:
        lo /= 2
        if lo < 1e-12:
            raise RangeError("cannot bracket T_p(A) from below")
    hi = min(2 * d0, hi_lim - uA)
    while f(uA + hi) < 0:
        if uA + hi >= hi_lim:
            raise RangeError(f"no solution of L(A, B) = {p} inside the curve domain")
        hi = min(2 * hi, hi_lim - uA)
    return brentq(lambda d: f(uA + d), lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps) + uA


def string_map(curve: ConvexCurve, p: float, s_A: float) -> float:
    """``s_B = T_p(s_A)``: the point ahead of ``A`` with ``L(A, B) = p``."""
    uB = _solve_uB(curve, float(curve.u_of_s(s_A)), p)
    return float(curve.s_of_u(uB))


def _anchor_range(curve: ConvexCurve, p: float) -> tuple[float, float]:
    """Anchors ``s_A`` whose image ``T_p(A)`` stays inside the curve domain."""
    if curve.periodic:
        return 0.0, curve.length
    lo, hi = curve.s_range
    u_end = curve.domain[1]
    f = lambda u: float(L_of_params(curve, u, u_end)) - p  # noqa: E731
    if f(curve.domain[0]) < 0:
        raise RangeError(f"p={p} is too large for the working arc")
    u_star = brentq(f, curve.domain[0], u_end - 1e-9 * (u_end - curve.domain[0]), xtol=1e-14)
    return lo, float(curve.s_of_u(u_star)) - 1e-9 * (hi - lo)


@dataclass
class StringCurve:
    """Sampled ``Gamma_p``: rows of ``samples`` are ``(C..., s_A, s_B)``."""

    parent: ConvexCurve
    p: float
    points: np.ndarray
    s_A: np.ndarray
    s_B: np.ndarray
    method: str = "pair-rootfind"
    _spline: CubicSpline | None = field(default=None, repr=False)

    @property
    def samples(self) -> np.ndarray:
        return np.column_stack([self.points, self.s_A, self.s_B])

    def point_at(self, s_A):
        """Interpolated point of ``Gamma_p`` whose left tangency point is ``s_A``."""
        if self._spline is None:
            self._spline = CubicSpline(self.s_A, self.points, axis=0)
        return self._spline(s_A)

    def residuals(self) -> np.ndarray:
        """``L(s_A, s_B) - p`` at every sample."""
        c = self.parent
        uA, uB = c.u_of_s(self.s_A), c.u_of_s(self.s_B)
        return L_of_params(c, uA, uB) - self.p


def string_curve(curve: ConvexCurve, p: float, method: str = "pair-rootfind", n_samples: int = 64,
                 s_range=None) -> StringCurve:
    """Sample ``Gamma_p = {C_AB : L(A, B) = p}``.

    ``pair-rootfind`` solves ``L(s_A, s_B) = p`` on a uniform anchor grid;
    ``bisector-ode`` integrates the exterior-bisector field from one rootfound seed.
    """
    lo, hi = s_range if s_range is not None else _anchor_range(curve, p)
    if method == "pair-rootfind":
        sA = np.linspace(lo, hi, n_samples, endpoint=not curve.periodic)
        uA = curve.u_of_s(sA)
        uB = np.array([_solve_uB(curve, a, p) for a in uA])
        if curve.lift == "native":
            from .curves import tangent_intersection

            pts = np.array([tangent_intersection(curve, float(curve.s_of_u(a)), float(curve.s_of_u(b)))
                            for a, b in zip(uA, uB)])
        else:
            _, C = _model_intersection(curve, uA, uB)
            pts = from_model(curve.surface, C)
        return StringCurve(curve, p, pts, sA, curve.s_of_u(uB), method)
    if method == "bisector-ode":
        return _string_curve_ode(curve, p, lo, hi, n_samples)
    raise ValueError(f"unknown method {method!r}")


# --- tangency points and the exterior bisector ------------------------------------


def _tangency_fn(curve, X):
    def f(u):
        Q, Q1, _ = curve.model(u)
        return np.linalg.det(np.stack([Q, Q1, np.broadcast_to(X, Q.shape)], axis=-2))

    def df(u):
        Q, _, Q2 = curve.model(u)
        return np.linalg.det(np.stack([Q, Q2, np.broadcast_to(X, Q.shape)], axis=-2))

    return f, df


def tangency_params(curve: ConvexCurve, X, guess=None) -> tuple[float, float]:
    """Parameters ``(uA, uB)`` of the two tangent geodesics from the model point ``X``.

    ``A`` is the point whose forward tangent geodesic reaches ``X``.
    """
    S = curve.surface
    f, df = _tangency_fn(curve, X)
    roots = None
    if guess is not None:
        u = np.array(guess, dtype=float)
        for _ in range(30):
            step = f(u) / df(u)
            u = u - step
            if np.all(np.abs(step) < 1e-15 * (1 + np.abs(u))):
                break
        if abs(u[1] - u[0]) > 1e-9 and np.all(np.abs(f(u)) < 1e-13):
            roots = list(u)
    if roots is None:
        lo, hi = curve.domain
        roots = grid_roots(f, lo, hi, periodic=curve.periodic)
        if len(roots) != 2:
            raise DomainError("point is not on the concave side of the curve near the working arc")
    uA, uB = roots
    PA = curve.model_point(np.array(uA))
    TA = curve.model_tangent(np.array(uA))
    if model_inner(S, X - PA, TA) < 0:
        uA, uB = uB, uA
    return float(uA), float(uB)


def _direction_to(S, X, P):
    """Unit model tangent at ``X`` pointing along the geodesic towards ``P``."""
    if S.kind == "euclidean":
        v = P - X
    else:
        v = P - S.curvature * model_inner(S, P, X)[..., None] * X
    return v / np.sqrt(model_inner(S, v, v))[..., None]


def _bisector_model(curve, X, guess=None):
    S = curve.surface
    uA, uB = tangency_params(curve, X, guess)
    PA, PB = curve.model_point(np.array(uA)), curve.model_point(np.array(uB))
    D = _direction_to(S, X, PB) - _direction_to(S, X, PA)
    return D / np.sqrt(model_inner(S, D, D)), (uA, uB)


def bisector_direction(curve: ConvexCurve, C) -> np.ndarray:
    """Unit native direction of the exterior bisector at ``C`` (oriented with the curve)."""
    if curve.lift == "native":
        raise UnsupportedKindError("bisector_direction needs a constant-curvature model")
    S = curve.surface
    X = normalize_model(S, to_model(S, np.asarray(C, dtype=float)))
    D, _ = _bisector_model(curve, X)
    v = pull_tangent(S, X, D)
    from .surface import norm

    return v / norm(S, from_model(S, X), v)


def _string_curve_ode(curve, p, lo, hi, n_samples) -> StringCurve:
    if curve.lift == "native":
        raise UnsupportedKindError("bisector-ode needs a constant-curvature model")
    S = curve.surface
    uA0 = float(curve.u_of_s(lo))
    uB0 = _solve_uB(curve, uA0, p)
    _, X0 = _model_intersection(curve, np.array(uA0), np.array(uB0))
    state = {"guess": (uA0, uB0)}

    def rhs(_, X):
        X = normalize_model(S, X)
        D, g = _bisector_model(curve, X, state["guess"])
        state["guess"] = g
        return D

    def past_end(_, X):
        g = tangency_params(curve, normalize_model(S, X), state["guess"])
        return float(curve.s_of_u(g[0])) - hi

    past_end.terminal = True
    past_end.direction = 1
    span = 4.0 * (hi - lo) + 1.0
    sol = solve_ivp(rhs, (0.0, span), X0, method="DOP853", rtol=1e-13, atol=1e-14,
                    dense_output=True, events=past_end)
    sigma = np.linspace(0.0, sol.t[-1], n_samples)
    pts, sAs, sBs = [], [], []
    guess = (uA0, uB0)
    for sg in sigma:
        X = normalize_model(S, sol.sol(sg))
        guess = tangency_params(curve, X, guess)
        pts.append(X)
        sAs.append(float(curve.s_of_u(guess[0])))
        sBs.append(float(curve.s_of_u(guess[1])))
    native = from_model(S, np.array(pts))
    return StringCurve(curve, p, native, np.array(sAs), np.array(sBs), "bisector-ode")


def string_curve_discrepancy(sc: StringCurve) -> float:
    """Max distance between samples of ``sc`` and rootfound points with the same ``s_A``."""
    from .surface import model_distance

    c, S = sc.parent, sc.parent.surface
    uA = c.u_of_s(sc.s_A)
    uB = np.array([_solve_uB(c, a, sc.p) for a in uA])
    _, C = _model_intersection(c, uA, uB)
    X = normalize_model(S, to_model(S, sc.points))
    return float(np.max(model_distance(S, X, C)))


# --- Poritsky checks ------------------------------------------------------------------


@dataclass
class PoritskyReport:
    p_values: list
    c_p: list
    max_deviation: list
    tolerance: float
    passed: bool

    def __post_init__(self):
        if any(d < 0 for d in self.max_deviation):
            raise ValueError("deviations must be non-negative")


def t_increments(curve: ConvexCurve, p: float, n_samples: int = 50) -> np.ndarray:
    """``t(T_p(A)) - t(A)`` over uniformly spaced anchors (normalized Lazutkin ``t``)."""
    lo, hi = _anchor_range(curve, p)
    sA = np.linspace(lo, hi, n_samples, endpoint=not curve.periodic)
    uA = curve.u_of_s(sA)
    uB = np.array([_solve_uB(curve, a, p) for a in uA])
    return curve.t_of_u(uB) - curve.t_of_u(uA)


def poritsky_check(curve: ConvexCurve, p_list, n_samples: int = 50, tol: float = 1e-6) -> PoritskyReport:
    """Test whether every ``T_p`` is a translation in the Lazutkin parameter."""
    cs, devs = [], []
    for p in p_list:
        inc = t_increments(curve, p, n_samples)
        cs.append(float(np.mean(inc)))
        devs.append(float(np.max(np.abs(inc - inc.mean()))))
    return PoritskyReport(list(map(float, p_list)), cs, devs, tol, bool(max(devs) < tol))


def string_orbit(curve: ConvexCurve, p: float, s0: float, n_steps: int) -> np.ndarray:
    """Natural parameters of ``A, T_p(A), T_p^2(A), ...``."""
    u = [float(curve.u_of_s(s0))]
    for _ in range(n_steps):
        u.append(_solve_uB(curve, u[-1], p))
    return curve.s_of_u(np.array(u))


def poritsky_lazutkin_fit(curve: ConvexCurve, p: float, s0: float = 0.0, n_steps: int | None = None):
    """Compare the empirical Poritsky parameter with the Lazutkin parameter.

    Along a ``T_p``-orbit the empirical parameter takes the values ``0, 1, 2, ...``;
    the Lazutkin parameter at the orbit points is fitted affinely in that index.
    Returns ``(max_error, slope)`` in units of the normalized Lazutkin parameter.
    """
    if n_steps is None:
        c = np.mean(t_increments(curve, p, 8))
        span = (curve.t_of_u(np.array(curve.domain[1])) - curve.t_of_u(np.array(curve.domain[0])))
        n_steps = int(0.95 * span / c) if curve.periodic else int(0.8 * span / c)
    s = string_orbit(curve, p, s0, n_steps)
    t = curve.t_of_u(curve.u_of_s(s))
    m = np.arange(len(t))
    coef = np.polyfit(m, t, 1)
    err = t - np.polyval(coef, m)
    return float(np.max(np.abs(err))), float(coef[0])


def lasyl_ratio(curve: ConvexCurve, s_A: float, delta: float) -> float:
    """``L(A, B) / (kappa(A)^2 delta^3 / 12)`` with ``s_B = s_A + delta``."""
    k = float(curve.kappa(s_A))
    return string_length_L(curve, s_A, s_A + delta) / (k * k * delta**3 / 12)
