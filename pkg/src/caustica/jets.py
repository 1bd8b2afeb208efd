"""Taylor coefficients of ``Lambda(t)``, the constant ``sigma_n`` and the 4-jet ODE.

Jets ``(x, b0, ..., b4)`` describe graphs ``y = h(x)`` with ``b_k = h^(k)(x)`` in
the standard chart of a constant-curvature surface (the exponential chart at
the model base point on curved surfaces).  ``Lambda(t)`` is geometric, so it is
computed on the polynomial continuation of a jet without changing charts.

With ``L(0, t) = sign(t) F(t)`` for an analytic ``F`` and ``L`` symmetric in its
arguments, ``Lambda(t) = F(t) + F(-t)`` is even: every odd coefficient vanishes
identically and only ``t^4, t^6, ...`` are fitted.  The ``t^6`` coefficient sits
under several orders of cancellation, so rather than a geometric ladder of tiny
``t`` (where it drops below double-precision noise) the even coefficients are
fitted by least squares on Chebyshev nodes of a moderate interval, with enough
higher-order terms to absorb truncation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curves import ConvexCurve, lambda_defect
from .errors import ConvergenceError, ConvexityError, DomainError, IllConditionedError, UnsupportedKindError
from .surface import Surface, make_surface

T_MAX = 0.1
T_MIN_RATIO = 0.05
N_POINTS = 40
MAX_DEGREE = 16


@dataclass(frozen=True)
class Jet4:
    """4-jet ``(x, b0, b1, b2, b3, b4)`` of a graph ``y = h(x)``."""

    x: float
    b: tuple

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        if len(b) != 5:
            raise ValueError("a 4-jet needs b0..b4")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "x", float(self.x))

    @classmethod
    def from_sequence(cls, seq) -> "Jet4":
        seq = list(seq)
        return cls(seq[0], tuple(seq[1:6]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, *self.b])


def _check_surface(S: Surface) -> Surface:
    S = make_surface(S)
    if S.kind == "general-chart":
        raise UnsupportedKindError("jet computations need a constant-curvature model")
    return S


def jet_curve(S, x: float, b, half_width: float = 0.5) -> ConvexCurve:
    """Graph of the Taylor polynomial ``sum b_k (xi - x)^k / k!`` based at ``xi = x``."""
    S = _check_surface(S)
    coef = np.array([bk / math.factorial(k) for k, bk in enumerate(b)], dtype=float)
    polys = [coef]
    for _ in range(2):
        polys.append(np.polynomial.polynomial.polyder(polys[-1]) if len(polys[-1]) > 1 else np.zeros(1))

    def fn(u, k=0):
        u = np.asarray(u, dtype=float)
        xi = u if k == 0 else (np.ones_like(u) if k == 1 else np.zeros_like(u))
        return np.stack([xi, np.polynomial.polynomial.polyval(u - x, polys[k])], axis=-1)

    hw = half_width
    for _ in range(40):
        grid = np.linspace(x - hw, x + hw, 257)
        if np.all(np.polynomial.polynomial.polyval(grid - x, polys[2]) > 0):
            try:
                return ConvexCurve(S, fn, (x - hw, x + hw), base=x, lift="normal", name="jet")
            except ConvexityError:
                pass
        hw *= 0.8
    raise ConvexityError("jet is not convex near its base point")


@dataclass
class LambdaTaylor:
    """Fitted coefficients ``Lambda_k`` for ``k = 3 .. max_degree`` of ``Lambda(t)``."""

    degrees: np.ndarray
    coeffs: np.ndarray
    t: np.ndarray = field(repr=False)
    residual: float = 0.0
    condition: float = 0.0

    def __getitem__(self, k: int) -> float:
        return float(self.coeffs[list(self.degrees).index(k)])

    def up_to(self, order: int) -> dict:
        return {int(k): float(c) for k, c in zip(self.degrees, self.coeffs) if k <= order}


def lambda_taylor(curve: ConvexCurve, order: int = 6, t_max: float = T_MAX, n_points: int = N_POINTS,
                  t_min_ratio: float = T_MIN_RATIO, max_degree: int = MAX_DEGREE) -> LambdaTaylor:
    """Estimate the Taylor coefficients of ``Lambda(t)`` up to ``t^order`` (and beyond).

    ``Lambda`` is sampled at Chebyshev nodes of ``[t_min_ratio * t_max, t_max]``
    and fitted by the even monomials ``t^4 .. t^max_degree`` in the scaled
    variable ``t / t_max``; odd coefficients are reported as exact zeros.
    """
    if order < 3 or order > max_degree:
        raise ValueError("order must lie between 3 and max_degree")
    lo, hi = curve.domain
    avail = min(-float(curve.t_of_u(np.array(lo))), float(curve.t_of_u(np.array(hi))))
    t_max = min(t_max, 0.9 * avail)
    a = t_min_ratio * t_max
    k = np.arange(n_points)
    t = a + (t_max - a) * (1 - np.cos(np.pi * (k + 0.5) / n_points)) / 2
    lam = np.asarray(lambda_defect(curve, t))
    even = np.arange(4, max_degree + 1, 2)
    V = (t[:, None] / t_max) ** even
    cond = float(np.linalg.cond(V))
    if cond > 1e10:
        raise IllConditionedError(
            f"fit is ill-conditioned (cond={cond:.2e}); lower max_degree or raise t_min_ratio")
    sol, res, *_ = np.linalg.lstsq(V, lam, rcond=None)
    resid = float(np.sqrt(res[0] / n_points)) if len(res) else 0.0
    degrees = np.arange(3, max_degree + 1)
    coeffs = np.zeros(len(degrees))
    coeffs[np.isin(degrees, even)] = sol / t_max**even
    return LambdaTaylor(degrees, coeffs, t, resid, cond)


def _jet_metric(S: Surface, p) -> np.ndarray:
    """Metric of the exponential chart at the model base point (identity in the plane)."""
    if S.kind == "euclidean":
        return np.eye(2)
    r = float(np.hypot(*p))
    if r < 1e-12:
        return np.eye(2)
    e = np.asarray(p, dtype=float) / r
    f = np.array([-e[1], e[0]])
    from .surface import psi

    ratio = float(psi(S, r)) / r
    return np.outer(e, e) + ratio**2 * np.outer(f, f)


def _jet_kappa(S: Surface, J2) -> float:
    x, b0, b1, b2 = J2
    c = jet_curve(S, x, (b0, b1, b2), half_width=1e-2) if b2 > 0 else None
    if c is None:
        raise ConvexityError("jet has non-positive curvature")
    return float(c.kappa_u(np.array(x)))


def sigma_n(J2, S="euclidean", n: int = 5, kappa: float | None = None) -> float:
    """``(n-2)(n-3) / (6 (n+1)!) * |w| (|u| kappa)^(-n)`` for odd ``n``; zero for ``n = 3`` and even ``n``.

    ``u = (1, b1)``; ``w`` is ``d/dy`` projected orthogonally onto the normal line of ``u``.
    """
    S = _check_surface(S)
    if n == 3 or n % 2 == 0:
        return 0.0
    x, b0, b1, b2 = map(float, J2)
    g = _jet_metric(S, (x, b0))
    u = np.array([1.0, b1])
    ey = np.array([0.0, 1.0])
    w = ey - (ey @ g @ u) / (u @ g @ u) * u
    k = _jet_kappa(S, (x, b0, b1, b2)) if kappa is None else kappa
    return (n - 2) * (n - 3) / (6 * math.factorial(n + 1)) * math.sqrt(w @ g @ w) * (
        math.sqrt(u @ g @ u) * k) ** (-n)


def _jet_half_width(S: Surface, J4: Jet4, kappa: float) -> float:
    # t is scale invariant, so the sampled arc should scale like 1/kappa
    hw = 1.0 / kappa
    if S.kind != "euclidean":
        hw = min(hw, 0.8)
    return hw


def lambda6(S, J4: Jet4, b5: float, tail=(), **fit) -> float:
    """``Lambda_6`` of the continuation of ``J4`` by ``b5`` (and optional higher ``tail``)."""
    S = _check_surface(S)
    b = (*J4.b, b5, *tail)
    k = _jet_kappa(S, (J4.x, *J4.b[:3]))
    curve = jet_curve(S, J4.x, b, half_width=_jet_half_width(S, J4, k))
    return lambda_taylor(curve, 6, **fit)[6]


def solve_b5(J4: Jet4, S="euclidean", self_check: bool = True, tail=(), **fit) -> float:
    """``b5`` making the ``t^6`` coefficient of ``Lambda`` vanish (affine solve in ``b5``)."""
    S = _check_surface(S)
    l0 = lambda6(S, J4, 0.0, tail, **fit)
    l1 = lambda6(S, J4, 1.0, tail, **fit)
    slope = l1 - l0
    if self_check:
        sig = sigma_n((J4.x, *J4.b[:3]), S, 5)
        if abs(slope / sig - 1) > 0.05:
            raise ConvergenceError(f"measured slope {slope:.6g} disagrees with sigma_5 = {sig:.6g}")
    return -l0 / slope


def conic_through_jet(J4: Jet4) -> np.ndarray:
    """Coefficients ``(A, B, C, D, E, F)`` of the plane conic with the given 4-jet.

    ``A x^2 + B x y + C y^2 + D x + E y + F`` restricted to the jet vanishes to
    order five; the five linear conditions fix the conic up to scale.
    """
    P = np.polynomial.polynomial
    h = np.array([bk / math.factorial(k) for k, bk in enumerate(J4.b)])
    xs = np.array([J4.x, 1.0])

    def trunc(c):
        return np.pad(c, (0, 5))[:5]

    monomials = [P.polymul(xs, xs), P.polymul(xs, h), P.polymul(h, h), xs, h, np.ones(1)]
    M = np.stack([trunc(m) for m in monomials], axis=1)
    _, sv, Vt = np.linalg.svd(M)
    if sv[-1] < 1e-12 * sv[0]:
        raise DomainError("4-jet does not determine a unique conic")
    return Vt[-1]


def conic_y(coef, x, near) -> np.ndarray:
    """Branch of the conic ``coef`` over ``x`` nearest to ``near``."""
    A, B, C, D, E, F = coef
    x, near = np.asarray(x, dtype=float), np.asarray(near, dtype=float)
    a, b, c = C * np.ones_like(x), B * x + E, A * x**2 + D * x + F
    if abs(C) < 1e-14 * np.max(np.abs(coef)):
        return -c / b
    disc = np.sqrt(np.maximum(b * b - 4 * a * c, 0.0))
    r1, r2 = (-b + disc) / (2 * a), (-b - disc) / (2 * a)
    return np.where(np.abs(r1 - near) < np.abs(r2 - near), r1, r2)


@dataclass
class JetSolution:
    """Reconstructed curve: ``x`` and the jet coordinates ``b0..b4`` along it."""

    x: np.ndarray
    b: np.ndarray
    complete: bool = True

    @property
    def y(self) -> np.ndarray:
        return self.b[:, 0]


def _rhs(S, state, fit):
    x, b = state[0], state[1:]
    b5 = solve_b5(Jet4(x, tuple(b)), S, self_check=False, **fit)
    return np.array([1.0, b[1], b[2], b[3], b[4], b5])


def integrate_jet_ode(J4: Jet4, S="euclidean", x_range=0.1, step: float = 1e-2, **fit) -> JetSolution:
    """Integrate ``db_k = b_{k+1} dx`` (``k < 4``), ``db_4 = b_5(J4) dx`` with classical RK4.

    ``x_range`` is a half-width about ``J4.x`` or an explicit ``(x_lo, x_hi)``.
    """
    S = _check_surface(S)
    if np.ndim(x_range) == 0:
        x_lo, x_hi = J4.x - float(x_range), J4.x + float(x_range)
    else:
        x_lo, x_hi = map(float, x_range)
    if not x_lo <= J4.x <= x_hi:
        raise DomainError("the jet abscissa must lie in x_range")
    y0 = J4.as_array()
    branches, complete = [], True
    for end in (x_lo, x_hi):
        n = max(1, int(math.ceil(abs(end - J4.x) / step)))
        h = (end - J4.x) / n
        ys = [y0]
        for _ in range(n if end != J4.x else 0):
            y = ys[-1]
            try:
                k1 = _rhs(S, y, fit)
                k2 = _rhs(S, y + h / 2 * k1, fit)
                k3 = _rhs(S, y + h / 2 * k2, fit)
                k4 = _rhs(S, y + h * k3, fit)
            except ConvexityError:
                warnings.warn("convexity lost during jet integration; returning partial curve",
                              RuntimeWarning, stacklevel=2)
                complete = False
                break
            ys.append(y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
        branches.append(np.array(ys))
    left, right = branches
    full = np.concatenate([left[::-1], right[1:]])
    return JetSolution(full[:, 0], full[:, 1:], complete)
