"""Surfaces, geodesics and the circle-length functions ``psi``/``Psi``.

Point conventions by surface kind:

* ``euclidean``     -- 2-vector ``(x, y)``.
* ``sphere``        -- unit 3-vector on ``x1^2 + x2^2 + x3^2 = 1``.
* ``hyperbolic``    -- 2-vector in the Poincare disk with metric ``2|dz| / (1 - |z|^2)``.
* ``general-chart`` -- 2-vector of chart coordinates with a user metric.

Constant-curvature computations run in a *projective model*: every point has a
homogeneous 3-vector lift (``(x, y, 1)`` for the plane, the point itself on the
sphere, the upper sheet of ``x1^2 + x2^2 - x3^2 = -1`` for the hyperbolic
plane).  Geodesics are then planes through the origin, and intersections of
geodesics are cross products of their normals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import (
    ConstructionError,
    ConvergenceError,
    DomainError,
    IllConditionedError,
    UnsupportedKindError,
)

KINDS = ("euclidean", "sphere", "hyperbolic", "general-chart")
CONSTANT_KINDS = ("euclidean", "sphere", "hyperbolic")

_CURVATURE = {"euclidean": 0.0, "sphere": 1.0, "hyperbolic": -1.0}
# Ambient quadratic form of each projective model.
_FORM = {
    "euclidean": np.diag([1.0, 1.0, 0.0]),
    "sphere": np.eye(3),
    "hyperbolic": np.diag([1.0, 1.0, -1.0]),
}

CHRISTOFFEL_STEP = 1e-5


def _vectorize_metric(metric: Callable) -> Callable:
    """Return a metric callable that broadcasts over leading point axes."""
    probe = np.zeros((3, 2))
    try:
        out = np.asarray(metric(probe), dtype=float)
        if out.shape == (3, 2, 2):
            return metric
    except Exception:  # scalar-only user function
        pass

    def batched(p):
        p = np.asarray(p, dtype=float)
        flat = p.reshape(-1, 2)
        g = np.array([np.asarray(metric(q), dtype=float) for q in flat])
        return g.reshape(p.shape[:-1] + (2, 2))

    return batched


def _fd_christoffel(metric: Callable, h: float = CHRISTOFFEL_STEP) -> Callable:
    """Christoffel symbols ``G[..., i, j, k]`` from central differences of the metric."""

    def christoffel(p):
        p = np.asarray(p, dtype=float)
        e = np.eye(2) * h
        dg = np.stack(
            [(metric(p + e[l]) - metric(p - e[l])) / (2 * h) for l in range(2)], axis=-3
        )  # dg[..., l, i, j] = d_l g_ij
        ginv = np.linalg.inv(metric(p))
        # first kind: [l, j, k] = 1/2 (d_j g_lk + d_k g_lj - d_l g_jk)
        first = 0.5 * (
            np.swapaxes(dg, -3, -2)
            + np.swapaxes(np.swapaxes(dg, -3, -2), -2, -1)
            - dg
        )
        return np.einsum("...il,...ljk->...ijk", ginv, first)

    return christoffel


@dataclass(frozen=True)
class Surface:
    """A two-dimensional Riemannian surface.

    ``metric`` and ``christoffel`` are only used by the ``general-chart`` kind;
    both must broadcast over leading axes of the point array (scalar-only
    callables are wrapped automatically, at a speed cost).
    """

    kind: str
    curvature: float | None
    metric: Callable | None = None
    christoffel: Callable | None = None
    integrator_step: float = 1e-3
    validity_radius: float = math.inf

    @property
    def is_constant(self) -> bool:
        return self.kind in CONSTANT_KINDS

    @property
    def form(self) -> np.ndarray:
        return _FORM[self.kind]


def make_surface(spec: str | Mapping | Surface = "euclidean", **kwargs) -> Surface:
    """Build a :class:`Surface` from a kind name or a mapping.

    A mapping may carry ``kind``, ``metric``, ``christoffel``,
    ``integrator_step``, ``validity_radius`` and ``probe_points``.
    """
    if isinstance(spec, Surface):
        return spec
    if isinstance(spec, str):
        params = {"kind": spec, **kwargs}
    else:
        params = {**dict(spec), **kwargs}
    kind = params.pop("kind", None)
    if kind is None:
        kind = "general-chart" if "metric" in params else "euclidean"
    if kind in ("plane", "flat"):
        kind = "euclidean"
    if kind not in KINDS:
        raise ConstructionError(f"unknown surface kind {kind!r}")
    step = float(params.pop("integrator_step", 1e-3))
    if not step > 0:
        raise ConstructionError("integrator_step must be positive")
    radius = float(params.pop("validity_radius", math.inf))
    if kind in CONSTANT_KINDS:
        unknown = set(params) - {"probe_points"}
        if unknown:
            raise ConstructionError(f"unexpected keys for {kind}: {sorted(unknown)}")
        return Surface(kind, _CURVATURE[kind], integrator_step=step, validity_radius=radius)

    metric = params.pop("metric", None)
    if metric is None:
        raise ConstructionError("general-chart surface requires a metric")
    metric = _vectorize_metric(metric)
    christoffel = params.pop("christoffel", None) or _fd_christoffel(metric)
    probes = params.pop("probe_points", None)
    if params:
        raise ConstructionError(f"unexpected keys: {sorted(params)}")
    if probes is None:
        span = min(radius, 0.5)
        grid = np.linspace(-span, span, 5)
        probes = np.array([(a, b) for a in grid for b in grid])
    g = np.asarray(metric(np.asarray(probes, dtype=float)))
    if not np.allclose(g, np.swapaxes(g, -1, -2), atol=1e-12):
        raise ConstructionError("metric is not symmetric at probe points")
    if np.any(np.linalg.eigvalsh(g) <= 0):
        raise ConstructionError("metric is not positive definite at probe points")
    return Surface(kind, None, metric, christoffel, step, radius)


def _as_array(x) -> np.ndarray:
    a = np.array(x, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class UnitTangent:
    """A point with a metric-unit tangent vector; also a handle on an oriented geodesic."""

    point: np.ndarray
    vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _as_array(self.point))
        object.__setattr__(self, "vector", _as_array(self.vector))


def unit_tangent(S: Surface, point, vector) -> UnitTangent:
    """Project ``vector`` to the tangent space at ``point`` and normalize it."""
    p = np.asarray(point, dtype=float)
    v = np.asarray(vector, dtype=float)
    if S.kind == "sphere":
        p = p / np.linalg.norm(p)
        v = v - np.dot(v, p) * p
    n = norm(S, p, v)
    if n == 0:
        raise DomainError("zero tangent vector")
    return UnitTangent(p, v / n)


# --- metric primitives -------------------------------------------------------


def metric_tensor(S: Surface, p) -> np.ndarray:
    """Metric matrix at chart point(s) ``p`` (not defined for the sphere)."""
    p = np.asarray(p, dtype=float)
    if S.kind == "euclidean":
        return np.broadcast_to(np.eye(2), p.shape[:-1] + (2, 2)).copy()
    if S.kind == "hyperbolic":
        lam = 2.0 / (1.0 - np.sum(p * p, axis=-1))
        return (lam**2)[..., None, None] * np.eye(2)
    if S.kind == "general-chart":
        return np.asarray(S.metric(p), dtype=float)
    raise UnsupportedKindError("sphere points are ambient; use inner()")


def inner(S: Surface, p, u, v) -> np.ndarray:
    """Riemannian inner product of tangent vectors ``u``, ``v`` at ``p``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if S.kind == "sphere":
        return np.sum(u * v, axis=-1)
    g = metric_tensor(S, p)
    return np.einsum("...i,...ij,...j->...", u, g, v)


def norm(S: Surface, p, v) -> np.ndarray:
    return np.sqrt(inner(S, p, v, v))


def orthonormal_frame(S: Surface, p, v) -> tuple[np.ndarray, np.ndarray]:
    """Positively oriented orthonormal frame whose first vector is along ``v``."""
    p = np.asarray(p, dtype=float)
    e1 = np.asarray(v, dtype=float) / norm(S, p, v)
    if S.kind == "sphere":
        e2 = np.cross(p, e1)
    else:
        a = metric_tensor(S, p) @ e1
        e2 = np.array([-a[1], a[0]])
    return e1, e2 / norm(S, p, e2)


def angle(S: Surface, point, u, v, oriented: bool = False) -> float:
    """Angle between tangent vectors ``u`` and ``v`` at ``point``.

    Unoriented angles lie in ``[0, pi]``; the oriented variant is signed by the
    surface orientation (outward normal on the sphere).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = float(norm(S, point, u)), float(norm(S, point, v))
    if nu == 0 or nv == 0:
        raise DomainError("angle of a zero vector")
    c = float(inner(S, point, u, v)) / (nu * nv)
    if S.kind == "sphere":
        w = float(np.dot(np.asarray(point, dtype=float), np.cross(u, v)))
    else:
        g = metric_tensor(S, point)
        w = math.sqrt(np.linalg.det(g)) * (u[0] * v[1] - u[1] * v[0])
    s = w / (nu * nv)
    theta = math.atan2(abs(s), c)
    if oriented and s < 0:
        return -theta
    return theta


# --- projective model --------------------------------------------------------


def to_model(S: Surface, p) -> np.ndarray:
    """Homogeneous 3-vector lift of native point(s)."""
    p = np.asarray(p, dtype=float)
    if S.kind == "euclidean":
        return np.concatenate([p, np.ones(p.shape[:-1] + (1,))], axis=-1)
    if S.kind == "sphere":
        return p
    if S.kind == "hyperbolic":
        r2 = np.sum(p * p, axis=-1, keepdims=True)
        d = 1.0 - r2
        return np.concatenate([2 * p / d, (1 + r2) / d], axis=-1)
    raise UnsupportedKindError("general-chart surfaces have no projective model")


def normalize_model(S: Surface, X, near=None) -> np.ndarray:
    """Scale a homogeneous vector onto the model surface.

    On the sphere the sign is chosen to be on the same side as ``near``.
    """
    X = np.asarray(X, dtype=float)
    if S.kind == "euclidean":
        if np.any(np.abs(X[..., 2]) < 1e-300):
            raise DomainError("point at infinity")
        return X / X[..., 2:3]
    if S.kind == "sphere":
        Y = X / np.linalg.norm(X, axis=-1, keepdims=True)
        if near is not None:
            sign = np.sign(np.sum(Y * np.asarray(near), axis=-1, keepdims=True))
            Y = Y * np.where(sign == 0, 1.0, sign)
        return Y
    if S.kind == "hyperbolic":
        q = -(X[..., 0] ** 2 + X[..., 1] ** 2 - X[..., 2] ** 2)
        if np.any(q <= 0):
            raise DomainError("homogeneous vector is not a point of the hyperbolic plane")
        Y = X / np.sqrt(q)[..., None]
        return Y * np.sign(Y[..., 2:3])
    raise UnsupportedKindError(S.kind)


def from_model(S: Surface, X) -> np.ndarray:
    """Native coordinates of a (not necessarily normalized) model vector."""
    Y = normalize_model(S, X)
    if S.kind == "euclidean":
        return Y[..., :2]
    if S.kind == "sphere":
        return Y
    return Y[..., :2] / (1.0 + Y[..., 2:3])


def push_tangent(S: Surface, p, v) -> np.ndarray:
    """Model-space image of a native tangent vector ``v`` at ``p``."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if S.kind == "euclidean":
        return np.concatenate([v, np.zeros(v.shape[:-1] + (1,))], axis=-1)
    if S.kind == "sphere":
        return v
    if S.kind == "hyperbolic":
        x, y = p[..., 0], p[..., 1]
        d = 1.0 - x * x - y * y
        vx, vy = v[..., 0], v[..., 1]
        X1 = (2 / d + 4 * x * x / d**2) * vx + 4 * x * y / d**2 * vy
        X2 = 4 * x * y / d**2 * vx + (2 / d + 4 * y * y / d**2) * vy
        X3 = 4 * (x * vx + y * vy) / d**2
        return np.stack([X1, X2, X3], axis=-1)
    raise UnsupportedKindError(S.kind)


def pull_tangent(S: Surface, X, V) -> np.ndarray:
    """Native tangent vector of a model tangent ``V`` at normalized model point ``X``."""
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    if S.kind == "euclidean":
        return V[..., :2]
    if S.kind == "sphere":
        return V
    if S.kind == "hyperbolic":
        den = 1.0 + X[..., 2:3]
        return V[..., :2] / den - X[..., :2] * V[..., 2:3] / den**2
    raise UnsupportedKindError(S.kind)


def model_inner(S: Surface, U, V) -> np.ndarray:
    return np.einsum("...i,ij,...j->...", np.asarray(U, float), S.form, np.asarray(V, float))


def model_distance(S: Surface, X, Y) -> np.ndarray:
    """Distance between normalized model points, accurate for small separations."""
    D = np.asarray(X, dtype=float) - np.asarray(Y, dtype=float)
    if S.kind == "euclidean":
        return np.hypot(D[..., 0], D[..., 1])
    if S.kind == "sphere":
        return 2.0 * np.arcsin(np.minimum(1.0, np.linalg.norm(D, axis=-1) / 2.0))
    q = np.maximum(0.0, D[..., 0] ** 2 + D[..., 1] ** 2 - D[..., 2] ** 2)
    return 2.0 * np.arcsinh(np.sqrt(q) / 2.0)


def model_flow(S: Surface, X, V, s):
    """Closed-form geodesic flow in the model from unit data ``(X, V)``."""
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    s = np.asarray(s, dtype=float)[..., None]
    if S.kind == "euclidean":
        return X + s * V, V + 0 * s
    if S.kind == "sphere":
        c, sn = np.cos(s), np.sin(s)
        return X * c + V * sn, -X * sn + V * c
    c, sn = np.cosh(s), np.sinh(s)
    return X * c + V * sn, X * sn + V * c


def model_normal(S: Surface, X, T) -> np.ndarray:
    """Unit model tangent at ``X`` orthogonal to ``T`` and positively oriented."""
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    if S.kind == "euclidean":
        N = np.stack([-T[..., 1], T[..., 0], np.zeros(T.shape[:-1])], axis=-1)
    else:
        # form-orthogonal to X and T: the form applied to the cross product.
        N = np.cross(X, T) @ S.form
    return N / np.sqrt(model_inner(S, N, N))[..., None]


# --- general-chart geodesic integrator -----------------------------------------


def _check_chart(S: Surface, p: np.ndarray) -> None:
    if not np.all(np.isfinite(p)):
        raise DomainError("geodesic left the chart (non-finite state)")
    if np.any(np.linalg.norm(p, axis=-1) > S.validity_radius):
        raise DomainError("geodesic left the chart validity radius")


def _rk4_geodesics(S: Surface, p, v, s, n_steps: int | None = None):
    """Integrate the geodesic equation for a batch of initial data over arclength ``s``."""
    p = np.array(p, dtype=float)
    v = np.array(v, dtype=float)
    s = np.asarray(s, dtype=float)
    if n_steps is None:
        n_steps = max(1, int(math.ceil(1.0 / S.integrator_step)))
    h = (s / n_steps)[..., None]

    def rhs(q, w):
        G = S.christoffel(q)
        return w, -np.einsum("...ijk,...j,...k->...i", G, w, w)

    for _ in range(n_steps):
        k1p, k1v = rhs(p, v)
        k2p, k2v = rhs(p + 0.5 * h * k1p, v + 0.5 * h * k1v)
        k3p, k3v = rhs(p + 0.5 * h * k2p, v + 0.5 * h * k2v)
        k4p, k4v = rhs(p + h * k3p, v + h * k3v)
        p = p + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    _check_chart(S, p)
    return p, v


def flow_points(S: Surface, p, v, s) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized geodesic flow on native coordinates (batch form of :func:`geodesic_flow`)."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if S.kind == "general-chart":
        return _rk4_geodesics(S, p, v, s)
    X, V = model_flow(S, to_model(S, p), push_tangent(S, p, v), s)
    return from_model(S, X), pull_tangent(S, X, V)


def geodesic_flow(S: Surface, u: UnitTangent, s: float) -> UnitTangent:
    """Point and unit tangent after flowing arclength ``s`` along the geodesic of ``u``."""
    p, v = flow_points(S, u.point, u.vector, float(s))
    return UnitTangent(p, v)


def exp_map(S: Surface, p, w) -> np.ndarray:
    """Exponential map at ``p`` of tangent vector(s) ``w``."""
    w = np.asarray(w, dtype=float)
    r = norm(S, p, w)
    safe = np.where(r == 0, 1.0, r)
    q, _ = flow_points(S, np.broadcast_to(p, w.shape), w / safe[..., None], r)
    return q


def _shoot(S: Surface, P, Q, max_iter: int = 40, tol: float = 1e-12) -> np.ndarray:
    """Initial vector ``w`` at ``P`` with ``exp_P(w) = Q`` (Newton on the shooting map)."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    w = Q - P
    if np.linalg.norm(w) == 0:
        return w
    h = 1e-7 * max(1.0, float(np.linalg.norm(w)))
    for _ in range(max_iter):
        batch = np.stack([w, w + [h, 0.0], w + [0.0, h]])
        out = exp_map(S, P, batch)
        F = out[0] - Q
        if np.linalg.norm(F) < tol:
            return w
        J = np.stack([(out[1] - out[0]) / h, (out[2] - out[0]) / h], axis=1)
        w = w - np.linalg.solve(J, F)
    raise ConvergenceError("geodesic shooting did not converge")


def distance(S: Surface, P, Q) -> float:
    """Length of the minimizing geodesic segment between ``P`` and ``Q``."""
    if S.kind == "general-chart":
        return float(norm(S, P, _shoot(S, P, Q)))
    return float(model_distance(S, to_model(S, P), to_model(S, Q)))


# --- circle length functions ---------------------------------------------------


def psi(S: Surface, r) -> np.ndarray | float:
    """Circumference of a geodesic circle of radius ``r`` divided by ``2 pi``."""
    if S.kind == "euclidean":
        return r * 1.0
    if S.kind == "sphere":
        return np.sin(r)
    if S.kind == "hyperbolic":
        return np.sinh(r)
    raise UnsupportedKindError("psi is closed-form only on constant curvature; use circle_circumference")


def _angular_derivative(S: Surface, x, v, r, phis, h: float = 1e-4) -> np.ndarray:
    """``|d exp_x(r v(phi)) / d phi|`` at each angle in ``phis`` by central differences."""
    e1, e2 = orthonormal_frame(S, x, v)
    phis = np.asarray(phis, dtype=float)
    angles = np.concatenate([phis + h, phis - h, phis])
    dirs = np.cos(angles)[:, None] * e1 + np.sin(angles)[:, None] * e2
    base = np.broadcast_to(np.asarray(x, dtype=float), dirs.shape)
    pts, _ = flow_points(S, base, dirs, np.full(len(angles), float(r)))
    n = len(phis)
    d = (pts[:n] - pts[n : 2 * n]) / (2 * h)
    return norm(S, pts[2 * n :], d)


def big_psi(S: Surface, x, v, r: float) -> float:
    """``r^-1 |d exp / d phi (r v)|`` by central differences of the geodesic flow."""
    if S.kind == "general-chart" and r < 10 * S.integrator_step:
        raise IllConditionedError("radius below 10 integrator steps")
    if r <= 0:
        raise IllConditionedError("radius must be positive")
    return float(_angular_derivative(S, x, v, r, [0.0])[0]) / r


def circle_circumference(S: Surface, center, r: float, n: int = 128) -> float:
    """Length of the geodesic circle of radius ``r`` (trapezoid rule over the angle)."""
    center = np.asarray(center, dtype=float)
    if S.kind == "sphere":
        seed = np.array([1.0, 0.0, 0.0]) if abs(center[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        v = seed - np.dot(seed, center) * center
    else:
        v = np.array([1.0, 0.0])
    phis = 2 * np.pi * np.arange(n) / n
    return float(np.sum(_angular_derivative(S, center, v, r, phis)) * 2 * np.pi / n)


# --- normal coordinates ---------------------------------------------------------


@dataclass(frozen=True)
class Chart:
    """Normal (exponential) coordinates centered at ``origin`` with x-axis along ``frame[0]``."""

    surface: Surface
    origin: np.ndarray
    frame: tuple[np.ndarray, np.ndarray]
    radius: float = math.inf
    _table: tuple | None = field(default=None, repr=False, compare=False)

    def from_chart(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        w = xi[..., :1] * self.frame[0] + xi[..., 1:2] * self.frame[1]
        return exp_map(self.surface, self.origin, w)

    def to_chart(self, P) -> np.ndarray:
        S = self.surface
        P = np.asarray(P, dtype=float)
        if S.is_constant:
            X0 = to_model(S, self.origin)
            E = [push_tangent(S, self.origin, e) for e in self.frame]
            X = to_model(S, P)
            if S.kind == "euclidean":
                W = X - X0
            else:
                d = model_distance(S, X, X0)
                if S.kind == "sphere":
                    c, f = np.cos(d), np.where(d == 0, 1.0, d / np.where(d == 0, 1, np.sin(d)))
                else:
                    c, f = np.cosh(d), np.where(d == 0, 1.0, d / np.where(d == 0, 1, np.sinh(d)))
                W = (X - c[..., None] * X0) * f[..., None]
            return np.stack([model_inner(S, W, E[0]), model_inner(S, W, E[1])], axis=-1)
        return self._to_chart_general(P)

    def _to_chart_general(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        if P.ndim > 1:
            return np.array([self._to_chart_general(q) for q in P])
        xis, pts = self._table
        xi = xis[np.argmin(np.linalg.norm(pts - P, axis=-1))].copy()
        h = 1e-7
        for _ in range(40):
            batch = np.stack([xi, xi + [h, 0.0], xi + [0.0, h]])
            out = self.from_chart(batch)
            F = out[0] - P
            if np.linalg.norm(F) < 1e-12:
                return xi
            J = np.stack([(out[1] - out[0]) / h, (out[2] - out[0]) / h], axis=1)
            xi = xi - np.linalg.solve(J, F)
        raise ConvergenceError("normal-chart inversion did not converge")

    def metric(self, xi, h: float = 1e-5) -> np.ndarray:
        """Metric pulled back to chart coordinates at ``xi``."""
        xi = np.asarray(xi, dtype=float)
        e = np.eye(2) * h
        cols = [(self.from_chart(xi + e[k]) - self.from_chart(xi - e[k])) / (2 * h) for k in range(2)]
        J = np.stack(cols, axis=-1)
        S = self.surface
        if S.kind == "sphere":
            return J.T @ J
        return J.T @ metric_tensor(S, self.from_chart(xi)) @ J


def normal_chart(S: Surface, O, axis: UnitTangent | np.ndarray, radius: float | None = None) -> Chart:
    """Normal coordinates at ``O`` whose x-axis follows ``axis``."""
    v = axis.vector if isinstance(axis, UnitTangent) else np.asarray(axis, dtype=float)
    O = np.asarray(O, dtype=float)
    e1, e2 = orthonormal_frame(S, O, v)
    rad = S.validity_radius if radius is None else radius
    chart = Chart(S, _as_array(O), (_as_array(e1), _as_array(e2)), rad)
    if S.kind == "general-chart":
        rmax = min(rad, 0.5)
        rs = np.linspace(0.0, rmax, 6)[1:]
        th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        xis = np.array([(0.0, 0.0)] + [(r * math.cos(t), r * math.sin(t)) for r in rs for t in th])
        pts = chart.from_chart(xis)
        object.__setattr__(chart, "_table", (xis, pts))
    return chart
