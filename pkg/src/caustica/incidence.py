"""Ceva products with ``psi``-lengths, tangent incidence and the ``psi``-length coboundary.

Signed lengths: a foot ``B'`` on the geodesic ``CA`` is located by its signed
position along the line oriented from ``A`` to ``C``; the ratio
``psi(|AB'|) / psi(|B'C|)`` is then ``psi(x) / psi(c - x)`` with ``x`` the
position of ``B'`` and ``c`` that of ``C``.  It is positive exactly when the
foot lies on the side ``AC`` and negative beyond either endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import ConvexCurve, _model_intersection
from .errors import ConstructionError, DomainError
from .surface import (
    Surface,
    from_model,
    make_surface,
    model_distance,
    model_inner,
    normalize_model,
    psi,
    to_model,
)


def _unit(X):
    return X / np.linalg.norm(X)


def _position(S: Surface, X, V, P) -> float:
    """Signed distance of the model point ``P`` from ``X`` along the geodesic direction ``V``."""
    if S.kind == "euclidean":
        return float(model_inner(S, P - X, V))
    if S.kind == "sphere":
        return float(np.arctan2(model_inner(S, P, V), model_inner(S, P, X)))
    return float(np.arcsinh(model_inner(S, P, V)))


def _direction(S: Surface, X, P):
    v = P - X if S.kind == "euclidean" else P - S.curvature * model_inner(S, P, X) * X
    return v / np.sqrt(model_inner(S, v, v))


@dataclass(frozen=True)
class GeodesicTriangle:
    surface: Surface
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        S = make_surface(self.surface)
        object.__setattr__(self, "surface", S)
        pts = [normalize_model(S, to_model(S, np.asarray(P, dtype=float))) for P in (self.A, self.B, self.C)]
        for i in range(3):
            if model_distance(S, pts[i], pts[(i + 1) % 3]) < 1e-12:
                raise ConstructionError("triangle vertices must be distinct")
        if abs(np.linalg.det(np.stack([_unit(P) for P in pts]))) < 1e-12:
            raise ConstructionError("triangle vertices are collinear")

    def model(self):
        S = self.surface
        return [normalize_model(S, to_model(S, np.asarray(P, dtype=float))) for P in (self.A, self.B, self.C)]


def _psi_ratio(S: Surface, P, Q, F, tol: float) -> float:
    """``psi(|P F|) / psi(|F Q|)`` with signs, for ``F`` on the geodesic ``PQ``."""
    if abs(np.dot(np.cross(_unit(P), _unit(Q)), _unit(F))) > tol:
        raise DomainError("foot does not lie on the corresponding geodesic")
    V = _direction(S, P, Q)
    x, q = _position(S, P, V, F), _position(S, P, V, Q)
    return float(psi(S, x) / psi(S, q - x))


def ceva_product(S, T: GeodesicTriangle, A1, B1, C1, tol: float = 1e-9) -> float:
    """``psi(AB')/psi(B'C) * psi(CA')/psi(A'B) * psi(BC')/psi(C'A)`` with signed lengths."""
    S = make_surface(S)
    A, B, C = T.model()
    A1, B1, C1 = (normalize_model(S, to_model(S, np.asarray(P, dtype=float))) for P in (A1, B1, C1))
    return (_psi_ratio(S, A, C, B1, tol) * _psi_ratio(S, C, B, A1, tol) * _psi_ratio(S, B, A, C1, tol))


def cevian_feet(S, T: GeodesicTriangle, P) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Feet ``A', B', C'`` of the cevians through ``P`` (native points)."""
    S = make_surface(S)
    A, B, C = T.model()
    X = normalize_model(S, to_model(S, np.asarray(P, dtype=float)))
    feet = []
    for V, (E, F) in ((A, (B, C)), (B, (C, A)), (C, (A, B))):
        Y = np.cross(np.cross(V, X), np.cross(E, F))
        feet.append(from_model(S, normalize_model(S, Y, near=E + F if S.kind != "euclidean" else E)))
    return tuple(feet)


def concurrency_residual(planes) -> float:
    """``|det(n1, n2, n3)|`` of unit plane normals: zero iff the projective lines are concurrent."""
    n = np.stack([_unit(p) for p in planes])
    return float(abs(np.linalg.det(n)))


def _meet(S, n1, n2, near):
    X = np.cross(n1, n2)
    return normalize_model(S, X, near=near)


def tangent_incidence_check(curve: ConvexCurve, s_a: float, s_b: float, s_c: float) -> float:
    """Largest distance between the pairwise intersections of the three cevians.

    ``a, b, c`` are the tangent geodesics at ``A', B', C'``; ``A = b & c``,
    ``B = c & a``, ``C = a & b``; the cevians are ``AA'``, ``BB'``, ``CC'``.
    When an intersection is not a point of the surface (hyperbolic case) the
    projective concurrency residual of the three cevian planes is returned.
    """
    S = curve.surface
    if not curve.periodic:
        lo, hi = curve.s_range
        if not all(lo <= s <= hi for s in (s_a, s_b, s_c)):
            raise DomainError(f"parameters must lie in [{lo:.6g}, {hi:.6g}]")
    us = curve.u_of_s(np.array([s_a, s_b, s_c], dtype=float))
    if len(set(np.round(us, 12))) < 3:
        raise DomainError("tangency points must be distinct")
    P = [curve.model_point(np.array(u)) for u in us]
    t = [curve.tangent_plane(np.array(u)) for u in us]
    centre = P[0] + P[1] + P[2] if S.kind != "euclidean" else P[0]
    try:
        V = [_meet(S, t[(i + 1) % 3], t[(i + 2) % 3], centre) for i in range(3)]
        cev = [np.cross(V[i], P[i]) for i in range(3)]
        X = [_meet(S, cev[i], cev[(i + 1) % 3], centre) for i in range(3)]
    except DomainError:
        V = [np.cross(t[(i + 1) % 3], t[(i + 2) % 3]) for i in range(3)]
        return concurrency_residual([np.cross(V[i], P[i]) for i in range(3)])
    return float(max(model_distance(S, X[i], X[(i + 1) % 3]) for i in range(3)))


def coboundary_ratio(curve: ConvexCurve, s_A: float, s_B: float) -> tuple[float, float]:
    """``(psi(L_A) / psi(L_B), (kappa(B) / kappa(A))^(1/3))`` with ``L_A = |C A|``, ``L_B = |C B|``."""
    S = curve.surface
    uA, uB = curve.u_of_s(np.array([s_A, s_B], dtype=float))
    PA, C = _model_intersection(curve, uA, uB)
    PB = curve.model_point(uB)
    LA, LB = model_distance(S, C, PA), model_distance(S, C, PB)
    measured = float(psi(S, LA) / psi(S, LB))
    kA, kB = curve.kappa_u(np.array([uA, uB]))
    return measured, float(np.cbrt(kB / kA))
