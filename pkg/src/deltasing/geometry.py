"""Sphere/circle intersection branches with analytic continuation.

The witness paths follow intersection points of spheres whose centers move
with an arm angle. Two situations need care:

* two equal spheres that coincide at some instant ``t_star``; their
  intersection circle still has a well-defined limit there, with the plane
  normal given by the direction of the center velocity;
* two coplanar circles that coincide at an instant; their intersection
  points tend to the two points perpendicular to the center velocity.

Radii are carried together with a *gap* ``base_radius**2 - radius**2`` that is
computed without cancellation, so branch points stay accurate very close
to the coincidence instant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    ContinuationError,
    DegenerateIntersectionError,
    EmptyIntersectionError,
    InputError,
    PreconditionError,
)

# Relative threshold below which a chord between two centers is treated as
# coincident and the analytic limit is used instead.
COINCIDENCE_REL = 1e-7
# Step for differentiating center paths inside limit formulas.
LIMIT_FD_STEP = 1e-6


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise InputError(f"sphere radius must be positive, got {self.radius}")

    def residual(self, x) -> float:
        v = np.asarray(x, dtype=float) - self.center
        return float(v @ v - self.radius**2)


@dataclass(frozen=True)
class PlanarFrame:
    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in ("origin", "u", "v"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if abs(np.linalg.norm(self.u) - 1) > 1e-12 or abs(np.linalg.norm(self.v) - 1) > 1e-12:
            raise InputError("frame axes must be unit vectors")
        if abs(self.u @ self.v) > 1e-12:
            raise InputError("frame axes must be orthogonal")

    @property
    def normal(self) -> np.ndarray:
        return np.cross(self.u, self.v)

    def to_plane(self, x) -> np.ndarray:
        w = np.asarray(x, dtype=float) - self.origin
        return np.array([w @ self.u, w @ self.v])

    def from_plane(self, xy) -> np.ndarray:
        return self.origin + xy[0] * self.u + xy[1] * self.v


def _unit(v):
    n = np.linalg.norm(v)
    return v / n


@dataclass
class AnalyticCircleFamily:
    """Circle ``{x : |x - M(t)| = r(t), (x - M(t)) . n(t) = 0}``.

    ``gap(t)`` is ``base_radius**2 - r(t)**2``.
    """

    center: Callable[[float], np.ndarray]
    normal: Callable[[float], np.ndarray]
    gap: Callable[[float], float]
    base_radius: float
    t_star: Optional[float] = None
    interval: tuple = field(default=(-np.inf, np.inf))

    def radius_sq(self, t) -> float:
        return self.base_radius**2 - self.gap(t)

    def radius(self, t) -> float:
        r2 = self.radius_sq(t)
        if r2 < 0:
            raise EmptyIntersectionError(f"circle family has no real points at t={t}")
        return float(np.sqrt(r2))

    def point(self, t, angle) -> np.ndarray:
        """Point of the circle at polar ``angle`` in an arbitrary in-plane frame."""
        n = self.normal(t)
        e1 = _perpendicular(n)
        e2 = np.cross(n, e1)
        r = self.radius(t)
        return self.center(t) + r * (np.cos(angle) * e1 + np.sin(angle) * e2)


def _perpendicular(n):
    k = int(np.argmin(np.abs(n)))
    e = np.zeros(3)
    e[k] = 1.0
    return _unit(e - (e @ n) * n)


def equal_radius_pencil(c1, c2, b: float, t_star: Optional[float] = None,
                        velocity: Optional[Callable[[float], np.ndarray]] = None) -> AnalyticCircleFamily:
    """Intersection circle of the spheres ``(c1(t), b)`` and ``(c2(t), b)``.

    If the centers meet at ``t_star`` the normal is continued through the
    coincidence: ``sign(t - t_star) * Delta / |Delta|`` away from it and the
    direction of ``Delta'`` at it, ``Delta = c1 - c2``. ``velocity`` may
    supply ``Delta'`` exactly; otherwise it is differenced.
    """
    if not b > 0:
        raise InputError("radius must be positive")

    def delta(t):
        return np.asarray(c1(t), dtype=float) - np.asarray(c2(t), dtype=float)

    def center(t):
        return 0.5 * (np.asarray(c1(t), dtype=float) + np.asarray(c2(t), dtype=float))

    def gap(t):
        dl = delta(t)
        g = 0.25 * float(dl @ dl)
        if g > b * b:
            raise EmptyIntersectionError(
                f"sphere centers {np.sqrt(4 * g):.6g} apart exceed twice the radius {b}"
            )
        return g

    def normal(t):
        dl = delta(t)
        nrm = np.linalg.norm(dl)
        if nrm >= COINCIDENCE_REL * b:
            n = dl / nrm
            if t_star is not None and t < t_star:
                n = -n
            return n
        if velocity is not None:
            ddl = np.asarray(velocity(t), dtype=float)
        else:
            h = LIMIT_FD_STEP
            ddl = (delta(t + h) - delta(t - h)) / (2 * h)
        dn = np.linalg.norm(ddl)
        if dn < COINCIDENCE_REL:
            raise ContinuationError(f"centers coincide to second order at t={t}; no limit normal")
        return ddl / dn

    return AnalyticCircleFamily(center=center, normal=normal, gap=gap, base_radius=b, t_star=t_star)


def fixed_circle(center, normal, radius) -> AnalyticCircleFamily:
    center = np.asarray(center, dtype=float)
    normal = _unit(np.asarray(normal, dtype=float))
    return AnalyticCircleFamily(
        center=lambda t: center, normal=lambda t: normal, gap=lambda t: 0.0, base_radius=float(radius)
    )


def _two_circle_points(r0_sq, P, gap, tol_scale):
    """Intersections of ``|x| = r0`` and ``|x - P| = r`` in a 2-D frame.

    ``gap = r0**2 - r**2``. Returns ``(l, h)``: the foot along ``P/|P|`` and
    the half-chord length.
    """
    D = float(np.linalg.norm(P))
    l = (gap + D * D) / (2.0 * D)
    h_sq = r0_sq - l * l
    if h_sq < -1e-12 * tol_scale:
        raise EmptyIntersectionError(
            f"circles do not meet (center distance {D:.6g}, foot {l:.6g}, r0^2 {r0_sq:.6g})"
        )
    return l, float(np.sqrt(max(h_sq, 0.0)))


def circle_circle_branch(r0: float, center, radius=None, branch: int = +1, t: float = 0.0, gap=None):
    """Branch point of ``|x| = r0`` and ``|x - p(t)| = r(t)`` in the plane.

    Branch ``+1`` is ``(l/D) p + (sqrt(r0^2 - l^2)/D) (-p_y, p_x)``. If the
    moving circle coincides with the fixed one at ``t = 0`` the
    perpendicular is taken as ``p(t)/t``-oriented so each branch is analytic
    through 0, where it equals ``+-r0 (-p_y'(0), p_x'(0)) / |p'(0)|``.

    ``gap`` may be supplied as ``t -> r0**2 - r(t)**2`` to avoid cancellation;
    otherwise it is computed from ``radius``.
    """
    if branch not in (1, -1):
        raise InputError("branch must be +1 or -1")
    if gap is None:
        if radius is None:
            raise InputError("need radius or gap")

        def gap(s):
            return r0 * r0 - float(radius(s)) ** 2

    def p(s):
        return np.asarray(center(s), dtype=float)

    scale = r0 * r0
    degenerate_family = np.linalg.norm(p(0.0)) < COINCIDENCE_REL * r0 and abs(gap(0.0)) < 1e-12 * scale
    P = p(t)
    D = np.linalg.norm(P)
    if D < COINCIDENCE_REL * r0:
        if not degenerate_family and abs(gap(t)) > 1e-12 * scale:
            raise EmptyIntersectionError("concentric circles with different radii")
        h = LIMIT_FD_STEP
        dP = (p(t + h) - p(t - h)) / (2 * h)
        dn = np.linalg.norm(dP)
        if dn < COINCIDENCE_REL:
            raise DegenerateIntersectionError("coincident circles without motion: the intersection is a full circle")
        return branch * r0 * np.array([-dP[1], dP[0]]) / dn
    l, hc = _two_circle_points(r0 * r0, P, gap(t), scale)
    orient = -1.0 if (degenerate_family and t < 0) else 1.0
    perp = np.array([-P[1], P[0]]) / D
    return (l / D) * P + branch * orient * hc * perp


def coincident_limit(r0: float, dp0) -> tuple:
    """Closed-form limits ``b_+, b_-`` of the two branches at the coincidence."""
    dp0 = np.asarray(dp0, dtype=float)
    v = r0 / np.hypot(dp0[0], dp0[1]) * np.array([-dp0[1], dp0[0]])
    return v, -v


def circle_sphere_branch(family: AnalyticCircleFamily, sphere: Sphere, seed, t: float, sphere_of_t=None) -> np.ndarray:
    """Point of ``family(t)`` on ``sphere`` on the branch nearest ``seed``.

    The sphere is cut with the circle's plane; the resulting coplanar circle
    pair is solved in that plane. ``sphere_of_t`` (optional ``t -> Sphere``)
    is only used to differentiate the configuration when the two coplanar
    circles coincide at ``t``.
    """
    seed = np.asarray(seed, dtype=float)
    b = family.base_radius
    scale = b * b

    def planar(s, sph):
        M = family.center(s)
        n = family.normal(s)
        hc = float((sph.center - M) @ n)
        c_sec = sph.center - hc * n
        rho_sq = sph.radius**2 - hc * hc
        if rho_sq <= 0:
            raise EmptyIntersectionError("sphere does not reach the circle plane")
        # gap between the section circle and the family circle: rho^2 - r^2
        gap2 = (sph.radius**2 - b * b) - hc * hc + family.gap(s)
        return M, n, c_sec, rho_sq, gap2

    M, n, c_sec, rho_sq, gap2 = planar(t, sphere)
    P = M - c_sec
    D = float(np.linalg.norm(P))
    if D < COINCIDENCE_REL * b:
        if abs(gap2) > 1e-10 * scale:
            raise EmptyIntersectionError("concentric circles with different radii")
        h = LIMIT_FD_STEP
        sp = sphere_of_t if sphere_of_t is not None else (lambda s: sphere)
        Pp = planar(t + h, sp(t + h))
        Pm = planar(t - h, sp(t - h))
        dP = ((Pp[0] - Pp[2]) - (Pm[0] - Pm[2])) / (2 * h)
        dP = dP - (dP @ n) * n
        dn = np.linalg.norm(dP)
        if dn < COINCIDENCE_REL * max(b, 1.0):
            raise DegenerateIntersectionError("circle lies on the sphere: intersection is the full circle")
        perp = np.cross(n, dP / dn)
        candidates = [c_sec + np.sqrt(rho_sq) * perp, c_sec - np.sqrt(rho_sq) * perp]
    else:
        e = P / D
        l, hc = _two_circle_points(rho_sq, P, gap2, scale)
        if hc < 1e-7 * np.sqrt(rho_sq):
            raise DegenerateIntersectionError(
                "circle is tangent to the sphere; the branch is not transversal"
            )
        perp = np.cross(n, e)
        foot = c_sec + l * e
        candidates = [foot + hc * perp, foot - hc * perp]
    dists = [np.linalg.norm(c - seed) for c in candidates]
    return candidates[int(np.argmin(dists))]


@dataclass
class ReducedProblem:
    """Planar circle pair from :func:`plane_reduce` (degenerate instant at ``tau = 0``)."""

    r0: float
    center: Callable[[float], np.ndarray]
    gap: Callable[[float], float]
    t0: float

    def branch_point(self, tau, branch):
        return circle_circle_branch(self.r0, self.center, branch=branch, t=tau, gap=self.gap)


def plane_reduce(s1: Sphere, s2, p, t0: float = 0.0, perp_tol: float = 1e-8):
    """Reduce ``s1 ∩ s2(t)`` near a coincidence to a planar circle pair.

    ``s2(t0)`` must share the center of ``s1`` and ``p - center`` must be
    perpendicular to the center velocity. The plane through the common
    center spanned by ``p - center`` and the velocity carries both sections.
    """
    p = np.asarray(p, dtype=float)
    c = s1.center
    h = LIMIT_FD_STEP
    if np.linalg.norm(s2(t0).center - c) > COINCIDENCE_REL * s1.radius:
        raise PreconditionError("sphere centers do not coincide at the reference instant")
    vel = (s2(t0 + h).center - s2(t0 - h).center) / (2 * h)
    w = p - c
    if np.linalg.norm(vel) < COINCIDENCE_REL or np.linalg.norm(w) == 0:
        raise PreconditionError("center velocity or position vector vanishes")
    cosang = abs(w @ vel) / (np.linalg.norm(w) * np.linalg.norm(vel))
    if cosang > perp_tol:
        raise PreconditionError(f"point is not perpendicular to the center velocity (cos = {cosang:.3e})")
    u = _unit(w)
    v = _unit(vel - (vel @ u) * u)
    frame = PlanarFrame(origin=c, u=u, v=v)
    normal = frame.normal

    def center2d(tau):
        return frame.to_plane(s2(t0 + tau).center)

    def gap(tau):
        sph = s2(t0 + tau)
        off = float((sph.center - c) @ normal)
        return (s1.radius**2 - sph.radius**2) + off * off

    return frame, ReducedProblem(r0=s1.radius, center=center2d, gap=gap, t0=t0)


def corollary_path(s1: Sphere, s2, p, t0: float = 0.0):
    """Analytic path ``delta(t)`` on ``s1 ∩ s2(t)`` with ``delta(t0) = p``."""
    frame, reduced = plane_reduce(s1, s2, p, t0)
    target = frame.to_plane(p)
    limits = [reduced.branch_point(0.0, br) for br in (1, -1)]
    branch = (1, -1)[int(np.argmin([np.linalg.norm(l - target) for l in limits]))]

    def delta(t):
        return frame.from_plane(reduced.branch_point(t - t0, branch))

    return delta


def rotate_about_axis(x, origin, axis, angle) -> np.ndarray:
    """Rodrigues rotation of point ``x`` about the line ``origin + s*axis``."""
    k = _unit(np.asarray(axis, dtype=float))
    v = np.asarray(x, dtype=float) - origin
    return origin + v * np.cos(angle) + np.cross(k, v) * np.sin(angle) + k * (k @ v) * (1 - np.cos(angle))


def three_sphere_points(c1, c2, c3, r: float):
    """Common points of three spheres of equal radius ``r`` (0 or 2 points)."""
    c1, c2, c3 = (np.asarray(c, dtype=float) for c in (c1, c2, c3))
    ex = c2 - c1
    d12 = np.linalg.norm(ex)
    if d12 == 0:
        return []
    ex = ex / d12
    i = ex @ (c3 - c1)
    ey = c3 - c1 - i * ex
    ny = np.linalg.norm(ey)
    if ny == 0:
        return []
    ey = ey / ny
    ez = np.cross(ex, ey)
    j = ey @ (c3 - c1)
    x = d12 / 2.0
    y = (i * i + j * j - 2 * i * x) / (2 * j)
    z_sq = r * r - x * x - y * y
    if z_sq < 0:
        return []
    z = np.sqrt(z_sq)
    base = c1 + x * ex + y * ey
    return [base + z * ez, base - z * ez]
