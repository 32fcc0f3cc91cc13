"""Witness paths and non-manifold certificates.

A configuration ``x`` of a variety of local dimension ``k`` cannot be a
manifold point if ``k + 1`` analytic curves through ``x`` inside the
variety have linearly independent velocities at ``x``. For the Delta the
curves are built in pose space: a platform point ``p`` and three arm
angles, where ``p`` must stay on the three spheres of radius ``b`` around
the arm tips ``m_i(psi_i)``. At the catalog points two or three of those
spheres coincide, which leaves room for four independent motions.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .catalog import excluded_case
from .errors import (
    CertificateFailure,
    CertificateUnavailable,
    GeometryError,
    NotASingularityError,
    PathInvalidError,
)
from .geometry import (
    Sphere,
    _perpendicular,
    circle_sphere_branch,
    corollary_path,
    equal_radius_pencil,
    rotate_about_axis,
)
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    central_difference_tangent,
    numerical_rank,
    rank_from_singular_values,
    singular_values,
)
from .mechanism import (
    ORIGINAL,
    TILDE,
    VARIABLE_NAMES,
    FormalManipulator,
    ParameterSet,
    PlatformPose,
    arm_center,
    arm_center_velocity,
    as_configuration,
    build_crank_slider,
    build_delta,
    from_tilde,
    lift_pose,
    pose_of,
    to_tilde,
)

ALL_THREE = "all-three"
TWO_OF_THREE = "two-of-three"
LOCAL_DIMENSION = 3
DEFAULT_SAMPLES = 41
DEFAULT_HALF_WIDTH = 0.05
# A path that stops existing inside the sampling window is resampled on a
# halved window, as long as the window stays this many difference steps wide.
MIN_WINDOW_STEPS = 4


@dataclass(frozen=True)
class CoincidencePattern:
    kind: str
    pair: tuple  # coincident limbs (1-based); for all-three the pair whose tip velocity is tangent
    other: int
    angle: float  # common arm angle of the coincident limbs
    center: np.ndarray  # common arm tip


@dataclass
class WitnessPath:
    label: str
    base_point: np.ndarray  # tilde coordinates
    t0: float
    half_width: float
    evaluate: Callable[[float], np.ndarray]
    recipe: str

    def sample(self, count: int = DEFAULT_SAMPLES):
        ts = self.t0 + np.linspace(-self.half_width, self.half_width, count)
        return ts, np.array([self.evaluate(t) for t in ts])


@dataclass
class NonManifoldCertificate:
    point: np.ndarray
    tangents: np.ndarray  # one row per path
    tangent_singular_values: np.ndarray
    span_rank: int
    max_residual: float
    local_dimension: int
    path_labels: tuple = ()
    recipes: tuple = ()
    pattern: str = ""
    label: str = ""
    path_residuals: tuple = field(default=())
    half_widths: tuple = field(default=())

    @property
    def valid(self) -> bool:
        return self.span_rank > self.local_dimension

    @property
    def sigma_ratio(self) -> float:
        """``sigma_min / sigma_max`` of the tangent matrix."""
        sv = self.tangent_singular_values
        return float(sv[-1] / sv[0]) if sv.size and sv[0] > 0 else 0.0

    def as_dict(self):
        return {
            "label": self.label,
            "pattern": self.pattern,
            "point": [float(v) for v in self.point],
            "paths": list(self.path_labels),
            "recipes": list(self.recipes),
            "tangents": [[float(v) for v in row] for row in self.tangents],
            "singular_values": [float(v) for v in self.tangent_singular_values],
            "span_rank": self.span_rank,
            "local_dimension": self.local_dimension,
            "max_residual": self.max_residual,
            "path_residuals": [float(v) for v in self.path_residuals],
            "half_widths": [float(v) for v in self.half_widths],
            "verdict": "non-manifold" if self.valid else "inconclusive",
        }


def _tilde_point(point, tilde):
    point = as_configuration(point)
    return point if tilde else to_tilde(point)


def coincidence_pattern(point, params: ParameterSet, tol: ToleranceConfig = DEFAULT_TOL,
                        tilde: bool = False) -> CoincidencePattern:
    """Which arm tips ``m_i(psi_i)`` coincide at ``point``."""
    xt = _tilde_point(point, tilde)
    pose = pose_of(params, xt, tol)
    tips = [arm_center(params, i + 1, pose.psi[i]) for i in range(3)]
    thr = 1e-8 * params.a
    close = {(i, j): np.linalg.norm(tips[i - 1] - tips[j - 1]) < thr for i, j in ((1, 2), (1, 3), (2, 3))}
    n_close = sum(close.values())
    if n_close == 3:
        m0 = tips[0]
        phi = pose.psi[0]
        w = pose.p - m0
        dots = []
        for limb in (1, 2, 3):
            vel = arm_center_velocity(params, limb, phi)
            dots.append(abs(w @ vel) / (np.linalg.norm(w) * np.linalg.norm(vel)))
        order = np.argsort(dots)
        if dots[order[1]] > 1e-8:
            raise NotASingularityError("all arm tips coincide but no two tip velocities are tangent to the sphere")
        pair = tuple(sorted(int(k) + 1 for k in order[:2]))
        return CoincidencePattern(ALL_THREE, pair, int(order[2]) + 1, phi, m0)
    if n_close == 1:
        (i, j), = [k for k, v in close.items() if v]
        k = ({1, 2, 3} - {i, j}).pop()
        return CoincidencePattern(TWO_OF_THREE, (i, j), k, pose.psi[i - 1], tips[i - 1])
    raise NotASingularityError("no coincident arm tips at this configuration")


def _make_lift(params, pose):
    base = list(pose.psi)

    def lift(p, **angles):
        psi = list(base)
        for key, value in angles.items():
            psi[int(key[1:]) - 1] = value
        return lift_pose(params, PlatformPose(p, tuple(psi)))

    return lift


def _sphere_of(params, limb):
    return lambda t: Sphere(arm_center(params, limb, t), params.b)


def witness_paths(point, params: ParameterSet, tol: ToleranceConfig = DEFAULT_TOL, tilde: bool = False,
                  half_width: float = DEFAULT_HALF_WIDTH) -> list:
    """Four analytic paths inside the tilde variety through ``point``."""
    xt = _tilde_point(point, tilde)
    pattern = coincidence_pattern(xt, params, tol, tilde=True)
    if pattern.kind == TWO_OF_THREE and excluded_case(params):
        raise CertificateUnavailable(
            "b is at the tangential value (3d^2 - a^2)/sqrt(a^2 + 3d^2): the circle/sphere intersections degenerate"
        )
    pose = pose_of(params, xt, tol)
    lift = _make_lift(params, pose)
    p = pose.p
    b = params.b
    i, j = pattern.pair
    k = pattern.other
    phi = pattern.angle
    phi_k = pose.psi[k - 1]
    tip = _sphere_of(params, i)
    mi = lambda t: arm_center(params, i, t)
    mj = lambda t: arm_center(params, j, t)
    vij = lambda t: arm_center_velocity(params, i, t) - arm_center_velocity(params, j, t)
    sk = _sphere_of(params, k)
    a_i, a_j, a_k = f"a{i}", f"a{j}", f"a{k}"

    def path(label, t0, fn, recipe):
        return WitnessPath(label, xt, t0, half_width, fn, recipe)

    if pattern.kind == TWO_OF_THREE:
        pencil = equal_radius_pencil(mi, mj, b, t_star=phi, velocity=vij)
        fixed_k = sk(phi_k)

        def g1(t):
            return lift(circle_sphere_branch(pencil, fixed_k, p, t), **{a_i: t, a_j: t})

        def g2(t):
            return lift(circle_sphere_branch(pencil, sk(t), p, phi), **{a_k: t})

        axis_origin = mi(phi)
        axis = arm_center(params, k, phi_k) - axis_origin

        def g3(t):
            return lift(rotate_about_axis(p, axis_origin, axis, t))

        mover, anchor = _tangent_limb(params, pattern, p)
        m_mov = lambda t: arm_center(params, mover, t)
        anchor_tip = arm_center(params, anchor, phi)
        pencil2 = equal_radius_pencil(m_mov, lambda t: anchor_tip, b, t_star=phi,
                                      velocity=lambda t: arm_center_velocity(params, mover, t))

        def g4(t):
            return lift(circle_sphere_branch(pencil2, fixed_k, p, t), **{f"a{mover}": t})

        return [
            path("gamma1", phi, g1, f"pencil(S{i}(t),S{j}(t)) ∩ S{k}(fixed)"),
            path("gamma2", phi_k, g2, f"pencil(S{i},S{j})(fixed) ∩ S{k}(t)"),
            path("gamma3", 0.0, g3, f"rotation about m{i}-m{k} axis"),
            path("gamma4", phi, g4, f"pencil(S{mover}(t),S{anchor}(fixed)) ∩ S{k}(fixed)"),
        ]

    m0 = pattern.center
    radial = (p - m0) / np.linalg.norm(p - m0)
    e1 = _perpendicular(radial)
    e2 = np.cross(radial, e1)
    pencil = equal_radius_pencil(mi, mj, b, t_star=phi, velocity=vij)
    fixed_k = sk(phi)
    common = Sphere(m0, b)
    delta4 = corollary_path(common, tip, p, t0=phi)

    def g1(t):
        return lift(rotate_about_axis(p, m0, e1, t))

    def g2(t):
        return lift(rotate_about_axis(p, m0, e2, t))

    def g3(t):
        return lift(circle_sphere_branch(pencil, fixed_k, p, t, sphere_of_t=lambda s: fixed_k), **{a_i: t, a_j: t})

    def g4(t):
        return lift(delta4(t), **{a_i: t})

    return [
        path("gamma1", 0.0, g1, "rotation on the common sphere (axis 1)"),
        path("gamma2", 0.0, g2, "rotation on the common sphere (axis 2)"),
        path("gamma3", phi, g3, f"pencil(S{i}(t),S{j}(t)) ∩ S{k}(fixed), coincident limit"),
        path("gamma4", phi, g4, f"S{i}(t) ∩ common sphere, plane reduction"),
    ]


def _tangent_limb(params, pattern, p):
    """Limb of the coincident pair whose tip velocity is perpendicular to ``p - m``."""
    w = p - pattern.center
    best = None
    for limb in pattern.pair:
        vel = arm_center_velocity(params, limb, pattern.angle)
        c = abs(w @ vel) / (np.linalg.norm(w) * np.linalg.norm(vel))
        if best is None or c < best[0]:
            best = (c, limb)
    mover = best[1]
    anchor = pattern.pair[0] if mover == pattern.pair[1] else pattern.pair[1]
    return mover, anchor


def _path_residual(system, path, samples, min_width):
    """Max residual over the samples, shrinking the window if the path ends inside it."""
    while path.half_width >= min_width:
        try:
            ts, xs = path.sample(samples)
        except GeometryError:
            path.half_width /= 2
            continue
        return float(max(np.max(np.abs(system.evaluate(x))) for x in xs))
    raise PathInvalidError(f"{path.label} is not defined on any window of half-width >= {min_width:.3g}")


def certify(m: FormalManipulator, point, tol: ToleranceConfig = DEFAULT_TOL, samples: int = DEFAULT_SAMPLES,
            half_width: float = DEFAULT_HALF_WIDTH, label: str = "") -> NonManifoldCertificate:
    """Non-manifold certificate for a Delta configuration.

    ``point`` is in the coordinates of ``m`` (original or tilde). Raises
    :class:`CertificateFailure` if the four tangents do not span four
    dimensions and :class:`PathInvalidError` if a path leaves the variety.
    """
    params = m.params
    xt = _tilde_point(point, m.variant == TILDE)
    system = build_delta(params, TILDE).constraints
    paths = witness_paths(xt, params, tol, tilde=True, half_width=half_width)
    bound = 1e-8 * system.scale
    residuals = []
    tangents = []
    for path in paths:
        start = path.evaluate(path.t0)
        if np.max(np.abs(start - xt)) > 1e-9:
            raise PathInvalidError(f"{path.label} does not pass through the point (off by {np.max(np.abs(start - xt)):.3e})")
        res = _path_residual(system, path, samples, MIN_WINDOW_STEPS * tol.fd_step)
        residuals.append(res)
        if res > bound:
            raise PathInvalidError(f"{path.label} leaves the variety (residual {res:.3e} > {bound:.3e})")
        tangents.append(central_difference_tangent(path.evaluate, path.t0, tol))
    T = np.array(tangents)
    sv = singular_values(T.T)
    cert = NonManifoldCertificate(
        point=from_tilde(xt) if m.variant == ORIGINAL else xt,
        tangents=T,
        tangent_singular_values=sv,
        span_rank=rank_from_singular_values(sv, tol),
        max_residual=max(residuals),
        local_dimension=LOCAL_DIMENSION,
        path_labels=tuple(p.label for p in paths),
        recipes=tuple(p.recipe for p in paths),
        pattern=coincidence_pattern(xt, params, tol, tilde=True).kind,
        label=label,
        path_residuals=tuple(residuals),
        half_widths=tuple(p.half_width for p in paths),
    )
    if not cert.valid:
        raise CertificateFailure(f"tangent span is {cert.span_rank}, need more than {LOCAL_DIMENSION}", cert)
    return cert


def path_samples(path: WitnessPath, system, samples: int = DEFAULT_SAMPLES):
    """Rows ``(t, x_1..x_15, residual_max)`` along a path."""
    ts, xs = path.sample(samples)
    return [(float(t), x, float(np.max(np.abs(system.evaluate(x))))) for t, x in zip(ts, xs)]


def path_samples_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", *VARIABLE_NAMES, "residual_max"])
    for t, x, r in rows:
        writer.writerow([f"{t:.15g}", *[f"{v:.15g}" for v in x], f"{r:.15g}"])
    return buf.getvalue()


# ---------------------------------------------------------------- crank slider

def crank_slider_paths(l: float):
    """The two circular motions through the folded configuration ``(0, l, 0)``."""
    return [
        lambda t: np.array([l * np.cos(t), l * np.sin(t), 2 * l * np.cos(t)]),
        lambda t: np.array([l * np.cos(t), l * np.sin(t), 0.0]),
    ]


def crank_slider_witness(l1: float, l2: float = None, tol: ToleranceConfig = DEFAULT_TOL,
                         samples: int = DEFAULT_SAMPLES, half_width: float = DEFAULT_HALF_WIDTH):
    """Certificate at ``(0, l, 0)`` for the equal-link crank slider.

    Tangents are taken at ``t0 = pi/2`` where both paths pass through the
    point.
    """
    if l2 is None:
        l2 = l1
    m = build_crank_slider(l1, l2)
    if abs(l1 - l2) > 1e-12 * max(l1, l2):
        raise NotASingularityError("unequal link lengths: the crank slider has no configuration-space singularity")
    l = float(l1)
    t0 = np.pi / 2
    base = np.array([0.0, l, 0.0])
    residuals = []
    tangents = []
    for fn in crank_slider_paths(l):
        if np.max(np.abs(fn(t0) - base)) > 1e-12 * l:
            raise PathInvalidError("path misses the folded configuration")
        ts = t0 + np.linspace(-half_width, half_width, samples)
        residuals.append(max(float(np.max(np.abs(m.constraints.evaluate(fn(t))))) for t in ts))
        tangents.append(central_difference_tangent(fn, t0, tol))
    T = np.array(tangents)
    sv = singular_values(T.T)
    cert = NonManifoldCertificate(
        point=base, tangents=T, tangent_singular_values=sv, span_rank=rank_from_singular_values(sv, tol),
        max_residual=max(residuals), local_dimension=1, path_labels=("gamma1", "gamma2"),
        recipes=("(l cos t, l sin t, 2 l cos t)", "(l cos t, l sin t, 0)"), pattern="folded",
        label="crank-slider", path_residuals=tuple(residuals),
    )
    cert.jacobian_rank = numerical_rank(m.constraints.jacobian(base), tol)
    if not cert.valid:
        raise CertificateFailure("crank-slider tangents are dependent", cert)
    return cert
