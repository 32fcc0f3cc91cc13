"""Formal manipulators: constraint systems, actuators and forward maps.

Delta coordinates are always ordered::

    x1 y1 z1 x2 y2 z2 x3 y3 z3 ca1 sa1 ca2 sa2 ca3 sa3

and constraints are ordered ``s1 s2 s3 c1 c2 c3 l1 ... l6``.

With ``w(psi) = (d + a cos psi, 0, a sin psi)`` the limb offsets are
``v_i = (d + ca_i + x_i, y_i, z_i + sa_i)``, and::

    l1..l3 = v1 - A v2,    l4..l6 = v1 - A^-1 v3

where ``A`` is the rotation by 120 degrees about the z axis. The *tilde*
variant replaces ``A x2`` by ``x2`` and ``A^-1 x3`` by ``x3``; in those
coordinates every point has the form ``lift_pose(p, psi1, psi2, psi3)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConsistencyError, InputError, ParameterError
from .geometry import three_sphere_points
from .linalg import DEFAULT_TOL, ToleranceConfig

SQRT3 = np.sqrt(3.0)
ROT_A = np.array([[-0.5, -SQRT3 / 2, 0.0], [SQRT3 / 2, -0.5, 0.0], [0.0, 0.0, 1.0]])
ROT_A_INV = ROT_A.T

VARIABLE_NAMES = (
    "x1", "y1", "z1", "x2", "y2", "z2", "x3", "y3", "z3",
    "ca1", "sa1", "ca2", "sa2", "ca3", "sa3",
)
DELTA_CONSTRAINT_NAMES = (
    "s1", "s2", "s3", "c1", "c2", "c3", "l1", "l2", "l3", "l4", "l5", "l6",
)
ORIGINAL = "original"
TILDE = "tilde"


def block(i):
    """Slice of limb ``i``'s position block (``i`` in 0, 1, 2)."""
    return slice(3 * i, 3 * i + 3)


def actuator(i):
    """Indices ``(ca_i, sa_i)`` of limb ``i``'s actuator pair."""
    return (9 + 2 * i, 10 + 2 * i)


@dataclass(frozen=True)
class ParameterSet:
    a: float
    b: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "d"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite")
            if not value > 0:
                raise ParameterError(f"{name} > 0 violated ({name} = {value})")
        if not self.a > self.d:
            raise ParameterError(f"a > d violated (a = {self.a}, d = {self.d})")

    @property
    def q(self) -> float:
        """``sqrt(a^2 + 3 d^2)``."""
        return float(np.sqrt(self.a**2 + 3 * self.d**2))

    @property
    def apex(self) -> float:
        """``sqrt(a^2 - d^2)``: height of an arm tip aligned with the z axis."""
        return float(np.sqrt(self.a**2 - self.d**2))

    def as_dict(self):
        return {"a": self.a, "b": self.b, "d": self.d}

    @classmethod
    def from_dict(cls, data):
        return cls(float(data["a"]), float(data["b"]), float(data["d"]))


@dataclass(frozen=True)
class PlatformPose:
    p: np.ndarray
    psi: tuple

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(3))
        psi = tuple(float(v) for v in self.psi)
        if len(psi) != 3:
            raise InputError("a pose needs three arm angles")
        object.__setattr__(self, "psi", psi)


@dataclass
class ConstraintSystem:
    n_in: int
    n_out: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    names: tuple
    scale: float = 1.0
    hessians: Optional[np.ndarray] = None  # constant (n_out, n_in, n_in) for quadratic systems

    def residual_max(self, x) -> float:
        return float(np.max(np.abs(self.evaluate(as_configuration(x, self.n_in)))))


@dataclass
class FormalManipulator:
    name: str
    constraints: ConstraintSystem
    forward: Callable[[np.ndarray], np.ndarray]
    forward_jacobian: Callable[[np.ndarray], np.ndarray]
    linear_actuators: tuple = ()
    circle_actuators: tuple = ()
    params: object = None
    variant: str = ORIGINAL
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.constraints.n_in
        for k in self.linear_actuators:
            if not 0 <= k < n:
                raise InputError(f"actuator index {k} out of range")
        for pair in self.circle_actuators:
            if len(pair) != 2 or not all(0 <= k < n for k in pair):
                raise InputError(f"circle actuator {pair} is not a valid coordinate pair")

    def residual_max(self, x) -> float:
        return self.constraints.residual_max(x)


def as_configuration(x, n: int = 15) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != n:
        raise InputError(f"configuration must have {n} entries, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InputError("configuration has non-finite entries")
    return x


# ---------------------------------------------------------------- Delta system

def _link_matrix(variant):
    """Linear part ``L`` of the six link constraints (``l = L x + l0``)."""
    L = np.zeros((6, 15))
    rot2 = ROT_A if variant == ORIGINAL else np.eye(3)
    rot3 = ROT_A_INV if variant == ORIGINAL else np.eye(3)
    ex, ez = np.array([1.0, 0, 0]), np.array([0, 0, 1.0])
    for rows, rot_block, rot_act, limb in ((slice(0, 3), rot2, ROT_A, 1), (slice(3, 6), rot3, ROT_A_INV, 2)):
        L[rows, block(0)] = np.eye(3)
        L[rows, 9] = ex
        L[rows, 10] = ez
        L[rows, block(limb)] = -rot_block
        ca, sa = actuator(limb)
        L[rows, ca] = -rot_act @ ex
        L[rows, sa] = -rot_act @ ez
    return L


def _link_offset(d):
    w0 = np.array([d, 0.0, 0.0])
    return np.concatenate([w0 - ROT_A @ w0, w0 - ROT_A_INV @ w0])


def _delta_system(params: ParameterSet, variant: str) -> ConstraintSystem:
    a, b, d = params.a, params.b, params.d
    L = _link_matrix(variant)
    l0 = _link_offset(d)

    def evaluate(x):
        x = as_configuration(x)
        out = np.empty(12)
        for i in range(3):
            xi = x[block(i)]
            out[i] = xi @ xi - b * b
            ca, sa = actuator(i)
            out[3 + i] = x[ca] ** 2 + x[sa] ** 2 - a * a
        out[6:] = L @ x + l0
        return out

    def jacobian(x):
        x = as_configuration(x)
        J = np.zeros((12, 15))
        for i in range(3):
            J[i, block(i)] = 2 * x[block(i)]
            ca, sa = actuator(i)
            J[3 + i, ca] = 2 * x[ca]
            J[3 + i, sa] = 2 * x[sa]
        J[6:] = L
        return J

    H = np.zeros((12, 15, 15))
    for i in range(3):
        H[i, block(i), block(i)] = 2 * np.eye(3)
        for k in actuator(i):
            H[3 + i, k, k] = 2.0
    return ConstraintSystem(15, 12, evaluate, jacobian, DELTA_CONSTRAINT_NAMES, scale=b * b, hessians=H)


def _v1(x):
    return np.array([x[9] + x[0], x[1], x[2] + x[10]])


def build_delta(params: ParameterSet, variant: str = ORIGINAL) -> FormalManipulator:
    """The Delta manipulator as a 15-in/12-out constraint system.

    The forward map is ``v1``, the platform point expressed in limb 1's
    frame; the actuators are the three ``(ca_i, sa_i)`` pairs.
    """
    if not isinstance(params, ParameterSet):
        raise ParameterError("params must be a ParameterSet")
    if variant not in (ORIGINAL, TILDE):
        raise InputError(f"unknown variant {variant!r}")
    d = params.d
    fwd_J = np.zeros((3, 15))
    fwd_J[:, 0:3] = np.eye(3)
    fwd_J[0, 9] = 1.0
    fwd_J[2, 10] = 1.0
    return FormalManipulator(
        name=f"delta-{variant}",
        constraints=_delta_system(params, variant),
        forward=lambda x: _v1(as_configuration(x)) + np.array([d, 0.0, 0.0]),
        forward_jacobian=lambda x: fwd_J.copy(),
        circle_actuators=(actuator(0), actuator(1), actuator(2)),
        params=params,
        variant=variant,
    )


def to_tilde(x) -> np.ndarray:
    x = as_configuration(x).copy()
    x[block(1)] = ROT_A @ x[block(1)]
    x[block(2)] = ROT_A_INV @ x[block(2)]
    return x


def from_tilde(x) -> np.ndarray:
    x = as_configuration(x).copy()
    x[block(1)] = ROT_A_INV @ x[block(1)]
    x[block(2)] = ROT_A @ x[block(2)]
    return x


def arm_base(params: ParameterSet, psi: float) -> np.ndarray:
    """``w(psi) = (d + a cos psi, 0, a sin psi)``."""
    return np.array([params.d + params.a * np.cos(psi), 0.0, params.a * np.sin(psi)])


def arm_center(params: ParameterSet, limb: int, psi: float) -> np.ndarray:
    """Sphere center ``m_limb(psi)`` for limb 1, 2 or 3."""
    w = arm_base(params, psi)
    if limb == 1:
        return ROT_A @ w
    if limb == 2:
        return ROT_A_INV @ w
    if limb == 3:
        return w
    raise InputError(f"limb must be 1, 2 or 3, got {limb}")


def arm_center_velocity(params: ParameterSet, limb: int, psi: float) -> np.ndarray:
    dw = np.array([-params.a * np.sin(psi), 0.0, params.a * np.cos(psi)])
    return {1: ROT_A, 2: ROT_A_INV, 3: np.eye(3)}[limb] @ dw


def lift_pose(params: ParameterSet, pose: PlatformPose) -> np.ndarray:
    """Tilde configuration of a platform point and three arm angles.

    Position block ``i`` is ``A^-1 (p - m_i(psi_i))``, actuator pair ``i`` is
    ``a (cos psi_i, sin psi_i)``. The result lies on the tilde variety
    exactly when ``|p - m_i(psi_i)| = b`` for all three limbs.
    """
    x = np.empty(15)
    for i in range(3):
        psi = pose.psi[i]
        x[block(i)] = ROT_A_INV @ (pose.p - arm_center(params, i + 1, psi))
        ca, sa = actuator(i)
        x[ca] = params.a * np.cos(psi)
        x[sa] = params.a * np.sin(psi)
    return x


def normalize_angle(psi: float) -> float:
    """Map an angle into ``(-pi, pi]``."""
    psi = float(np.arctan2(np.sin(psi), np.cos(psi)))
    return np.pi if psi == -np.pi else psi


def pose_of(params: ParameterSet, x, tol: ToleranceConfig = DEFAULT_TOL, check: bool = True) -> PlatformPose:
    """Inverse of :func:`lift_pose` on the tilde variety."""
    x = as_configuration(x)
    if check:
        system = build_delta(params, TILDE).constraints
        worst = system.residual_max(x)
        if worst > tol.residual_tol * system.scale:
            raise ConsistencyError(f"configuration is off the tilde variety (max residual {worst:.3e})")
    psi = []
    for i in range(3):
        ca, sa = actuator(i)
        psi.append(normalize_angle(np.arctan2(x[sa], x[ca])))
    p = ROT_A @ x[block(0)] + arm_center(params, 1, psi[0])
    return PlatformPose(p, tuple(psi))


def random_pose(params: ParameterSet, rng: np.random.Generator, max_tries: int = 10000) -> PlatformPose:
    """Uniform arm angles, platform point on all three spheres (rejection sampled)."""
    for _ in range(max_tries):
        psi = rng.uniform(-np.pi, np.pi, size=3)
        centers = [arm_center(params, i + 1, psi[i]) for i in range(3)]
        pts = three_sphere_points(*centers, params.b)
        if pts:
            return PlatformPose(pts[int(rng.integers(len(pts)))], tuple(psi))
    raise ConsistencyError("could not sample an on-variety pose")


def random_configuration(params: ParameterSet, rng: np.random.Generator) -> np.ndarray:
    """Random on-variety configuration in original coordinates."""
    return from_tilde(lift_pose(params, random_pose(params, rng)))


# ---------------------------------------------------------------- crank slider

def build_crank_slider(l1: float, l2: float) -> FormalManipulator:
    """Crank slider in coordinates ``(x_B, y_B, x_C)``; actuator ``x_C``, forward map ``(x_B, y_B)``."""
    for name, value in (("l1", l1), ("l2", l2)):
        if not (np.isfinite(value) and value > 0):
            raise ParameterError(f"{name} > 0 violated ({name} = {value})")

    def evaluate(x):
        xb, yb, xc = as_configuration(x, 3)
        return np.array([xb * xb + yb * yb - l1 * l1, (xc - xb) ** 2 + yb * yb - l2 * l2])

    def jacobian(x):
        xb, yb, xc = as_configuration(x, 3)
        e = xc - xb
        return np.array([[2 * xb, 2 * yb, 0.0], [-2 * e, 2 * yb, 2 * e]])

    H = np.zeros((2, 3, 3))
    H[0] = np.diag([2.0, 2.0, 0.0])
    H[1] = np.array([[2.0, 0, -2.0], [0, 2.0, 0], [-2.0, 0, 2.0]])
    system = ConstraintSystem(3, 2, evaluate, jacobian, ("f1", "f2"), scale=max(l1, l2) ** 2, hessians=H)
    fwd_J = np.array([[1.0, 0, 0], [0, 1.0, 0]])
    return FormalManipulator(
        name="crank-slider",
        constraints=system,
        forward=lambda x: as_configuration(x, 3)[:2].copy(),
        forward_jacobian=lambda x: fwd_J.copy(),
        linear_actuators=(2,),
        params={"l1": float(l1), "l2": float(l2)},
    )


def crank_slider_configuration(l1: float, l2: float, theta: float, sign: int = 1) -> np.ndarray:
    """On-variety crank-slider configuration with crank angle ``theta``."""
    xb, yb = l1 * np.cos(theta), l1 * np.sin(theta)
    disc = l2 * l2 - yb * yb
    if disc < 0:
        raise ConsistencyError("coupler cannot reach the slide axis")
    return np.array([xb, yb, xb + sign * np.sqrt(disc)])
