"""Order-6 symmetry group acting on Delta configurations by signed permutations.

Generators: ``r`` cycles the limbs (position blocks and actuator pairs,
``B1 <- B2 <- B3 <- B1``) and ``s`` mirrors every limb in the horizontal
plane (negates each ``z_i`` and ``sa_i``). The two generator matrices
commute, so elements compose as ``r^i s^j * r^k s^l = r^(i+k) s^(j+l)``;
this is the law that makes :func:`representation` a homomorphism.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvarianceError
from .linalg import DEFAULT_TOL, ToleranceConfig
from .mechanism import FormalManipulator, as_configuration


@dataclass(frozen=True, order=True)
class GroupElement:
    rot: int = 0
    ref: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rot", self.rot % 3)
        object.__setattr__(self, "ref", self.ref % 2)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.rot + other.rot, self.ref + other.ref)

    @property
    def inverse(self) -> "GroupElement":
        return GroupElement(-self.rot, self.ref)

    @property
    def is_identity(self) -> bool:
        return self.rot == 0 and self.ref == 0

    def __str__(self):
        if self.is_identity:
            return "e"
        parts = []
        if self.rot:
            parts.append("r" if self.rot == 1 else "r^2")
        if self.ref:
            parts.append("s")
        return "".join(parts)

    @classmethod
    def parse(cls, text: str) -> "GroupElement":
        table = {str(g): g for g in ELEMENTS}
        try:
            return table[text.strip()]
        except KeyError:
            raise ValueError(f"unknown group element {text!r}; expected one of {sorted(table)}") from None


IDENTITY = GroupElement(0, 0)
R = GroupElement(1, 0)
S = GroupElement(0, 1)
ELEMENTS = tuple(GroupElement(i, j) for j in (0, 1) for i in (0, 1, 2))


def _generator_r():
    M = np.zeros((15, 15))
    for i in range(3):
        src = (i + 1) % 3
        M[3 * i:3 * i + 3, 3 * src:3 * src + 3] = np.eye(3)
        M[9 + 2 * i:11 + 2 * i, 9 + 2 * src:11 + 2 * src] = np.eye(2)
    return M


def _generator_s():
    diag = np.ones(15)
    for i in range(3):
        diag[3 * i + 2] = -1.0
        diag[10 + 2 * i] = -1.0
    return np.diag(diag)


@lru_cache(maxsize=None)
def _rep(rot: int, ref: int) -> np.ndarray:
    M = np.linalg.matrix_power(_generator_r(), rot) @ np.linalg.matrix_power(_generator_s(), ref)
    M = np.rint(M)
    M.setflags(write=False)
    return M


def representation(g: GroupElement) -> np.ndarray:
    """The 15x15 signed permutation matrix of ``g``."""
    return _rep(g.rot, g.ref)


def act(g: GroupElement, x) -> np.ndarray:
    return representation(g) @ as_configuration(x)


def _lex_key(x):
    return tuple(np.round(x, 12))


def orbit(points, tol: ToleranceConfig = DEFAULT_TOL) -> list:
    """Images of ``points`` under all six elements, deduplicated within
    ``branch_match_tol`` and sorted lexicographically."""
    found = []
    for x in points:
        for g in ELEMENTS:
            y = act(g, x)
            if all(np.linalg.norm(y - z) > tol.branch_match_tol for z in found):
                found.append(y)
    return sorted(found, key=_lex_key)


def labelled_orbit(point, tol: ToleranceConfig = DEFAULT_TOL):
    """``[(g, act(g, point))]`` for the distinct images, first element wins."""
    out = []
    for g in ELEMENTS:
        y = act(g, point)
        if all(np.linalg.norm(y - z) > tol.branch_match_tol for _, z in out):
            out.append((g, y))
    return out


def is_free_on(points, tol: ToleranceConfig = DEFAULT_TOL):
    """Whether every non-identity element moves every point by more than
    ``branch_match_tol``. Returns ``(free, offending)`` with offending
    ``(point_index, element, displacement)`` triples."""
    offending = []
    for k, x in enumerate(points):
        x = as_configuration(x)
        for g in ELEMENTS:
            if g.is_identity:
                continue
            disp = float(np.linalg.norm(act(g, x) - x))
            if disp <= tol.branch_match_tol:
                offending.append((k, g, disp))
    return not offending, offending


def constraint_mixing_matrix(m: FormalManipulator, g: GroupElement, n_points: int = 200, seed: int = 0,
                             max_residual: float = 1e-8):
    """Least-squares ``A_g`` with ``F(Psi(g) x) = A_g F(x)``.

    Fitted from ``n_points`` random points in a box scaled to the mechanism.
    Returns ``(A_g, residual)`` where ``residual`` is the max-abs misfit.
    """
    if n_points < 200:
        raise ValueError("at least 200 evaluation points are required")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(m.constraints.scale)
    X = rng.uniform(-scale, scale, size=(n_points, m.constraints.n_in))
    F = np.array([m.constraints.evaluate(x) for x in X])
    G = np.array([m.constraints.evaluate(act(g, x)) for x in X])
    At, *_ = np.linalg.lstsq(F, G, rcond=None)
    A = At.T
    residual = float(np.max(np.abs(G - F @ At)))
    if residual > max_residual:
        raise InvarianceError(f"constraints are not mapped linearly into themselves by {g} (residual {residual:.3e})")
    if np.linalg.matrix_rank(A) < A.shape[0]:
        raise InvarianceError(f"mixing matrix of {g} is singular")
    return A, residual
