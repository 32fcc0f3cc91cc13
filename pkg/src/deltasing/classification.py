"""Kinematic classification of a configuration.

Three kinds of singular behaviour are distinguished:

* configuration-space singularity (css): the point is not a manifold
  point. A rank drop of the constraint Jacobian only flags it; a witness
  certificate proves it.
* endeffector singularity (ees): at a regular point, the forward map
  restricted to the tangent space loses rank.
* actuator singularity (as): at a regular point, the actuator coordinates
  (angles read in a chart of the circle) fail to be a local chart.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DeltaSingError, NotOnVarietyError
from .linalg import DEFAULT_TOL, ToleranceConfig, kernel_basis, numerical_rank, singular_values
from .mechanism import FormalManipulator, as_configuration

CERTIFIED = "certified"
RANK_DROP_ONLY = "rank-drop-only"


@dataclass
class KinematicClass:
    css: bool
    css_provenance: str = ""  # CERTIFIED, RANK_DROP_ONLY or "" when css is false
    ees: bool = False
    as_: bool = False
    jacobian_rank: int = 0
    tangent_dim: int = 0
    forward_rank: int = 0
    actuator_ranks: dict = field(default_factory=dict)
    singular_values: tuple = ()

    @property
    def regular(self) -> bool:
        return not (self.css or self.ees or self.as_)

    @property
    def label(self) -> str:
        if self.css:
            return f"css ({self.css_provenance})"
        flags = [name for name, on in (("ees", self.ees), ("as", self.as_)) if on]
        return "+".join(flags) if flags else "regular"

    def as_dict(self):
        return {
            "css": self.css,
            "css_provenance": self.css_provenance,
            "ees": self.ees,
            "as": self.as_,
            "regular": self.regular,
            "label": self.label,
            "jacobian_rank": self.jacobian_rank,
            "tangent_dim": self.tangent_dim,
            "forward_rank": self.forward_rank,
            "actuator_ranks": dict(self.actuator_ranks),
            "singular_values": [float(s) for s in self.singular_values],
        }


def actuator_names(m: FormalManipulator) -> list:
    names = [f"lin{k}" for k in m.linear_actuators]
    names += [f"arm{i + 1}" for i in range(len(m.circle_actuators))]
    return names


def actuator_differential(m: FormalManipulator, x, chart_offsets=None) -> np.ndarray:
    """Differential of the actuator coordinates at ``x``, one row per actuator.

    Linear actuators read their coordinate directly. A circle actuator
    ``(c, s)`` is read as an angle in a chart of the circle; the chart is
    ``atan2`` rotated by ``chart_offsets[i]`` (default: centred at the
    current angle). Rotating a chart only changes the angle by a constant,
    so the differential ``(-s dc + c ds) / (c^2 + s^2)`` is the same in
    every chart; the offsets are accepted to make that checkable.
    """
    x = as_configuration(x, m.constraints.n_in)
    n = m.constraints.n_in
    rows = []
    for k in m.linear_actuators:
        row = np.zeros(n)
        row[k] = 1.0
        rows.append(row)
    offsets = chart_offsets if chart_offsets is not None else [0.0] * len(m.circle_actuators)
    for (ic, is_), off in zip(m.circle_actuators, offsets):
        # rotate (c, s) by -off, then differentiate atan2 in that frame
        co, so = np.cos(off), np.sin(off)
        c = co * x[ic] + so * x[is_]
        s = -so * x[ic] + co * x[is_]
        rr = c * c + s * s
        dc = np.zeros(n)
        ds = np.zeros(n)
        dc[ic], dc[is_] = co, so
        ds[ic], ds[is_] = -so, co
        rows.append((-s * dc + c * ds) / rr)
    return np.array(rows).reshape(len(rows), n)


def actuator_chart_rank(m: FormalManipulator, x, T, subset, tol: ToleranceConfig = DEFAULT_TOL,
                        chart_offsets=None) -> int:
    """Rank of the actuator chart differential on ``subset`` restricted to span(T).

    ``T`` holds tangent vectors as rows; ``subset`` indexes the actuators in
    the order of :func:`actuator_names`.
    """
    subset = list(subset)
    T = np.asarray(T, dtype=float)
    if not subset or T.size == 0:
        return 0
    A = actuator_differential(m, x, chart_offsets)[subset]
    return numerical_rank(A @ T.T, tol)


def _subset_ranks(m, x, T, tol, chart_offsets=None):
    k = len(actuator_names(m))
    names = actuator_names(m)
    out = {}
    for size in range(1, k + 1):
        for subset in itertools.combinations(range(k), size):
            key = ",".join(names[i] for i in subset)
            out[key] = actuator_chart_rank(m, x, T, subset, tol, chart_offsets)
    return out


def _try_certificate(m, x, tol):
    from .witness import certify, crank_slider_witness

    try:
        if m.name.startswith("delta"):
            return certify(m, x, tol)
        if m.name == "crank-slider":
            l1, l2 = m.params["l1"], m.params["l2"]
            cert = crank_slider_witness(l1, l2, tol)
            if np.max(np.abs(cert.point - x)) <= tol.branch_match_tol * max(1.0, l1):
                return cert
    except DeltaSingError:
        return None
    return None


def classify(m: FormalManipulator, x, tol: ToleranceConfig = DEFAULT_TOL, certificate=None,
             attempt_certificate: bool = True, chart_offsets=None) -> KinematicClass:
    """Classify configuration ``x`` of ``m``.

    A rank drop of the constraint Jacobian marks a configuration-space
    singularity; it is reported as certified when ``certificate`` is a valid
    witness certificate, or when one can be built here
    (``attempt_certificate``). Otherwise the forward map and the actuator
    chart are examined on the tangent space ``ker DF``.
    """
    x = as_configuration(x, m.constraints.n_in)
    res = m.constraints.residual_max(x)
    if res > tol.residual_tol * m.constraints.scale:
        raise NotOnVarietyError(f"configuration is off the variety (residual {res:.3e})")
    J = m.constraints.jacobian(x)
    sv = singular_values(J)
    rank = numerical_rank(J, tol)
    expected = min(m.constraints.n_out, m.constraints.n_in)
    if rank < expected:
        cert = certificate
        if cert is None and attempt_certificate:
            cert = _try_certificate(m, x, tol)
        provenance = CERTIFIED if cert is not None and cert.valid else RANK_DROP_ONLY
        return KinematicClass(css=True, css_provenance=provenance, jacobian_rank=rank,
                              tangent_dim=m.constraints.n_in - rank, singular_values=tuple(sv))
    T = kernel_basis(J, tol)
    dim_t = T.shape[0]
    G = np.atleast_2d(m.forward_jacobian(x))
    fwd_rank = numerical_rank(G @ T.T, tol) if dim_t else 0
    ees = fwd_rank < min(G.shape[0], dim_t)
    k = len(actuator_names(m))
    full_rank = actuator_chart_rank(m, x, T, range(k), tol, chart_offsets)
    return KinematicClass(
        css=False,
        ees=bool(ees),
        as_=full_rank < dim_t,
        jacobian_rank=rank,
        tangent_dim=dim_t,
        forward_rank=fwd_rank,
        actuator_ranks=_subset_ranks(m, x, T, tol, chart_offsets),
        singular_values=tuple(sv),
    )


def crank_slider_dead_point(l1: float, l2: float, sign: int = 1) -> np.ndarray:
    """Configuration where the coupler lies along the slide axis.

    There ``y_B = 0`` and the constraint Jacobian kernel is ``(0, 1, 0)``:
    the slider coordinate does not move to first order.
    """
    return np.array([l1, 0.0, l1 + sign * l2])
