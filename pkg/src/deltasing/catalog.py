"""The 24 configuration-space singularities of the Delta manipulator.

Four closed-form representatives ``q1 .. q4`` are expanded to their orbits
under the order-6 symmetry group and each point is checked for membership
in the variety and for a rank drop of ``DF``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CatalogError, NotOnVarietyError, ParameterError
from .linalg import DEFAULT_TOL, ToleranceConfig, rank_from_singular_values, singular_values
from .mechanism import (
    ORIGINAL,
    SQRT3,
    VARIABLE_NAMES,
    FormalManipulator,
    ParameterSet,
    as_configuration,
    build_delta,
    random_configuration,
)
from .symmetry import ELEMENTS, GroupElement, act, is_free_on

LABELS = ("q1", "q2", "q3", "q4")
# Relative band around the tangential value of b; inside it the circle/sphere
# intersections of the witness construction are too close to tangent to trust.
EXCLUDED_REL_TOL = 1e-4


def q3_denominator(params: ParameterSet) -> float:
    a, b, d, q = params.a, params.b, params.d, params.q
    return -2 * b * (a * a - 3 * d * d) + q * (a * a + b * b)


def q4_denominator(params: ParameterSet) -> float:
    a, b, d, q = params.a, params.b, params.d, params.q
    return 2 * b * (a * a - 3 * d * d) + q * (a * a + b * b)


def closed_form_point(label: str, params: ParameterSet) -> np.ndarray:
    """Coordinates of representative ``label`` (original coordinates)."""
    if not isinstance(params, ParameterSet):
        raise ParameterError("params must be a ParameterSet")
    a, b, d, q, r = params.a, params.b, params.d, params.q, params.apex
    xy = d * b / q
    z = r * b / q
    if label == "q1":
        return np.array([-xy, -SQRT3 * xy, z, -xy, SQRT3 * xy, z, 2 * xy, 0.0, z, -d, r, -d, r, -d, r])
    if label == "q2":
        return np.array([xy, SQRT3 * xy, z, xy, -SQRT3 * xy, z, -2 * xy, 0.0, z, -d, -r, -d, -r, -d, -r])
    if label == "q3":
        den = q3_denominator(params)
        x3 = -2 * b * d * (b * q - 2 * a * a + b * b + 3 * d * d) / den
        z3 = -b * r * (2 * b * q - a * a - b * b + 6 * d * d) / den
        ca3 = 6 * b * d * (a * a - d * d) * (b - q) / (q * den) - d
        sa3 = 6 * b * d * d * r * (q + 2 * b) / (q * den) - r
        return np.array([xy, SQRT3 * xy, z, xy, -SQRT3 * xy, z, x3, 0.0, z3, -d, -r, -d, -r, ca3, sa3])
    if label == "q4":
        den = q4_denominator(params)
        x3 = -2 * b * d * (b * q + 2 * a * a - b * b - 3 * d * d) / den
        z3 = b * r * (2 * b * q + a * a + b * b - 6 * d * d) / den
        ca3 = 6 * b * d * (a * a - d * d) * (b + q) / (q * den) - d
        sa3 = 6 * b * d * d * r * (q - 2 * b) / (q * den) + r
        return np.array([-xy, -SQRT3 * xy, z, -xy, SQRT3 * xy, z, x3, 0.0, z3, -d, r, -d, r, ca3, sa3])
    raise ValueError(f"unknown catalog label {label!r}")


def denominator_guard(params: ParameterSet) -> dict:
    """Denominators of ``q3``/``q4`` and the discriminant showing they never vanish.

    Viewed as quadratics in ``b`` both denominators have leading coefficient
    ``q > 0`` and discriminant ``4 (a^2 - 3 d^2)^2 - 4 q^2 a^2 = 36 d^2 (d^2 - a^2)``,
    negative whenever ``a > d``.
    """
    if not params.a > params.d:
        raise ParameterError("a > d violated; the discriminant argument needs it")
    a, d, q = params.a, params.d, params.q
    u = q4_denominator(params)
    u3 = q3_denominator(params)
    reduced = -9 * a * a * d * d + 9 * d**4
    full = 4 * (a * a - 3 * d * d) ** 2 - 4 * q * q * a * a
    proof = bool(u > 0 and u3 > 0 and reduced < 0 and full < 0)
    if not proof:
        raise ParameterError(f"denominator guard failed: u={u}, u3={u3}, discriminant={reduced}")
    return {"q4_denominator": u, "q3_denominator": u3, "discriminant": reduced,
            "discriminant_full": full, "proof": proof}


def excluded_value(params: ParameterSet) -> float:
    """The critical lower-arm length ``(3 d^2 - a^2) / q``."""
    return (3 * params.d**2 - params.a**2) / params.q


def excluded_case(params: ParameterSet) -> bool:
    """True when ``b`` sits on the tangential-intersection value."""
    return abs(params.b - excluded_value(params)) <= EXCLUDED_REL_TOL * params.b


@dataclass
class SingularPointRecord:
    label: str
    element: GroupElement
    params: ParameterSet
    config: np.ndarray
    residual_max: float
    singular_values: np.ndarray
    rank: int
    guards: dict = field(default_factory=dict)
    certificate_status: str = "pending"

    @property
    def verified(self) -> bool:
        return self.rank < 12

    @property
    def name(self) -> str:
        return f"{self.label}:{self.element}"

    def as_dict(self):
        return {
            "label": self.label,
            "element": str(self.element),
            "config": [float(v) for v in self.config],
            "residual": self.residual_max,
            "singular_values": [float(v) for v in self.singular_values],
            "rank": self.rank,
            "verified": self.verified,
            "guards": self.guards,
            "certificate": self.certificate_status,
        }


def verify_rank_drop(m: FormalManipulator, x, tol: ToleranceConfig = DEFAULT_TOL, label: str = "",
                     element: GroupElement = GroupElement()) -> SingularPointRecord:
    """Residual and Jacobian rank at ``x``; the record is verified iff rank < 12."""
    if m.variant != ORIGINAL:
        raise ValueError("verify_rank_drop expects the original Delta system")
    x = as_configuration(x)
    res = m.residual_max(x)
    if res > tol.residual_tol * m.constraints.scale:
        raise NotOnVarietyError(f"point {label or '?'} is off the variety (max residual {res:.3e})")
    sv = singular_values(m.constraints.jacobian(x))
    return SingularPointRecord(label, element, m.params, x, res, sv, rank_from_singular_values(sv, tol))


def full_catalog(params: ParameterSet, tol: ToleranceConfig = DEFAULT_TOL) -> list:
    """All 24 records, ordered by label then group element."""
    m = build_delta(params)
    guards = denominator_guard(params)
    excluded = excluded_case(params)
    records = []
    for label in LABELS:
        base = closed_form_point(label, params)
        for g in ELEMENTS:
            rec = verify_rank_drop(m, act(g, base), tol, label, g)
            rec.guards = {"q3_denominator": guards["q3_denominator"],
                          "q4_denominator": guards["q4_denominator"],
                          "excluded_case": excluded}
            if excluded and label in ("q3", "q4"):
                rec.certificate_status = "unavailable"
            if not rec.verified:
                raise CatalogError(f"no rank drop at {rec.name} (rank {rec.rank})", rec)
            records.append(rec)
    pts = [r.config for r in records]
    for i in range(len(pts)):
        for j in range(i):
            if np.linalg.norm(pts[i] - pts[j]) <= tol.branch_match_tol:
                raise CatalogError(f"{records[i].name} coincides with {records[j].name}", records[i])
    free, offending = is_free_on(pts, tol)
    if not free:
        k, g, _ = offending[0]
        raise CatalogError(f"{g} fixes {records[k].name}", records[k])
    return records


def min_pairwise_distance(points) -> float:
    pts = np.asarray(points)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    dist[np.diag_indices(len(pts))] = np.inf
    return float(dist.min())


def nearest_catalog_point(records, x):
    dists = [np.linalg.norm(r.config - x) for r in records]
    k = int(np.argmin(dists))
    return records[k], float(dists[k])


# ---------------------------------------------------------------- export

def catalog_to_json(records) -> list:
    return [r.as_dict() for r in records]


def catalog_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "element", *VARIABLE_NAMES, "residual",
                     *[f"sigma{k}" for k in range(1, 13)], "rank", "excluded_case", "certificate"])
    for r in records:
        writer.writerow([r.label, str(r.element), *[f"{v:.15g}" for v in r.config], f"{r.residual_max:.15g}",
                         *[f"{v:.15g}" for v in r.singular_values], r.rank,
                         int(bool(r.guards.get("excluded_case", False))), r.certificate_status])
    return buf.getvalue()


# ---------------------------------------------------------------- search

@dataclass
class SearchCandidate:
    config: np.ndarray
    sigma_ratio: float
    iterations: int
    seed_index: int
    match: Optional[str] = None
    match_distance: float = float("inf")

    def as_dict(self):
        return {"seed_index": self.seed_index, "iterations": self.iterations,
                "sigma_ratio": self.sigma_ratio, "match": self.match,
                "match_distance": self.match_distance, "config": [float(v) for v in self.config]}


def _project_to_variety(system, x, scale, max_iter=30):
    """Gauss-Newton corrector onto ``F = 0`` (minimum-norm steps)."""
    for _ in range(max_iter):
        f = system.evaluate(x)
        if np.max(np.abs(f)) <= 1e-13 * scale:
            return x, True
        step, *_ = np.linalg.lstsq(system.jacobian(x), f, rcond=1e-12)
        x = x - step
    return x, bool(np.max(np.abs(system.evaluate(x))) <= 1e-10 * scale)


def _descend(system, x, budget, tol, switch_ratio=1e-2):
    """Newton iteration on the smallest singular value, restricted to the variety.

    Stops early once ``sigma_min / sigma_max`` drops below ``switch_ratio``;
    :func:`_refine_rank_drop` finishes from there.
    """
    H = system.hessians
    scale = system.scale
    n_out = system.n_out
    it = 0
    U, sv, Vt = np.linalg.svd(system.jacobian(x), full_matrices=True)
    for it in range(1, budget + 1):
        sigma = sv[n_out - 1]
        if sigma <= switch_ratio * sv[0]:
            return x, U[:, n_out - 1], it - 1
        u, v = U[:, n_out - 1], Vt[n_out - 1]
        grad = np.einsum("i,ijk,k->j", u, H, v)
        T = Vt[n_out:]
        g = T.T @ (T @ grad)
        gn = g @ g
        if gn == 0:
            break
        step = -sigma * g / gn
        alpha = 1.0
        accepted = False
        for _ in range(20):
            y, ok = _project_to_variety(system, x + alpha * step, scale)
            if ok:
                Uy, svy, Vty = np.linalg.svd(system.jacobian(y), full_matrices=True)
                if svy[n_out - 1] < sigma:
                    x, U, sv, Vt = y, Uy, svy, Vty
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            break
    return x, None, it


def _refine_rank_drop(system, x, u, max_iter=25):
    """Gauss-Newton on ``F(x) = 0, DF(x)^T u = 0, u . u0 = 1``.

    The augmented system has an isolated regular solution at a point where
    ``DF`` loses rank along ``u``, so convergence is quadratic there.
    """
    H = system.hessians
    n_in, n_out = system.n_in, system.n_out
    u0 = u / np.linalg.norm(u)
    u = u0.copy()
    for _ in range(max_iter):
        J = system.jacobian(x)
        res = np.concatenate([system.evaluate(x), J.T @ u, [u @ u0 - 1.0]])
        jac = np.zeros((n_out + n_in + 1, n_in + n_out))
        jac[:n_out, :n_in] = J
        jac[n_out:n_out + n_in, :n_in] = np.einsum("i,ijk->jk", u, H)
        jac[n_out:n_out + n_in, n_in:] = J.T
        jac[-1, n_in:] = u0
        step, *_ = np.linalg.lstsq(jac, res, rcond=None)
        x = x - step[:n_in]
        u = u - step[n_in:]
        if np.linalg.norm(step) <= 1e-15 * (1.0 + np.linalg.norm(x)):
            break
    return x


def rank_deficiency_search(m: FormalManipulator, seeds: int, budget: int, tol: ToleranceConfig = DEFAULT_TOL,
                           rng_seed: int = 0, seed_points=None, catalog=None,
                           switch_ratio: float = 1e-2) -> list:
    """Local minimization of ``sigma_12(DF)`` on the variety from random seeds.

    Each seed descends until ``sigma_12/sigma_1 < switch_ratio`` and is then
    polished by Gauss-Newton on the rank-drop system. Returns the seeds
    that converged (``sigma_12/sigma_1 < rank_rel_tol`` on the variety), each
    matched against the 24-point catalog.
    """
    if budget <= 0:
        return []
    system = m.constraints
    if seed_points is None:
        rng = np.random.default_rng(rng_seed)
        seed_points = [random_configuration(m.params, rng) for _ in range(seeds)]
    if catalog is None:
        catalog = full_catalog(m.params, tol)
    out = []
    for k, x0 in enumerate(seed_points):
        x, u, iters = _descend(system, as_configuration(x0).copy(), budget, tol, switch_ratio)
        if u is None:
            continue
        x = _refine_rank_drop(system, x, u)
        if system.residual_max(x) > tol.residual_tol * system.scale:
            continue
        sv = singular_values(system.jacobian(x))
        ratio = sv[-1] / sv[0]
        if ratio < tol.rank_rel_tol:
            rec, dist = nearest_catalog_point(catalog, x)
            cand = SearchCandidate(x, float(ratio), iters, k, match_distance=dist)
            if dist <= tol.branch_match_tol:
                cand.match = rec.name
            out.append(cand)
    return out


def generic_rank_sample(params: ParameterSet, count: int, min_distance: float = 0.1, rng_seed: int = 0,
                        tol: ToleranceConfig = DEFAULT_TOL):
    """Ranks of ``DF`` at random on-variety points at least ``min_distance`` from the catalog."""
    m = build_delta(params)
    catalog = full_catalog(params, tol)
    rng = np.random.default_rng(rng_seed)
    rows = []
    while len(rows) < count:
        x = random_configuration(params, rng)
        _, dist = nearest_catalog_point(catalog, x)
        if dist < min_distance:
            continue
        sv = singular_values(m.constraints.jacobian(x))
        rows.append((x, rank_from_singular_values(sv, tol), float(sv[-1] / sv[0])))
    return rows


def records_json(records) -> str:
    return json.dumps(catalog_to_json(records), indent=2)
