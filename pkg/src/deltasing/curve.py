"""The plane curve ``y^3 + c x^2 y - x^4 = 0`` near its singular origin.

The origin is a singular point of the curve (the gradient vanishes) but
still a manifold point: as a quadratic in ``x^2``,

    x^4 - c y x^2 - y^3 = (x^2 - u(y)) (x^2 - v(y)),
    u, v = y (c +- sqrt(c^2 + 4 y)) / 2,

and near the origin only the factor ``x^2 - u(y)`` vanishes. ``u`` is
analytic and invertible near 0, so the curve is the graph of one analytic
function ``y(x)``. ``c = 1`` is the default; ``c = 2`` is also supported.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InputError

BRANCH_DOMAIN = 0.5
_EPS = np.finfo(float).eps


def _check_coefficient(c):
    if c not in (1, 2):
        raise InputError(f"coefficient must be 1 or 2, got {c}")


def curve_eval(x, y, coefficient: int = 1):
    """``f(x, y) = y^3 + c x^2 y - x^4`` (works elementwise on arrays)."""
    _check_coefficient(coefficient)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return y**3 + coefficient * x * x * y - x**4


def curve_gradient(x, y, coefficient: int = 1):
    return np.array([2 * coefficient * x * y - 4 * x**3, 3 * y * y + coefficient * x * x])


def factor_roots(y, coefficient: int = 1):
    """The two roots ``u(y) >= v(y)`` of ``X^2 - c y X - y^3`` (as functions of y)."""
    _check_coefficient(coefficient)
    y = np.asarray(y, dtype=float)
    disc = coefficient**2 + 4 * y
    if np.any(disc < 0):
        raise DomainError(f"factorization needs y > {-coefficient**2 / 4}")
    root = np.sqrt(disc)
    return y * (coefficient + root) / 2, y * (coefficient - root) / 2


def _grid(xs, ys):
    return np.meshgrid(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), indexing="ij")


def factor_identity_residual(xs, ys, coefficient: int = 1) -> float:
    """Max of ``|f + (x^2 - u)(x^2 - v)|`` over the grid ``xs x ys``."""
    X, Y = _grid(xs, ys)
    u, v = factor_roots(Y, coefficient)
    X2 = X * X
    return float(np.max(np.abs(curve_eval(X, Y, coefficient) + (X2 - u) * (X2 - v))))


def printed_factor_residual(xs, ys, coefficient: int = 1) -> float:
    """Max of ``|f - (x^2 - w)(x^2 + w)|``, ``w = y (1 + sqrt(1 + y))``.

    This is the factorization as it is sometimes quoted; it has no
    ``x^2 y`` term, so the residual is not small.
    """
    X, Y = _grid(xs, ys)
    if np.any(Y < -1):
        raise DomainError("printed factors need y >= -1")
    w = Y * (1 + np.sqrt(1 + Y))
    X2 = X * X
    return float(np.max(np.abs(curve_eval(X, Y, coefficient) - (X2 - w) * (X2 + w))))


def _solve_branch(x, coefficient):
    x2 = float(x) ** 2
    if x2 == 0.0:
        return 0.0
    u = lambda y: factor_roots(y, coefficient)[0] - x2
    # u is increasing on y >= 0 with u(0) = 0 and u(x^2 / c) >= x^2
    hi = x2 / coefficient
    return brentq(u, 0.0, hi, xtol=max(1e-16 * hi, 1e-300), rtol=4 * _EPS)


def branch(x, coefficient: int = 1) -> float:
    """The analytic branch ``y(x)`` of the curve through the origin, ``|x| < 0.5``."""
    _check_coefficient(coefficient)
    if not np.isfinite(x) or abs(x) >= BRANCH_DOMAIN:
        raise DomainError(f"branch is only computed for |x| < {BRANCH_DOMAIN}, got {x}")
    return _solve_branch(x, coefficient)


@dataclass(frozen=True)
class CurveSample:
    x: float
    y: float
    residual: float


def emit_plot_samples(x_range=(-1.0, 1.0), count: int = 400, coefficient: int = 1) -> list:
    """``count`` points of the real curve ordered by ``x``; includes ``(0, 0)`` when in range.

    For every ``x`` the cubic in ``y`` is strictly increasing, so the real
    curve is exactly the graph of the branch and can be sampled anywhere.
    """
    _check_coefficient(coefficient)
    lo, hi = map(float, x_range)
    if not lo < hi:
        raise InputError("x_range must be increasing")
    if count < 1:
        raise InputError("count must be positive")
    xs = np.linspace(lo, hi, count) if count > 1 else np.array([0.0 if lo <= 0 <= hi else lo])
    if lo <= 0.0 <= hi:
        xs[int(np.argmin(np.abs(xs)))] = 0.0
    out = []
    for x in xs:
        y = _solve_branch(x, coefficient)
        out.append(CurveSample(float(x), float(y), float(curve_eval(x, y, coefficient))))
    return out


def format_plot_data(samples) -> str:
    """Two whitespace-separated columns ``x y``, no header."""
    return "".join(f"{s.x:.15g} {s.y:.15g}\n" for s in samples)


def newton_roots(box: float = 0.1, grid: int = 21, coefficient: int = 1, max_iter: int = 200) -> np.ndarray:
    """Roots of ``f`` reached by minimum-norm Newton steps from a grid of starts.

    Starting points cover ``[-box, box]^2``; points that leave the box or do
    not converge are dropped.
    """
    starts = np.linspace(-box, box, grid)
    roots = []
    for x0 in starts:
        for y0 in starts:
            z = np.array([x0, y0])
            for _ in range(max_iter):
                f = float(curve_eval(z[0], z[1], coefficient))
                if f == 0.0:
                    break
                g = curve_gradient(z[0], z[1], coefficient)
                gg = float(g @ g)
                if gg == 0.0:
                    break
                step = f * g / gg
                z = z - step
                if np.linalg.norm(step) <= 1e-17:
                    break
            if np.all(np.abs(z) <= box) and abs(float(curve_eval(z[0], z[1], coefficient))) <= 1e-15:
                roots.append(z)
    return np.array(roots).reshape(-1, 2)
