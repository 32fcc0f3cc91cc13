"""Dense linear algebra primitives with explicit tolerance semantics.

Every rank decision in the package goes through :func:`numerical_rank`,
which thresholds singular values relative to the largest one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class ToleranceConfig:
    rank_rel_tol: float = 1e-8
    residual_tol: float = 1e-9
    fd_step: float = 1e-5
    branch_match_tol: float = 1e-6

    def __post_init__(self):
        for name in ("rank_rel_tol", "residual_tol", "fd_step", "branch_match_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InputError(f"{name} must be a positive finite number, got {value!r}")
        if self.rank_rel_tol >= 1:
            raise InputError("rank_rel_tol must be < 1")

    def as_dict(self):
        return {
            "rank_rel_tol": self.rank_rel_tol,
            "residual_tol": self.residual_tol,
            "fd_step": self.fd_step,
            "branch_match_tol": self.branch_match_tol,
        }


DEFAULT_TOL = ToleranceConfig()


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    return M


def singular_values(M) -> np.ndarray:
    """Singular values in descending order (length ``min(rows, cols)``)."""
    M = as_matrix(M)
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def rank_from_singular_values(sv, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    sv = np.asarray(sv, dtype=float)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol.rank_rel_tol * sv[0]))


def numerical_rank(M, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol.rank_rel_tol * sigma_max``."""
    return rank_from_singular_values(singular_values(M), tol)


def kernel_basis(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical null space.

    Returns an array of shape ``(k, cols)``; each row is one basis vector and
    ``k = cols - numerical_rank(M)``.
    """
    M = as_matrix(M)
    cols = M.shape[1]
    if M.size == 0:
        return np.eye(cols)
    _, sv, vt = np.linalg.svd(M, full_matrices=True)
    rank = rank_from_singular_values(sv, tol)
    return vt[rank:].copy()


def span_dimension(vectors, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Numerical rank of the matrix whose columns are ``vectors``."""
    vectors = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not vectors:
        raise InputError("span_dimension needs at least one vector")
    n = vectors[0].size
    if any(v.size != n for v in vectors):
        raise InputError("vectors have different lengths")
    return numerical_rank(np.column_stack(vectors), tol)


def central_difference_tangent(path, t0: float, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Derivative of ``path`` at ``t0`` by Richardson-extrapolated central differences.

    Combines the central quotients at steps ``2h`` and ``h`` so the leading
    ``h**2`` error cancels; cubic paths are differentiated exactly.
    """
    h = tol.fd_step

    def quotient(step):
        fp = np.asarray(path(t0 + step), dtype=float)
        fm = np.asarray(path(t0 - step), dtype=float)
        return (fp - fm) / (2.0 * step)

    return (4.0 * quotient(h) - quotient(2.0 * h)) / 3.0


def jacobian_fd(func, x, step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian; used as an independent check only."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = step
        cols.append((np.asarray(func(x + e)) - np.asarray(func(x - e))) / (2 * step))
    return np.column_stack(cols)
