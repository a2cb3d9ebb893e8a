"""Linear-algebra kernels used by the block updates."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .core import NonFinite, NotPositiveDefinite

L21_EPS = 1e-8
SIMPLEX_TOL = 1e-12


class ThinSvd(NamedTuple):
    U: np.ndarray
    S: np.ndarray
    Vt: np.ndarray


def _finite(x, name="input"):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFinite(f"{name} contains NaN or Inf")
    return x


def svd_thin(B) -> ThinSvd:
    """Thin SVD with a deterministic sign convention.

    Each left singular vector is flipped so that its largest-magnitude entry
    (first one on ties) is positive; the matching row of ``Vt`` flips with it.
    """
    B = _finite(B, "B")
    U, S, Vt = np.linalg.svd(B, full_matrices=False)
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return ThinSvd(U * signs, S, Vt * signs[:, None])


def orthogonal_procrustes(B) -> np.ndarray:
    """Column-orthonormal ``Q`` maximizing ``trace(Q.T @ B)``.

    Parameters
    ----------
    B : ndarray, shape (p, q)
        Target with ``p >= q``.

    Returns
    -------
    Q : ndarray, shape (p, q)
        ``U @ Vt`` from :func:`svd_thin`. For rank-deficient ``B`` any
        completion is optimal; the fixed sign convention makes this one
        deterministic.
    """
    B = _finite(B, "B")
    if B.shape[0] < B.shape[1]:
        raise ValueError(f"Procrustes target must be tall (p >= q), got {B.shape}")
    U, _, Vt = svd_thin(B)
    return U @ Vt


def project_simplex_columns(Y) -> np.ndarray:
    """Euclidean projection of every column of ``Y`` onto the simplex.

    Sort-and-threshold method, ``O(m log m)`` per column. Columns that are
    already feasible (nonnegative, sum within ``SIMPLEX_TOL`` of one) are
    returned unchanged, which makes the map idempotent bit for bit.
    """
    Y = _finite(Y, "y")
    m, n = Y.shape
    order = np.argsort(-Y, axis=0, kind="stable")
    u = np.take_along_axis(Y, order, axis=0)
    css = np.cumsum(u, axis=0)
    ks = np.arange(1, m + 1)[:, None]
    cond = u - (css - 1.0) / ks > 0
    rho = m - np.argmax(cond[::-1], axis=0)  # last index where cond holds, 1-based
    theta = (css[rho - 1, np.arange(n)] - 1.0) / rho
    Z = np.maximum(Y - theta, 0.0)
    # large shifts theta leave O(|theta| eps) error in the sum
    Z /= Z.sum(axis=0)
    feasible = (Y.min(axis=0) >= 0) & (np.abs(Y.sum(axis=0) - 1.0) <= SIMPLEX_TOL)
    Z[:, feasible] = Y[:, feasible]
    # layout follows Y (column slices are F-ordered); BLAS would then round differently
    return np.ascontiguousarray(Z)


def project_simplex(y) -> np.ndarray:
    """Project a vector onto ``{z >= 0, sum(z) = 1}``."""
    y = np.asarray(y, dtype=np.float64)
    return project_simplex_columns(y.reshape(-1, 1))[:, 0]


def l21_norm(W) -> float:
    """Sum of the Euclidean norms of the columns of ``W``."""
    W = _finite(W, "W")
    return float(np.sqrt(np.sum(W * W, axis=0)).sum())


def l21_reweight(W, eps: float = L21_EPS) -> np.ndarray:
    """Reweighting vector ``1 / (2 max(||W[:, j]||, eps))`` of the l2,1 surrogate."""
    W = _finite(W, "W")
    if eps <= 0:
        raise ValueError("eps must be positive")
    norms = np.sqrt(np.sum(W * W, axis=0))
    return 1.0 / (2.0 * np.maximum(norms, eps))


def spd_solve(M, rhs) -> np.ndarray:
    """Solve ``M X = rhs`` for symmetric positive-definite ``M`` (Cholesky)."""
    M = _finite(M, "M")
    rhs = _finite(rhs, "rhs")
    scale = max(1.0, np.abs(M).max())
    if np.abs(M - M.T).max() > 1e-10 * scale:
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        cf = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    return scipy.linalg.cho_solve(cf, rhs, check_finite=False)
