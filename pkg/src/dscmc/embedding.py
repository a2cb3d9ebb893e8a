"""Turn a learned anchor graph into cluster labels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .core import ConfigError
from .datagen import philox_stream
from .numerics import svd_thin

MAX_LLOYD_ITER = 300
_RESTART_STREAM_BASE = 1 << 32


def spectral_embed(Z: np.ndarray, k: int) -> np.ndarray:
    """Top-``k`` right singular vectors of ``Z`` as an ``(n, k)`` embedding."""
    Z = np.asarray(Z, dtype=np.float64)
    if k > min(Z.shape):
        raise ConfigError(f"cannot take {k} singular vectors of a {Z.shape} graph")
    return np.ascontiguousarray(svd_thin(Z).Vt[:k].T)


@dataclass
class KMeansModel:
    centers: np.ndarray
    inertia: float
    n_iter: int
    labels: np.ndarray
    restart: int = 0
    history: List[float] = field(default_factory=list)


def _sq_dists(X, C):
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of ``k`` seeds chosen by D^2 sampling."""
    n = X.shape[0]
    idx = [int(rng.integers(n))]
    d2 = np.sum((X - X[idx[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            # inverse-CDF draw keeps the choice a pure function of one uniform
            u = rng.random() * total
            j = int(np.searchsorted(np.cumsum(d2), u, side="right"))
            j = min(j, n - 1)
        else:
            rng.random()
            j = int(np.argmax(d2))
        idx.append(j)
        d2 = np.minimum(d2, np.sum((X - X[j]) ** 2, axis=1))
    return np.array(idx)


def lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int = MAX_LLOYD_ITER):
    """Lloyd iterations until the assignment stops changing.

    Returns ``(centers, labels, inertia, n_iter, history)`` where ``history``
    holds the inertia after every assignment step.
    """
    n, k = X.shape[0], centers.shape[0]
    centers = centers.copy()
    labels = None
    history = []
    for it in range(1, max_iter + 1):
        d2 = _sq_dists(X, centers)
        new = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(n), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, X)
        nonempty = counts > 0
        centers[nonempty] = sums[nonempty] / counts[nonempty, None]
        for c in np.flatnonzero(~nonempty):
            # empty cluster: move to the point worst served by its own center
            own = np.sum((X - centers[labels]) ** 2, axis=1)
            far = int(np.argmax(own))
            centers[c] = X[far]
            labels[far] = c
    d2 = _sq_dists(X, centers)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    return centers, labels, inertia, it, history


def kmeans(M: np.ndarray, k: int, restarts: int = 50, seed: int = 0) -> KMeansModel:
    """Best-of-``restarts`` k-means with k-means++ seeding.

    Restart ``r`` draws from its own Philox stream, so the first ``r``
    restarts are identical whatever the total count. Ties in inertia go to
    the lowest restart index.
    """
    X = np.asarray(M, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if n < k:
        raise ConfigError(f"need at least k={k} points, got {n}")
    if restarts < 1:
        raise ConfigError("restarts must be >= 1")
    best = None
    for r in range(restarts):
        rng = philox_stream(seed, _RESTART_STREAM_BASE + r)
        init = X[kmeans_plusplus(X, k, rng)]
        centers, labels, inertia, n_iter, hist = lloyd(X, init)
        if best is None or inertia < best.inertia:
            best = KMeansModel(centers, inertia, n_iter, labels, r, hist)
    return best
