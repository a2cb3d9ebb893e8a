"""Deterministic synthetic multi-view data.

Random numbers come from numpy's Philox-4x64 counter-based generator. Every
(seed, purpose) pair gets its own stream by using the 128-bit Philox key
``(seed, stream_id)`` with the counter starting at zero:

* stream 0: label permutation
* stream ``1 + 2 v``: cluster means of view ``v``
* stream ``2 + 2 v``: sample noise (or the basis ``P_v`` for planted data)

so a view's data does not depend on how many other views are generated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .core import ConfigError, ModelState, MultiViewDataset


def philox_stream(seed: int, stream: int) -> np.random.Generator:
    """Generator for one named stream of a 64-bit seed."""
    key = np.array([int(seed) % 2**64, int(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class BlobSpec:
    n: int = 300
    k: int = 5
    dims: Tuple[int, ...] = (10, 15, 20)
    separation: float = 10.0
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.n >= self.k >= 2:
            raise ConfigError(f"need n >= k >= 2, got n={self.n}, k={self.k}")
        if len(self.dims) == 0 or min(self.dims) < self.k:
            raise ConfigError(f"every view dimension must be >= k={self.k}")
        if self.separation < 0:
            raise ConfigError("separation must be >= 0")
        if not self.sigma > 0:
            raise ConfigError("sigma must be > 0")


def balanced_labels(n: int, k: int, seed: int) -> np.ndarray:
    """Class sizes differ by at most one; order is a seeded permutation."""
    return philox_stream(seed, 0).permutation(np.arange(n) % k)


def _spread_means(rng: np.random.Generator, k: int, dim: int,
                  min_dist: float) -> np.ndarray:
    half = max(min_dist, 1.0)
    while True:
        for _ in range(1000):
            mu = rng.uniform(-half, half, size=(k, dim))
            diff = mu[:, None, :] - mu[None, :, :]
            dist = np.sqrt(np.sum(diff ** 2, axis=-1))
            if np.all(dist[np.triu_indices(k, 1)] >= min_dist):
                return mu
        half *= 2.0


def make_blobs(spec: BlobSpec) -> MultiViewDataset:
    """Gaussian clusters in every view, sharing one label vector.

    Per view, ``k`` means are drawn by rejection sampling until all pairs are
    at least ``separation * sigma`` apart; samples are
    ``mean[label] + sigma * N(0, I)``.
    """
    labels = balanced_labels(spec.n, spec.k, spec.seed)
    views = []
    for v, dim in enumerate(spec.dims):
        mu = _spread_means(philox_stream(spec.seed, 1 + 2 * v), spec.k, dim,
                           spec.separation * spec.sigma)
        noise = philox_stream(spec.seed, 2 + 2 * v).standard_normal((dim, spec.n))
        views.append(mu[labels].T + spec.sigma * noise)
    return MultiViewDataset(views, spec.k, labels)


def make_planted(n: int, k: int, dims: Sequence[int], seed: int = 0,
                 smoothing: float = 0.0) -> Tuple[MultiViewDataset, ModelState]:
    """Exact-fit instance ``X_v = P_v A Z`` with one-hot ``Z`` columns.

    ``smoothing`` mixes each one-hot column with the uniform vector, which
    keeps ``Z`` on the simplex. The returned state (with ``W = 0``) has zero
    objective when all lambdas are zero.
    """
    if not n >= k >= 2 or min(dims) < k:
        raise ConfigError("need n >= k >= 2 and every dimension >= k")
    if not 0.0 <= smoothing <= 1.0:
        raise ConfigError("smoothing must be in [0, 1]")
    labels = balanced_labels(n, k, seed)
    Z = np.zeros((k, n))
    Z[labels, np.arange(n)] = 1.0
    if smoothing:
        Z = (1.0 - smoothing) * Z + smoothing / k
    A = np.eye(k)
    P, views = [], []
    for v, dim in enumerate(dims):
        g = philox_stream(seed, 2 + 2 * v).standard_normal((dim, k))
        q, r = np.linalg.qr(g)
        q = q * np.sign(np.diag(r))
        P.append(q)
        views.append(q @ A @ Z)
    W = [np.zeros((k, dim)) for dim in dims]
    return MultiViewDataset(views, k, labels), ModelState(P, W, A, Z, 0)
