"""Shared data containers and their validation.

Views are stored features-by-samples: view ``v`` is a ``(d_v, n)`` array, so
sample ``j`` of view ``v`` is ``views[v][:, j]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np


class DSCMCError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(DSCMCError, ValueError):
    pass


class NonFinite(DSCMCError, ValueError):
    pass


class BadLabels(DSCMCError, ValueError):
    pass


class ConfigError(DSCMCError, ValueError):
    pass


class PadRankError(DSCMCError, ValueError):
    """A view has fewer features than the latent dimension ``k``."""


class NotPositiveDefinite(DSCMCError, np.linalg.LinAlgError):
    pass


class LengthMismatch(DSCMCError, ValueError):
    pass


MODES = ("full", "only_p", "only_w", "frobenius_w")


@dataclass(frozen=True)
class MultiViewDataset:
    """``V`` dense views over the same ``n`` samples.

    Parameters
    ----------
    views : list of ndarray
        View ``v`` has shape ``(d_v, n)``.
    k : int
        Number of clusters.
    labels : ndarray of int, optional
        Ground-truth labels in ``[0, k)``.
    """

    views: List[np.ndarray]
    k: int
    labels: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return int(self.views[0].shape[1])

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def dims(self) -> List[int]:
        return [int(x.shape[0]) for x in self.views]

    @property
    def c(self) -> int:
        return sum(self.dims)


def validate_dataset(d: MultiViewDataset) -> None:
    """Raise if ``d`` breaks any dataset invariant; return None otherwise."""
    if len(d.views) == 0:
        raise DimensionMismatch("dataset has no views")
    if int(d.k) < 2:
        raise ConfigError(f"k must be > 1, got {d.k}")
    n = None
    for v, x in enumerate(d.views):
        x = np.asarray(x)
        if x.ndim != 2:
            raise DimensionMismatch(f"view {v} is not a matrix (ndim={x.ndim})")
        if x.shape[0] < 1:
            raise DimensionMismatch(f"view {v} has no features")
        if n is None:
            n = x.shape[1]
        elif x.shape[1] != n:
            raise DimensionMismatch(
                f"view {v} has {x.shape[1]} samples, view 0 has {n}")
        if not np.all(np.isfinite(x)):
            raise NonFinite(f"view {v} contains NaN or Inf")
    if n < d.k:
        raise DimensionMismatch(f"n={n} is smaller than k={d.k}")
    if d.labels is not None:
        y = np.asarray(d.labels)
        if y.shape != (n,):
            raise BadLabels(f"labels have shape {y.shape}, expected ({n},)")
        if not np.issubdtype(y.dtype, np.integer):
            raise BadLabels("labels must be integers")
        if y.min() < 0 or y.max() >= d.k:
            raise BadLabels(f"labels must lie in [0, {d.k})")
        present = np.bincount(y, minlength=d.k)
        missing = np.flatnonzero(present[: y.max() + 1] == 0)
        if missing.size:
            raise BadLabels(f"label ids {missing.tolist()} have no samples")


@dataclass(frozen=True)
class HyperParams:
    """Regularization weights and run settings.

    ``m`` defaults to ``k`` when left as None; it may never exceed ``k``
    because ``A`` (``k x m``) must have orthonormal columns.
    ``paper_hessian`` replaces the Z-step curvature ``V + lambda1 V + lambda2``
    with ``V + lambda1 + lambda2``; the two agree only for a single view.
    """

    lambda1: float = 0.1
    lambda2: float = 0.1
    lambda3: float = 0.1
    m: Optional[int] = None
    max_iter: int = 20
    tol: float = 1e-6
    seed: int = 0
    mode: str = "full"
    restarts: int = 50
    paper_hessian: bool = False

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3"):
            val = getattr(self, name)
            if not np.isfinite(val) or val < 0:
                raise ConfigError(f"{name} must be finite and >= 0, got {val}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.max_iter) < 1:
            raise ConfigError("max_iter must be a positive integer")
        if self.tol < 0:
            raise ConfigError("tol must be >= 0")
        if int(self.restarts) < 1:
            raise ConfigError("restarts must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if self.m is not None and int(self.m) < 1:
            raise ConfigError("anchor count m must be >= 1")

    def anchors(self, k: int) -> int:
        """Resolve the anchor count for ``k`` clusters."""
        m = k if self.m is None else int(self.m)
        if m > k:
            raise ConfigError(
                f"anchor count m={m} exceeds k={k}: A is k x m and must satisfy "
                f"A^T A = I_m, which needs m <= k")
        return m


@dataclass
class ModelState:
    """The optimization variables.

    ``P[v]`` is ``(d_v, k)``, ``W[v]`` is ``(k, d_v)``, ``A`` is ``(k, m)``
    and ``Z`` is ``(m, n)`` with simplex columns.
    """

    P: List[np.ndarray]
    W: List[np.ndarray]
    A: np.ndarray
    Z: np.ndarray
    iter: int = 0

    def copy(self) -> "ModelState":
        return ModelState([p.copy() for p in self.P], [w.copy() for w in self.W],
                          self.A.copy(), self.Z.copy(), self.iter)


def check_state(s: ModelState, orth_tol: float = 1e-8,
                simplex_tol: float = 1e-10) -> None:
    """Assert orthonormality of ``P``/``A`` and simplex columns of ``Z``."""
    for v, p in enumerate(s.P):
        err = np.abs(p.T @ p - np.eye(p.shape[1])).max()
        if err > orth_tol:
            raise AssertionError(f"P[{v}] not orthonormal (err {err:.3g})")
    err = np.abs(s.A.T @ s.A - np.eye(s.A.shape[1])).max()
    if err > orth_tol:
        raise AssertionError(f"A not orthonormal (err {err:.3g})")
    if s.Z.min() < 0:
        raise AssertionError("Z has negative entries")
    err = np.abs(s.Z.sum(axis=0) - 1).max()
    if err > simplex_tol:
        raise AssertionError(f"Z columns off the simplex (err {err:.3g})")


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    total: float
    reconstruction: float
    consistency: float
    z_penalty: float
    w_penalty: float
    wall_ms: float


@dataclass
class ConvergenceTrace:
    records: List[TraceRecord] = field(default_factory=list)
    initial: Optional[float] = None

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def totals(self) -> np.ndarray:
        return np.array([r.total for r in self.records])

    def append(self, rec: TraceRecord) -> None:
        self.records.append(rec)


@dataclass
class ClusteringResult:
    labels: np.ndarray
    embedding: np.ndarray
    trace: ConvergenceTrace
    kmeans_objective: float
    metrics: Optional[dict] = None
    state: Optional[ModelState] = None
    timing: dict = field(default_factory=dict)


def as_views(views: Sequence[np.ndarray]) -> List[np.ndarray]:
    return [np.ascontiguousarray(x, dtype=np.float64) for x in views]
