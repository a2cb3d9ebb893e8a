"""Alternating minimization of the dual-space co-training objective.

The model couples, for every view ``v``, a reconstruction in the original
space and a consistency term in the latent space::

    sum_v ||X_v - P_v A Z||^2 + l1 sum_v ||W_v X_v - A Z||^2
        + l2 ||Z||^2 + l3 sum_v ||W_v||_{2,1}

subject to ``P_v^T P_v = I``, ``A^T A = I`` and ``Z`` having simplex
columns. Each block has an exact (or majorize-minimize) update, so a sweep
never increases the objective.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .core import (ConvergenceTrace, HyperParams, ModelState, MultiViewDataset,
                   NotPositiveDefinite, PadRankError, TraceRecord,
                   validate_dataset, DimensionMismatch)
from .numerics import (l21_norm, l21_reweight, orthogonal_procrustes,
                       project_simplex_columns, spd_solve, svd_thin)


@dataclass(frozen=True)
class SolverConfig:
    hyper: HyperParams = field(default_factory=HyperParams)
    record_trace: bool = True
    parallel_views: bool = False
    parallel_columns: bool = False
    threads: Optional[int] = None


def worker_count(threads: Optional[int] = None) -> int:
    """Thread cap: explicit value, else ``DSCMC_THREADS`` (0 means all cores)."""
    if threads is None:
        threads = int(os.environ.get("DSCMC_THREADS", "0") or 0)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def _weights(h: HyperParams) -> Tuple[float, float, float]:
    """(reconstruction weight, effective lambda1, effective lambda3) for the mode."""
    if h.mode == "only_p":
        return 1.0, 0.0, 0.0
    if h.mode == "only_w":
        return 0.0, h.lambda1, h.lambda3
    return 1.0, h.lambda1, h.lambda3


def _w_penalty(W: np.ndarray, h: HyperParams) -> float:
    if h.mode == "frobenius_w":
        return float(np.sum(W * W))
    return l21_norm(W)


def _check_shapes(d: MultiViewDataset, s: ModelState):
    k, m = s.A.shape
    if s.Z.shape != (m, d.n) or len(s.P) != d.n_views or len(s.W) != d.n_views:
        raise DimensionMismatch("model state does not match the dataset")
    for x, p, w in zip(d.views, s.P, s.W):
        if p.shape != (x.shape[0], k) or w.shape != (k, x.shape[0]):
            raise DimensionMismatch("P/W shapes do not match the views")


def objective(d: MultiViewDataset, s: ModelState, h: HyperParams):
    """Objective value and its four terms.

    Returns
    -------
    total : float
    terms : tuple of float
        ``(reconstruction, consistency, z_penalty, w_penalty)``, each already
        multiplied by its weight.
    """
    _check_shapes(d, s)
    r, lam1, lam3 = _weights(h)
    AZ = s.A @ s.Z
    rec = cons = pen = 0.0
    for x, p, w in zip(d.views, s.P, s.W):
        if r:
            res = x - p @ AZ
            rec += float(np.sum(res * res))
        if lam1:
            res = w @ x - AZ
            cons += float(np.sum(res * res))
        if lam3:
            pen += _w_penalty(w, h)
    terms = (r * rec, lam1 * cons, h.lambda2 * float(np.sum(s.Z * s.Z)), lam3 * pen)
    return float(sum(terms)), terms


def init_state(d: MultiViewDataset, h: HyperParams, seed: int = 0) -> ModelState:
    """Feasible deterministic starting point.

    ``A`` is the leading ``k x m`` slice of the identity, ``Z`` is uniform,
    ``W`` is zero and ``P_v`` holds the top-``k`` left singular vectors of
    ``X_v``. Nothing here is random; ``seed`` is accepted for interface
    symmetry with the rest of the pipeline.
    """
    k = d.k
    m = h.anchors(k)
    P = []
    for v, x in enumerate(d.views):
        if x.shape[0] < k:
            raise PadRankError(
                f"view {v} has {x.shape[0]} features but k={k}; P_v is d_v x k with "
                f"orthonormal columns, so every view needs at least k features")
        P.append(np.ascontiguousarray(svd_thin(x).U[:, :k]))
    W = [np.zeros((k, x.shape[0])) for x in d.views]
    A = np.eye(k, m)
    Z = np.full((m, d.n), 1.0 / m)
    return ModelState(P, W, A, Z, 0)


class _Runner:
    """Per-fit cache of view Gram matrices plus an optional thread pool."""

    def __init__(self, d: MultiViewDataset, cfg: Optional[SolverConfig] = None):
        cfg = cfg or SolverConfig()
        self.d = d
        self.cfg = cfg
        self._grams: List[Optional[np.ndarray]] = [None] * d.n_views
        n_workers = worker_count(cfg.threads)
        use_pool = (cfg.parallel_views or cfg.parallel_columns) and n_workers > 1
        self.pool = ThreadPoolExecutor(n_workers) if use_pool else None
        self.n_workers = n_workers

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def gram(self, v: int) -> np.ndarray:
        if self._grams[v] is None:
            x = self.d.views[v]
            self._grams[v] = x @ x.T
        return self._grams[v]

    def map_views(self, fn: Callable[[int], np.ndarray]) -> list:
        idx = range(self.d.n_views)
        if self.pool is not None and self.cfg.parallel_views:
            return list(self.pool.map(fn, idx))
        return [fn(v) for v in idx]

    def project_columns(self, Y: np.ndarray) -> np.ndarray:
        if self.pool is None or not self.cfg.parallel_columns:
            return project_simplex_columns(Y)
        chunks = np.array_split(np.arange(Y.shape[1]), self.n_workers)
        parts = self.pool.map(lambda c: project_simplex_columns(Y[:, c]), chunks)
        return np.concatenate(list(parts), axis=1)


def update_p(d: MultiViewDataset, s: ModelState, h: HyperParams,
             runner: Optional[_Runner] = None) -> List[np.ndarray]:
    """Per-view Procrustes step ``P_v = argmax tr(P^T X_v Z^T A^T)``."""
    runner = runner or _Runner(d)
    ZtAt = (s.A @ s.Z).T

    def one(v):
        return orthogonal_procrustes(d.views[v] @ ZtAt)

    return runner.map_views(one)


def update_a(d: MultiViewDataset, s: ModelState, h: HyperParams,
             runner: Optional[_Runner] = None) -> np.ndarray:
    """Procrustes step for the anchor basis, target summed over views in order."""
    r, lam1, _ = _weights(h)
    B = np.zeros_like(s.A)
    for x, p, w in zip(d.views, s.P, s.W):
        XZt = x @ s.Z.T
        if r:
            B += p.T @ XZt
        if lam1:
            B += lam1 * (w @ XZt)
    return orthogonal_procrustes(B)


def update_w(d: MultiViewDataset, s: ModelState, h: HyperParams,
             runner: Optional[_Runner] = None) -> List[np.ndarray]:
    """One reweighted least-squares step per view.

    Solves ``W (l1 X X^T + l3 diag(phi)) = l1 A Z X^T`` with ``phi`` taken
    from the current ``W`` (or all ones for the Frobenius ablation). A step
    that would raise the true l2,1 subproblem is rejected and ``W_v`` kept.
    """
    runner = runner or _Runner(d)
    _, lam1, lam3 = _weights(h)
    AZ = s.A @ s.Z
    k = s.A.shape[0]

    def one(v):
        x = d.views[v]
        if lam1 == 0.0:
            return np.zeros((k, x.shape[0]))
        if h.mode == "frobenius_w":
            phi = np.ones(x.shape[0])
        else:
            phi = l21_reweight(s.W[v])
        M = lam1 * runner.gram(v)
        M[np.diag_indices_from(M)] += lam3 * phi
        rhs = lam1 * (x @ AZ.T)
        try:
            new = np.ascontiguousarray(spd_solve(M, rhs).T)
        except NotPositiveDefinite:
            if lam3 != 0.0:
                raise
            # unregularized and X_v X_v^T singular: minimum-norm least squares
            return np.linalg.lstsq(x.T, AZ.T, rcond=None)[0].T
        if lam3 and h.mode != "frobenius_w":
            # the eps floor on phi breaks the majorization for near-zero
            # columns; never accept a step that raises the true subproblem
            def sub(w):
                res = w @ x - AZ
                return lam1 * float(np.sum(res * res)) + lam3 * l21_norm(w)
            if sub(new) > sub(s.W[v]):
                return s.W[v].copy()
        return new

    return runner.map_views(one)


def update_z(d: MultiViewDataset, s: ModelState, h: HyperParams,
             runner: Optional[_Runner] = None) -> np.ndarray:
    """Column-wise simplex projection of the unconstrained minimizer."""
    runner = runner or _Runner(d)
    r, lam1, _ = _weights(h)
    V = d.n_views
    if h.paper_hessian:
        coef = r * V + lam1 + h.lambda2
    else:
        coef = r * V + lam1 * V + h.lambda2
    if coef == 0.0:
        return s.Z.copy()
    T = np.zeros_like(s.Z)
    At = s.A.T
    for x, p, w in zip(d.views, s.P, s.W):
        C = r * p.T + lam1 * w if lam1 else r * p.T
        T += At @ (C @ x)
    return runner.project_columns(T / coef)


def fit(d: MultiViewDataset, cfg: Optional[SolverConfig] = None,
        init: Optional[ModelState] = None,
        callback: Optional[Callable[[str, ModelState], None]] = None):
    """Run the P, A, W, Z sweeps until the relative objective change drops
    below ``tol`` or ``max_iter`` sweeps have run.

    Parameters
    ----------
    d : MultiViewDataset
    cfg : SolverConfig, optional
    init : ModelState, optional
        Starting point; defaults to :func:`init_state`.
    callback : callable, optional
        Called as ``callback(block_name, state)`` after every block update.

    Returns
    -------
    state : ModelState
    trace : ConvergenceTrace
        One record per sweep. ``trace.initial`` holds the starting objective.
    """
    cfg = cfg or SolverConfig()
    h = cfg.hyper
    validate_dataset(d)
    s = init.copy() if init is not None else init_state(d, h, h.seed)
    _check_shapes(d, s)
    trace = ConvergenceTrace()
    prev, _ = objective(d, s, h)
    trace.initial = prev
    runner = _Runner(d, cfg)
    try:
        for it in range(1, h.max_iter + 1):
            t0 = time.perf_counter()
            if h.mode != "only_w":
                s.P = update_p(d, s, h, runner)
                if callback:
                    callback("P", s)
            s.A = update_a(d, s, h, runner)
            if callback:
                callback("A", s)
            if h.mode != "only_p":
                s.W = update_w(d, s, h, runner)
                if callback:
                    callback("W", s)
            s.Z = update_z(d, s, h, runner)
            if callback:
                callback("Z", s)
            s.iter = it
            wall = (time.perf_counter() - t0) * 1e3
            total, terms = objective(d, s, h)
            if cfg.record_trace:
                trace.append(TraceRecord(it, total, *terms, wall))
            if abs(prev - total) / max(prev, 1e-12) < h.tol:
                break
            prev = total
    finally:
        runner.close()
    return s, trace
