"""External clustering indices: ACC, NMI, pairwise F-score and ARI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import LengthMismatch, NonFinite


@dataclass(frozen=True)
class Contingency:
    table: np.ndarray

    @property
    def rows(self) -> np.ndarray:
        return self.table.sum(axis=1)

    @property
    def cols(self) -> np.ndarray:
        return self.table.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.table.sum())


def contingency(y_true, y_pred) -> Contingency:
    """Counts ``table[i, j]`` of samples with true class ``i`` and cluster ``j``.

    Labels may use any alphabet; they are densified in sorted order.
    """
    a = np.asarray(y_true).ravel()
    b = np.asarray(y_pred).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"label vectors have lengths {a.size} and {b.size}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    r = ia.max() + 1 if ia.size else 0
    c = ib.max() + 1 if ib.size else 0
    table = np.zeros((r, c), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return Contingency(table)


def hungarian(cost) -> np.ndarray:
    """Permutation ``perm`` minimizing ``sum(cost[i, perm[i]])``."""
    cost = np.asarray(cost, dtype=np.float64)
    if not np.all(np.isfinite(cost)):
        raise NonFinite("cost matrix contains NaN or Inf")
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=np.int64)
    perm[rows] = cols
    return perm


def accuracy(y_true, y_pred) -> float:
    """Best one-to-one match between clusters and classes."""
    t = contingency(y_true, y_pred).table
    if t.size == 0:
        return 1.0
    size = max(t.shape)
    sq = np.zeros((size, size), dtype=np.int64)
    sq[: t.shape[0], : t.shape[1]] = t
    perm = hungarian(-sq)
    return float(sq[np.arange(size), perm].sum() / t.sum())


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(y_true, y_pred, average: str = "geometric") -> float:
    """Normalized mutual information (natural log).

    ``average`` selects the normalizer: ``"geometric"`` (sqrt of the entropy
    product) or ``"max"``.
    """
    ct = contingency(y_true, y_pred)
    t, n = ct.table, ct.n
    if n == 0:
        return 1.0
    hu, hv = _entropy(ct.rows, n), _entropy(ct.cols, n)
    if hu == 0.0 and hv == 0.0:
        return 1.0
    nz = t > 0
    pij = t[nz] / n
    outer = np.outer(ct.rows, ct.cols)[nz] / (n * n)
    mi = float(np.sum(pij * np.log(pij / outer)))
    if mi <= 0.0:
        return 0.0
    if average == "geometric":
        denom = np.sqrt(hu * hv)
    elif average == "max":
        denom = max(hu, hv)
    else:
        raise ValueError(f"unknown average {average!r}")
    return float(min(1.0, mi / denom))


def _pairs(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2


def ari(y_true, y_pred) -> float:
    """Adjusted Rand index (Hubert-Arabie)."""
    ct = contingency(y_true, y_pred)
    n = ct.n
    index = _pairs(ct.table).sum()
    a = _pairs(ct.rows).sum()
    b = _pairs(ct.cols).sum()
    total = n * (n - 1) / 2
    expected = a * b / total if total else 0.0
    maximum = (a + b) / 2
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))


def pairwise_fscore(y_true, y_pred) -> float:
    """Harmonic mean of pair precision and recall on same-cluster decisions."""
    ct = contingency(y_true, y_pred)
    tp = _pairs(ct.table).sum()
    pred_pairs = _pairs(ct.cols).sum()
    true_pairs = _pairs(ct.rows).sum()
    if pred_pairs == 0 or true_pairs == 0 or tp == 0:
        return 0.0
    precision = tp / pred_pairs
    recall = tp / true_pairs
    return float(2 * precision * recall / (precision + recall))


def evaluate(y_true, y_pred) -> dict:
    """All four indices keyed ``acc``, ``nmi``, ``fscore``, ``ari``."""
    return {
        "acc": accuracy(y_true, y_pred),
        "nmi": nmi(y_true, y_pred),
        "fscore": pairwise_fscore(y_true, y_pred),
        "ari": ari(y_true, y_pred),
    }
