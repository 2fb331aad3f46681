"""Pareto dominance, non-dominated sorting and crowding measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractViolation, as_matrix


def dominates(a, b) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ContractViolation(f"objective vectors differ in length: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def dominance_matrix(F) -> np.ndarray:
    """``D[i, j]`` is true when row ``i`` dominates row ``j``."""
    F = np.asarray(F, dtype=float)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


@dataclass(frozen=True)
class RankedPopulation:
    fronts: list[np.ndarray]
    rank: np.ndarray


def non_dominated_sort(F) -> RankedPopulation:
    F = np.atleast_2d(np.asarray(F, dtype=float))
    n = F.shape[0]
    if n == 0:
        raise ContractViolation("cannot sort an empty set")
    D = dominance_matrix(F)
    dominated_by = D.sum(axis=0)
    rank = np.full(n, -1, dtype=np.intp)
    remaining = np.ones(n, dtype=bool)
    fronts = []
    r = 0
    while remaining.any():
        front = np.flatnonzero(remaining & (dominated_by == 0))
        fronts.append(front)
        rank[front] = r
        remaining[front] = False
        dominated_by = dominated_by - D[front].sum(axis=0)
        r += 1
    return RankedPopulation(fronts=fronts, rank=rank)


def last_front(ranked: RankedPopulation) -> np.ndarray:
    return ranked.fronts[-1]


def crowding_distance(points) -> np.ndarray:
    """Per-point sum over dimensions of the range-normalised neighbour gap.

    The two extreme points of every dimension with nonzero range are
    infinite; a dimension whose values are all equal adds nothing.  Sets
    of one or two points are entirely boundary.
    """
    P = as_matrix(points)
    n = P.shape[0]
    if n <= 2:
        return np.full(n, np.inf)
    cd = np.zeros(n)
    for j in range(P.shape[1]):
        col = P[:, j]
        lo, hi = col.min(), col.max()
        if hi == lo:
            continue
        order = np.argsort(col, kind="stable")
        s = col[order]
        cd[order[1:-1]] += (s[2:] - s[:-2]) / (hi - lo)
        cd[order[0]] = np.inf
        cd[order[-1]] = np.inf
    return cd


def _finite_mean(v: np.ndarray) -> float:
    finite = v[np.isfinite(v)]
    return float(finite.mean()) if finite.size else np.inf


def special_crowding_distance(X, F) -> np.ndarray:
    """Combine decision- and objective-space crowding within one cluster.

    A member that is sparser than average in either space keeps the larger
    of its two distances; otherwise it keeps the smaller.  Averages skip
    infinite values and any infinite distance makes the result infinite.
    """
    cdx = crowding_distance(X)
    cdf = crowding_distance(F)
    avg_x = _finite_mean(cdx)
    avg_f = _finite_mean(cdf)
    sparse = (cdx > avg_x) | (cdf > avg_f)
    scd = np.where(sparse, np.maximum(cdx, cdf), np.minimum(cdx, cdf))
    scd[~(np.isfinite(cdx) & np.isfinite(cdf))] = np.inf
    return scd
