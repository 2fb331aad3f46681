"""Reference vectors on the unit simplex and the scalarizations built on them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .core import ConfigurationError, ContractViolation


@dataclass(frozen=True)
class ReferenceVectorSet:
    W: np.ndarray
    neighbors: np.ndarray
    unit: np.ndarray = field(repr=False)

    @property
    def n_dir(self) -> int:
        return self.W.shape[0]

    @property
    def m(self) -> int:
        return self.W.shape[1]


@dataclass
class PbiConfig:
    """Penalty factor plus the running ideal point of the run."""

    theta: float = 5.0
    ideal: np.ndarray | None = None

    def update(self, f) -> None:
        f = np.asarray(f, dtype=float)
        if self.ideal is None:
            self.ideal = f.copy()
        else:
            np.minimum(self.ideal, f, out=self.ideal)


def _compositions(total: int, parts: int) -> np.ndarray:
    # stars and bars: bar positions among total + parts - 1 slots
    rows = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(total + parts - 1 - prev - 1)
        rows.append(row)
    return np.array(rows, dtype=float)


def das_dennis_count(m: int, p1: int, p2: int = 0) -> int:
    return comb(p1 + m - 1, m - 1) + (comb(p2 + m - 1, m - 1) if p2 > 0 else 0)


def das_dennis(m: int, p1: int, p2: int = 0) -> ReferenceVectorSet:
    """Two-layer simplex lattice.

    The boundary layer holds every composition of ``p1`` into ``m`` parts
    scaled by ``1/p1``.  With ``p2 > 0`` an inner layer of ``p2``
    compositions is shrunk halfway toward the centroid and appended.
    """
    if m < 2:
        raise ConfigurationError(f"need at least 2 objectives, got {m}")
    if p1 < 1:
        raise ConfigurationError(f"p1 must be at least 1, got {p1}")
    if p2 < 0:
        raise ConfigurationError(f"p2 must be non-negative, got {p2}")
    W = _compositions(p1, m) / p1
    if p2 > 0:
        inner = _compositions(p2, m) / p2
        W = np.vstack([W, inner / 2.0 + 1.0 / (2.0 * m)])
    return reference_set(W)


def reference_set(W) -> ReferenceVectorSet:
    W = np.asarray(W, dtype=float)
    norms = np.linalg.norm(W, axis=1)
    if np.any(norms == 0):
        raise ContractViolation("reference vectors must be nonzero")
    nbr = neighborhood_rows(W) if W.shape[0] >= 2 else np.empty((W.shape[0], 0), dtype=np.intp)
    return ReferenceVectorSet(W=W, neighbors=nbr, unit=W / norms[:, None])


def neighborhood_rows(W) -> np.ndarray:
    """Row k lists every other index, nearest to ``W[k]`` first (ties: lower index)."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if n < 2:
        raise ContractViolation("need at least two reference vectors for a neighborhood")
    diff = W[:, None, :] - W[None, :, :]
    D = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    order = np.argsort(D, axis=1, kind="stable")
    keep = order != np.arange(n)[:, None]
    return order[keep].reshape(n, n - 1)


def _unit(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    norm = np.linalg.norm(w)
    if norm == 0:
        raise ContractViolation("direction vector has zero norm")
    return w / norm


def perpendicular_distance(f, w) -> float:
    f = np.asarray(f, dtype=float)
    u = _unit(w)
    return float(np.linalg.norm(f - np.dot(f, u) * u))


def perpendicular_distances(F, unit) -> np.ndarray:
    """``(n, n_dir)`` matrix of distances from each row of ``F`` to each unit direction."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    proj = F @ unit.T
    resid = F[:, None, :] - proj[:, :, None] * unit[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", resid, resid))


def associate(f, refs: ReferenceVectorSet) -> int:
    return int(associate_all(np.asarray(f, dtype=float)[None, :], refs)[0])


def associate_all(F, refs: ReferenceVectorSet) -> np.ndarray:
    # argmin keeps the first minimum, which is the lower-index tie rule
    return np.argmin(perpendicular_distances(F, refs.unit), axis=1)


def pbi(f, w, cfg: PbiConfig) -> float:
    f = np.asarray(f, dtype=float)
    ideal = np.zeros_like(f) if cfg.ideal is None else cfg.ideal
    u = _unit(w)
    g = f - ideal
    d1 = float(np.dot(g, u))
    d2 = float(np.linalg.norm(g - d1 * u))
    return d1 + cfg.theta * d2


def pbi_rows(F, unit_rows, ideal, theta: float) -> np.ndarray:
    """PBI of ``F[i]`` against its own direction ``unit_rows[i]``."""
    G = np.asarray(F, dtype=float) - ideal
    d1 = np.einsum("ij,ij->i", G, unit_rows)
    R = G - d1[:, None] * unit_rows
    d2 = np.sqrt(np.einsum("ij,ij->i", R, R))
    return d1 + theta * d2


TABLE2_DIVISIONS = {3: (23, 0), 5: (8, 0), 8: (5, 2), 10: (4, 3)}


def default_divisions(m: int, n_pop: int) -> tuple[int, int]:
    """Divisions giving roughly ``n_pop`` directions.

    Two objectives use ``p1 = n_pop - 1``.  Otherwise the tabulated
    two-layer setting is used when its count matches ``n_pop`` exactly,
    and a single layer with the closest count (ties to fewer) otherwise.
    """
    if m == 2:
        return n_pop - 1, 0
    if m in TABLE2_DIVISIONS and das_dennis_count(m, *TABLE2_DIVISIONS[m]) == n_pop:
        return TABLE2_DIVISIONS[m]
    best, best_gap = 1, None
    p = 1
    while True:
        count = das_dennis_count(m, p)
        gap = abs(count - n_pop)
        if best_gap is None or gap < best_gap:
            best, best_gap = p, gap
        if count >= n_pop:
            break
        p += 1
    return best, 0
