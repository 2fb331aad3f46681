"""Decision-space decomposition by spectral clustering of an epsilon graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from .core import ConsistencyError, ContractViolation, RngStream, as_matrix

log = logging.getLogger(__name__)

ZERO_EIGENVALUE_TOL = 1e-8


@dataclass(frozen=True)
class NeighborGraph:
    adjacency: np.ndarray
    epsilon: float

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def degree(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)


@dataclass(frozen=True)
class ClusterLabeling:
    labels: np.ndarray
    k: int

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)


def build_graph(points, epsilon: float) -> NeighborGraph:
    if not epsilon > 0:
        raise ContractViolation(f"epsilon must be positive, got {epsilon}")
    P = as_matrix(points)
    A = cdist(P, P) < epsilon
    np.fill_diagonal(A, False)
    return NeighborGraph(adjacency=A, epsilon=float(epsilon))


def laplacian_sym(g: NeighborGraph) -> np.ndarray:
    """``I - D^-1/2 A D^-1/2``; isolated nodes keep a unit diagonal entry."""
    deg = g.degree.astype(float)
    inv_sqrt = np.zeros_like(deg)
    np.divide(1.0, np.sqrt(deg), out=inv_sqrt, where=deg > 0)
    return np.eye(g.n) - inv_sqrt[:, None] * g.adjacency * inv_sqrt[None, :]


def component_labels(g: NeighborGraph) -> tuple[int, np.ndarray]:
    return connected_components(g.adjacency, directed=False)


def _smallest_eigenpairs(L: np.ndarray, count: int):
    count = min(count, L.shape[0])
    try:
        return scipy.linalg.eigh(L, subset_by_index=[0, count - 1], driver="evr")
    except np.linalg.LinAlgError:
        # MRRR can give up on heavily clustered spectra; divide and conquer does not
        log.debug("evr driver failed on a %d-node Laplacian; using the full solver", L.shape[0])
        evals, evecs = scipy.linalg.eigh(L, driver="evd")
        return evals[:count], evecs[:, :count]


def _check_zero_multiplicity(evals: np.ndarray, expected: int, strict: bool) -> None:
    zeros = int(np.sum(evals < ZERO_EIGENVALUE_TOL))
    # evals holds only the smallest expected + 1 eigenvalues; one extra is
    # enough to tell "exactly expected" apart from "more than expected"
    if zeros != expected:
        msg = f"zero-eigenvalue multiplicity {zeros} disagrees with {expected} connected components"
        if strict:
            raise ConsistencyError(msg)
        log.warning(msg)


def count_components(g: NeighborGraph, strict: bool = True) -> int:
    """Connected components, cross-checked against the Laplacian spectrum.

    Isolated nodes are counted directly; the remaining subgraph must have
    one zero eigenvalue of its normalized Laplacian per component.  The
    combinatorial count is returned.
    """
    n_comp, _ = component_labels(g)
    active = g.degree > 0
    n_iso = int(np.sum(~active))
    if active.any():
        sub = NeighborGraph(g.adjacency[np.ix_(active, active)], g.epsilon)
        expected = n_comp - n_iso
        evals = _smallest_eigenpairs(laplacian_sym(sub), expected + 1)[0]
        _check_zero_multiplicity(evals, expected, strict)
    return n_comp


def kmeans(
    data: np.ndarray,
    k: int,
    rng: RngStream,
    max_iter: int = 100,
    tol: float = 1e-9,
) -> np.ndarray:
    """Lloyd's k-means with k-means++ seeding; returns labels in ``[0, k)``."""
    n = data.shape[0]
    if k >= n:
        return np.arange(n)
    centers = np.empty((k, data.shape[1]))
    centers[0] = data[rng.integers(n)]
    d2 = np.sum((data - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centers[c] = data[idx]
        d2 = np.minimum(d2, np.sum((data - centers[c]) ** 2, axis=1))

    labels = np.zeros(n, dtype=np.intp)
    for _ in range(max_iter):
        dist = cdist(data, centers, "sqeuclidean")
        labels = np.argmin(dist, axis=1)
        counts = np.bincount(labels, minlength=k)
        for c in np.flatnonzero(counts == 0):
            # empty cluster: take the point farthest from its own center
            own = dist[np.arange(n), labels]
            donors = np.bincount(labels, minlength=k)[labels] > 1
            far = int(np.argmax(np.where(donors, own, -1.0)))
            labels[far] = c
            dist[far, c] = 0.0
        new = np.array([data[labels == c].mean(axis=0) for c in range(k)])
        shift = float(np.max(np.linalg.norm(new - centers, axis=1)))
        centers = new
        if shift < tol:
            break
    return labels


def _canonical(labels: np.ndarray) -> tuple[np.ndarray, int]:
    """Renumber clusters by first appearance so ids are stable and dense."""
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty(order.size, dtype=np.intp)
    remap[order] = np.arange(order.size)
    uniq = np.unique(labels)
    return remap[np.searchsorted(uniq, labels)], order.size


def spectral_cluster(points, epsilon: float, rng: RngStream, strict: bool = True) -> ClusterLabeling:
    """Partition points into as many clusters as the epsilon graph has components.

    Non-isolated points are embedded with eigenvectors 2..k of the
    normalized Laplacian and grouped by k-means; isolated points become
    singleton clusters.  Cluster ids are numbered by first member.
    """
    P = as_matrix(points)
    n = P.shape[0]
    if n == 0:
        raise ContractViolation("cannot cluster an empty set")
    g = build_graph(P, epsilon)
    n_comp, _ = component_labels(g)
    active = g.degree > 0
    labels = np.empty(n, dtype=np.intp)
    n_iso = int(np.sum(~active))
    k_active = n_comp - n_iso
    if k_active:
        idx = np.flatnonzero(active)
        sub = NeighborGraph(g.adjacency[np.ix_(idx, idx)], g.epsilon)
        L = laplacian_sym(sub)
        if k_active == 1:
            evals = _smallest_eigenpairs(L, 2)[0]
            _check_zero_multiplicity(evals, 1, strict)
            labels[idx] = 0
        else:
            evals, evecs = _smallest_eigenpairs(L, k_active + 1)
            _check_zero_multiplicity(evals, k_active, strict)
            embedding = evecs[:, 1:k_active]
            labels[idx] = kmeans(embedding, k_active, rng)
    labels[~active] = k_active + np.arange(n_iso)
    labels, k = _canonical(labels)
    return ClusterLabeling(labels=labels, k=k)
