"""Steady-state survival: one child in, one candidate out."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import Candidate, Population, RngStream
from .ranking import last_front, non_dominated_sort, special_crowding_distance
from .refvec import PbiConfig, ReferenceVectorSet, pbi_rows
from .spectral import spectral_cluster

log = logging.getLogger(__name__)


class Variant(str, Enum):
    LORD = "lord"
    LORD2 = "lord2"


@dataclass
class FilterContext:
    refs: ReferenceVectorSet
    epsilon: float
    pbi_cfg: PbiConfig = field(default_factory=PbiConfig)
    variant: Variant = Variant.LORD
    strict: bool = True
    fallbacks: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


def round_robin_order(labels: np.ndarray, scd: np.ndarray) -> np.ndarray:
    """Interleave clusters, least crowded first.

    Round r takes the r-th highest-SCD member of every cluster that still
    has one, visiting clusters in ascending id.  Within a cluster, SCD
    ties go to the lower index.
    """
    labels = np.asarray(labels)
    scd = np.asarray(scd, dtype=float)
    per_cluster = []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        per_cluster.append((c, idx[np.argsort(-scd[idx], kind="stable")]))
    order = []
    depth = max(len(idx) for _, idx in per_cluster)
    for r in range(depth):
        order.extend(idx[r] for _, idx in per_cluster if r < len(idx))
    return np.array(order, dtype=np.intp)


def pick_lord_deletion(order: np.ndarray, member_assoc: np.ndarray, occupancy: np.ndarray) -> tuple[int, bool]:
    """Scan the sorted set from its most crowded end for a shared sub-space.

    Returns the position (into ``member_assoc``) to delete and whether the
    all-singleton fallback was taken.
    """
    for j in order[::-1]:
        if occupancy[member_assoc[j]] > 1:
            return int(j), False
    return int(order[-1]), True


def select_deletion_lord(
    X: np.ndarray,
    F: np.ndarray,
    assoc: np.ndarray,
    ctx: FilterContext,
    rng: RngStream,
) -> int:
    """Index (into the merged set) that the LORD filter removes."""
    nd = last_front(non_dominated_sort(F))
    if nd.size == 1:
        return int(nd[0])
    labeling = spectral_cluster(X[nd], ctx.epsilon, rng, strict=ctx.strict)
    scd = np.empty(nd.size)
    for c in range(labeling.k):
        members = labeling.members(c)
        scd[members] = special_crowding_distance(X[nd[members]], F[nd[members]])
    order = round_robin_order(labeling.labels, scd)
    occupancy = np.bincount(assoc, minlength=ctx.refs.n_dir)
    pos, fell_back = pick_lord_deletion(order, assoc[nd], occupancy)
    if fell_back:
        ctx.fallbacks += 1
    return int(nd[pos])


def deletion_candidates(assoc: np.ndarray, pbi_values: np.ndarray) -> np.ndarray:
    """Worst-PBI member of every sub-space holding at least two candidates."""
    n = assoc.size
    order = np.lexsort((np.arange(n), -pbi_values, assoc))
    first = np.ones(n, dtype=bool)
    first[1:] = assoc[order][1:] != assoc[order][:-1]
    counts = np.bincount(assoc)
    heads = order[first]
    return np.sort(heads[counts[assoc[heads]] > 1])


def pick_lord2_deletion(labels: np.ndarray, a_del: np.ndarray, pbi_values: np.ndarray) -> int:
    """Largest cluster touching ``a_del`` (first wins ties), then its worst PBI."""
    best_cluster, best_size = -1, 0
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if np.intersect1d(members, a_del).size and best_size < members.size:
            best_cluster, best_size = c, members.size
    pool = a_del[labels[a_del] == best_cluster]
    # argmax keeps the first maximum, i.e. the lower index
    return int(pool[np.argmax(pbi_values[pool])])


def select_deletion_lord2(
    X: np.ndarray,
    F: np.ndarray,
    assoc: np.ndarray,
    ctx: FilterContext,
    rng: RngStream,
) -> int:
    ideal = ctx.pbi_cfg.ideal if ctx.pbi_cfg.ideal is not None else F.min(axis=0)
    values = pbi_rows(F, ctx.refs.unit[assoc], ideal, ctx.pbi_cfg.theta)
    a_del = deletion_candidates(assoc, values)
    if a_del.size == 0:
        ctx.fallbacks += 1
        log.debug("every sub-space is a singleton; deleting the global worst PBI")
        return int(np.argmax(values))
    labeling = spectral_cluster(X, ctx.epsilon, rng, strict=ctx.strict)
    return pick_lord2_deletion(labeling.labels, a_del, values)


def _merged(pop: Population, child: Candidate):
    members = list(pop.members) + [child]
    X = np.array([m.x for m in members])
    F = np.array([m.f for m in members])
    assoc = np.fromiter((m.assoc for m in members), dtype=np.intp, count=len(members))
    return members, X, F, assoc


def _drop(members: list[Candidate], idx: int) -> Population:
    return Population(members[:idx] + members[idx + 1 :])


def filter_lord(pop: Population, child: Candidate, ctx: FilterContext, rng: RngStream) -> Population:
    members, X, F, assoc = _merged(pop, child)
    return _drop(members, select_deletion_lord(X, F, assoc, ctx, rng))


def filter_lord2(pop: Population, child: Candidate, ctx: FilterContext, rng: RngStream) -> Population:
    members, X, F, assoc = _merged(pop, child)
    return _drop(members, select_deletion_lord2(X, F, assoc, ctx, rng))


def apply_filter(pop: Population, child: Candidate, ctx: FilterContext, rng: RngStream) -> Population:
    if ctx.variant is Variant.LORD:
        return filter_lord(pop, child, ctx, rng)
    return filter_lord2(pop, child, ctx, rng)
