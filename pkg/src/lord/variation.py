"""Child creation: mating pools, DE/rand/1/bin, SBX, polynomial mutation.

Random draws happen in a fixed order inside every operator so that a run
is reproducible from its seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .core import BoxBounds, Candidate, Population, RngStream
from .refvec import ReferenceVectorSet, associate

F_DE_RANGE = (0.1, 1.0)
CR_RANGE = (0.0, 1.0)
ETA_C_RANGE = (1.0, 50.0)
F_DE_SIGMA = 0.1
CR_SIGMA = 0.1
ETA_C_SIGMA = 5.0
ETA_M = 20.0


class Branch(Enum):
    SBX = "sbx"
    DE = "de"


@dataclass
class ReproductionParams:
    f_de_mean: float = 0.5
    cr_mean: float = 0.2
    eta_c_mean: float = 30.0
    success_f: list[float] = field(default_factory=list)
    success_cr: list[float] = field(default_factory=list)
    success_eta: list[float] = field(default_factory=list)


@dataclass
class PerturbOutcome:
    child: Candidate
    parent1: Candidate
    used_f_de: float | None = None
    used_cr: float | None = None
    used_eta_c: float | None = None

    @property
    def branch(self) -> Branch:
        return Branch.SBX if self.used_eta_c is not None else Branch.DE


def sample_params(params: ReproductionParams, branch: Branch, rng: RngStream) -> dict[str, float]:
    if branch is Branch.SBX:
        eta = float(np.clip(rng.normal(params.eta_c_mean, ETA_C_SIGMA), *ETA_C_RANGE))
        return {"eta_c": eta}
    f_de = float(np.clip(rng.normal(params.f_de_mean, F_DE_SIGMA), *F_DE_RANGE))
    cr = float(np.clip(rng.normal(params.cr_mean, CR_SIGMA), *CR_RANGE))
    return {"f_de": f_de, "cr": cr}


def update_means(params: ReproductionParams) -> ReproductionParams:
    if params.success_f:
        params.f_de_mean = float(np.mean(params.success_f))
    if params.success_cr:
        params.cr_mean = float(np.mean(params.success_cr))
    if params.success_eta:
        params.eta_c_mean = float(np.mean(params.success_eta))
    params.success_f.clear()
    params.success_cr.clear()
    params.success_eta.clear()
    return params


def k_nbr_for(n_dir: int, frac: float = 0.2) -> int:
    return max(1, math.ceil(frac * n_dir))


def nonempty_neighbors(k: int, refs: ReferenceVectorSet, counts: np.ndarray, k_nbr: int) -> np.ndarray:
    """First ``k_nbr`` directions in ``k``'s neighbor row that hold a candidate."""
    row = refs.neighbors[k]
    return row[counts[row] > 0][:k_nbr]


def mating_pool(
    k: int,
    refs: ReferenceVectorSet,
    assoc: np.ndarray,
    n_s: int,
    k_nbr: int,
    rng: RngStream,
) -> np.ndarray:
    """Indices of the candidates living in ``n_s`` randomly picked nearby sub-spaces.

    Directions are drawn without replacement unless fewer than ``n_s``
    non-empty neighbors exist.
    """
    counts = np.bincount(assoc, minlength=refs.n_dir)
    near = nonempty_neighbors(k, refs, counts, k_nbr)
    if near.size == 0:
        # only sub-space k itself is occupied
        near = np.array([k])
    chosen = rng.choice(near, size=n_s, replace=near.size < n_s)
    return np.flatnonzero(np.isin(assoc, chosen))


def de_rand_1_bin(x1, x2, x3, x4, f_de: float, cr: float, bounds: BoxBounds, rng: RngStream) -> np.ndarray:
    """Mutant ``x2 + f_de (x3 - x4)`` crossed binomially into target ``x1``."""
    x1 = np.asarray(x1, dtype=float)
    n = x1.size
    mutant = np.asarray(x2) + f_de * (np.asarray(x3) - np.asarray(x4))
    j_rand = rng.integers(n)
    mask = rng.random(n) < cr
    mask[j_rand] = True
    return bounds.clamp(np.where(mask, mutant, x1))


def sbx_spread(u, eta_c: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    expo = 1.0 / (eta_c + 1.0)
    low = np.power(2.0 * u, expo)
    with np.errstate(divide="ignore"):
        high = np.power(1.0 / (2.0 * (1.0 - u)), expo)
    return np.where(u <= 0.5, low, high)


def sbx_pair(x1, x2, u, eta_c: float) -> tuple[np.ndarray, np.ndarray]:
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    beta = sbx_spread(u, eta_c)
    c1 = 0.5 * ((1 + beta) * x1 + (1 - beta) * x2)
    c2 = 0.5 * ((1 - beta) * x1 + (1 + beta) * x2)
    return c1, c2


def sbx_crossover(x1, x2, eta_c: float, bounds: BoxBounds, rng: RngStream) -> np.ndarray:
    """One of the two simulated-binary children, chosen at random.

    Every variable is crossed; each variable of the pair is then swapped
    with probability 0.5.
    """
    n = np.asarray(x1).size
    u = rng.random(n)
    c1, c2 = sbx_pair(x1, x2, u, eta_c)
    swap = rng.random(n) < 0.5
    c1, c2 = np.where(swap, c2, c1), np.where(swap, c1, c2)
    child = c1 if rng.random() < 0.5 else c2
    return bounds.clamp(child)


def polynomial_mutation(x, p_m: float, eta_m: float, bounds: BoxBounds, rng: RngStream) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.size
    hit = rng.random(n) < p_m
    r = rng.random(n)
    lo, hi = bounds.lower, bounds.upper
    span = hi - lo
    d1 = (x - lo) / span
    d2 = (hi - x) / span
    pw = 1.0 / (eta_m + 1.0)
    left = 2.0 * r + (1.0 - 2.0 * r) * np.power(1.0 - d1, eta_m + 1.0)
    right = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * np.power(1.0 - d2, eta_m + 1.0)
    with np.errstate(invalid="ignore"):
        dq = np.where(r < 0.5, np.power(left, pw) - 1.0, 1.0 - np.power(right, pw))
    out = np.where(hit, x + dq * span, x)
    return bounds.clamp(out)


def _draw_parents(pool: np.ndarray, count: int, exclude: int, rng: RngStream) -> np.ndarray:
    """``count`` pool members, distinct and different from ``exclude`` when possible."""
    others = pool[pool != exclude]
    if others.size >= count:
        return rng.choice(others, size=count, replace=False)
    if others.size == 0:
        others = pool
    return rng.choice(others, size=count, replace=others.size < count)


def perturb(
    pop: Population,
    assoc: np.ndarray,
    refs: ReferenceVectorSet,
    k: int,
    params: ReproductionParams,
    p_mut: float,
    k_nbr: int,
    bounds: BoxBounds,
    evaluate_fn: Callable[[np.ndarray], np.ndarray],
    rng: RngStream,
    p_m: float | None = None,
    eta_m: float = ETA_M,
) -> PerturbOutcome:
    """Create one child for direction ``k``.

    The first parent comes from sub-space ``k`` (or a random nearby
    non-empty one).  With probability ``p_mut`` the child is an SBX
    offspring, otherwise DE/rand/1/bin; polynomial mutation follows both.
    """
    p_m = 1.0 / bounds.n if p_m is None else p_m
    own = np.flatnonzero(assoc == k)
    if own.size == 0:
        counts = np.bincount(assoc, minlength=refs.n_dir)
        near = nonempty_neighbors(k, refs, counts, k_nbr)
        r = rng.choice(near)
        own = np.flatnonzero(assoc == r)
    i1 = int(rng.choice(own))
    x1 = pop[i1].x

    if rng.random() < p_mut:
        pool = mating_pool(k, refs, assoc, 1, k_nbr, rng)
        used = sample_params(params, Branch.SBX, rng)
        (i2,) = _draw_parents(pool, 1, i1, rng)
        trial = sbx_crossover(x1, pop[i2].x, used["eta_c"], bounds, rng)
    else:
        pool = mating_pool(k, refs, assoc, 3, k_nbr, rng)
        used = sample_params(params, Branch.DE, rng)
        i2, i3, i4 = _draw_parents(pool, 3, i1, rng)
        trial = de_rand_1_bin(x1, pop[i2].x, pop[i3].x, pop[i4].x, used["f_de"], used["cr"], bounds, rng)
    x_child = polynomial_mutation(trial, p_m, eta_m, bounds, rng)
    f_child = evaluate_fn(x_child)
    child = Candidate(x=x_child, f=f_child, assoc=associate(f_child, refs))
    return PerturbOutcome(
        child=child,
        parent1=pop[i1],
        used_f_de=used.get("f_de"),
        used_cr=used.get("cr"),
        used_eta_c=used.get("eta_c"),
    )
