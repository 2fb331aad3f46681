"""Performance indicators and the rank-sum test used to compare runs."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import norm, rankdata

from .core import ContractViolation, as_matrix, make_rng
from .ranking import non_dominated_sort

log = logging.getLogger(__name__)

HV_SAMPLES = 1_000_000
HV_SEED = 20190101


def _pair(reference, approx) -> tuple[np.ndarray, np.ndarray]:
    R, A = as_matrix(reference), as_matrix(approx)
    if R.shape[0] == 0 or A.shape[0] == 0:
        raise ContractViolation("indicator sets must be nonempty")
    if R.shape[1] != A.shape[1]:
        raise ContractViolation(f"width mismatch: reference {R.shape[1]} vs approximation {A.shape[1]}")
    return R, A


def igd(reference, approx) -> float:
    """Mean distance from each reference point to its nearest approximation point."""
    R, A = _pair(reference, approx)
    return float(cdist(R, A).min(axis=1).mean())


def cm(reference, approx) -> float:
    """Mean distance from each approximation point to the reference set."""
    R, A = _pair(reference, approx)
    return float(cdist(A, R).min(axis=1).mean())


# ------------------------------------------------------------- hypervolume


def _inside_ref(front, ref) -> np.ndarray:
    P = as_matrix(front)
    ref = np.asarray(ref, dtype=float)
    if P.shape[1] != ref.size:
        raise ContractViolation("front and reference point differ in width")
    return P[np.all(P < ref, axis=1)]


def hypervolume_2d(front, ref) -> float:
    P = _inside_ref(front, ref)
    if P.shape[0] == 0:
        return 0.0
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    area, best_f2 = 0.0, float(ref[1])
    for f1, f2 in P:
        if f2 < best_f2:
            area += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return float(area)


def hypervolume_mc(front, ref, samples: int = HV_SAMPLES, seed: int = HV_SEED, chunk: int = 50_000):
    """Monte Carlo estimate over the box spanned by the front minimum and ``ref``.

    Returns ``(value, standard_error)``.
    """
    P = _inside_ref(front, ref)
    ref = np.asarray(ref, dtype=float)
    if P.shape[0] == 0:
        return 0.0, 0.0
    lo = P.min(axis=0)
    box = float(np.prod(ref - lo))
    rng = make_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        S = lo + rng.random((size, ref.size)) * (ref - lo)
        covered = np.zeros(size, dtype=bool)
        for p in P:
            covered |= np.all(S >= p, axis=1)
        hits += int(covered.sum())
        done += size
    frac = hits / samples
    return box * frac, box * math.sqrt(frac * (1.0 - frac) / samples)


def hypervolume(front, ref, samples: int = HV_SAMPLES, seed: int = HV_SEED) -> tuple[float, float]:
    """``(hv, standard_error)``; exact with zero error in two dimensions."""
    ref = np.asarray(ref, dtype=float)
    if ref.size < 2:
        raise ContractViolation("hypervolume needs at least two objectives")
    if ref.size == 2:
        return hypervolume_2d(front, ref), 0.0
    return hypervolume_mc(front, ref, samples, seed)


# --------------------------------------------------------------------- PSP


def cov_rate(reference_ps, approx_ps) -> float:
    R, A = _pair(reference_ps, approx_ps)
    lr, ur = R.min(axis=0), R.max(axis=0)
    la, ua = A.min(axis=0), A.max(axis=0)
    width = ur - lr
    overlap = np.maximum(np.minimum(ua, ur) - np.maximum(la, lr), 0.0)
    delta = np.ones_like(width)
    spread = width > 0
    delta[spread] = np.clip(overlap[spread] / width[spread], 0.0, 1.0)
    # a degenerate reference dimension counts as covered iff the boxes meet there
    delta[~spread] = ((la <= lr) & (ua >= ur))[~spread].astype(float)
    return float(np.prod(delta) ** (1.0 / (2 * R.shape[1])))


def psp(reference_ps, approx_ps) -> float:
    g = igd(reference_ps, approx_ps)
    c = cov_rate(reference_ps, approx_ps)
    return math.inf if g == 0 else c / g


def rpsp(reference_ps, approx_ps) -> float | None:
    c = cov_rate(reference_ps, approx_ps)
    if c == 0:
        log.info("cov_rate is zero; rPSP undefined")
        return None
    return igd(reference_ps, approx_ps) / c


# --------------------------------------------------------------------- NSX


def non_contributing(approx, reference_ps) -> np.ndarray:
    """Mask of solutions whose removal leaves the IGDX of ``approx`` unchanged.

    Each reference point credits its nearest solution, the lowest index on
    a tie, so of several coincident copies exactly one stays contributing
    and dropping the whole mask at once keeps IGDX intact.
    """
    R, A = _pair(reference_ps, approx)
    used = np.zeros(A.shape[0], dtype=bool)
    used[np.argmin(cdist(R, A), axis=1)] = True
    return ~used


def nsx(approx, reference_ps) -> tuple[float, float]:
    """``(fraction non-contributing, CM of the non-contributing subset)``."""
    A = as_matrix(approx)
    mask = non_contributing(A, reference_ps)
    cm_nsx = cm(reference_ps, A[mask]) if mask.any() else 0.0
    return float(mask.mean()), cm_nsx


# ------------------------------------------------------------ rank-sum test


@dataclass(frozen=True)
class RankSumResult:
    mark: str
    p_value: float
    z: float


def wilcoxon_rank_sum(a, b, alpha: float = 0.05) -> RankSumResult:
    """Two-sided rank-sum test; ``+`` means ``a`` is better (lower)."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        raise ContractViolation("rank-sum test needs two nonempty samples")
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return RankSumResult("~", 1.0, 0.0)
    ranks = rankdata(pooled)
    w = ranks[:n1].sum()
    n = n1 + n2
    mean = n1 * (n + 1) / 2.0
    _, ties = np.unique(pooled, return_counts=True)
    var = n1 * n2 / 12.0 * ((n + 1) - np.sum(ties**3 - ties) / (n * (n - 1)))
    diff = w - mean
    z = (abs(diff) - 0.5) / math.sqrt(var) if abs(diff) >= 0.5 else 0.0
    p = float(min(1.0, 2.0 * norm.sf(z)))
    mark = "~"
    if p < alpha:
        mark = "+" if np.median(a) < np.median(b) else "-"
        if np.median(a) == np.median(b):
            mark = "+" if diff < 0 else "-"
    return RankSumResult(mark, p, math.copysign(z, diff))


# ------------------------------------------------------------------ report


@dataclass
class IndicatorReport:
    igdx: float | None = None
    igdf: float | None = None
    hv: float | None = None
    hv_stderr: float | None = None
    rhv: float | None = None
    rpsp: float | None = None
    cm: float | None = None
    nsx: float | None = None
    cm_nsx: float | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_run(final_ps, final_pf, ref_ps=None, ref_pf=None, hv_ref=None, **meta) -> IndicatorReport:
    """Every indicator computable from the supplied reference data.

    NSX is measured on the first non-dominated front, as its definition
    speaks of the non-dominated set.
    """
    X, F = as_matrix(final_ps), as_matrix(final_pf)
    rep = IndicatorReport(meta=dict(meta))
    if ref_ps is not None:
        rep.igdx = igd(ref_ps, X)
        rep.rpsp = rpsp(ref_ps, X)
        front0 = non_dominated_sort(F).fronts[0]
        rep.nsx, rep.cm_nsx = nsx(X[front0], ref_ps)
    if ref_pf is not None:
        rep.igdf = igd(ref_pf, F)
        rep.cm = cm(ref_pf, F)
    if hv_ref is not None:
        rep.hv, rep.hv_stderr = hypervolume(F, hv_ref)
        rep.rhv = 1.0 / rep.hv if rep.hv > 0 else None
    return rep
