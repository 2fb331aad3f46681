import itertools
import math

import numpy as np
import pytest
from scipy.stats import rankdata

from lord.core import ContractViolation, make_rng
from lord.metrics import (
    cm,
    cov_rate,
    evaluate_run,
    hypervolume,
    hypervolume_2d,
    hypervolume_mc,
    igd,
    non_contributing,
    nsx,
    psp,
    rpsp,
    wilcoxon_rank_sum,
)
from lord.problems import get_problem, sample_reference_set


def loop_igd(R, A):
    total = 0.0
    for r in R:
        total += min(math.dist(r, a) for a in A)
    return total / len(R)


def test_igd_examples():
    R = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert igd(R, R) == 0.0
    assert igd(R, [[0.0, 0.0]]) == pytest.approx(math.sqrt(2) / 2, abs=1e-12)
    with pytest.raises(ContractViolation):
        igd(R, [[0.0, 0.0, 0.0]])


def test_igd_and_cm_match_double_loop(rng):
    for _ in range(20):
        d = int(rng.integers(1, 5))
        R = rng.random((int(rng.integers(1, 40)), d))
        A = rng.random((int(rng.integers(1, 40)), d))
        assert igd(R, A) == pytest.approx(loop_igd(R, A), abs=1e-12)
        assert cm(R, A) == pytest.approx(loop_igd(A, R), abs=1e-12)


def test_igd_zero_iff_reference_contained(rng):
    R = rng.random((10, 3))
    assert igd(R, np.vstack([R, rng.random((5, 3))])) < 1e-12
    assert igd(R, R[1:]) > 1e-12


def test_cm_examples():
    R = np.array([[0.0, 0.0], [1.0, 0.5]])
    assert cm(R, R[:1]) == 0.0
    assert cm([[0.0, 0.0]], [[2.0, 2.0]]) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_hypervolume_examples():
    assert hypervolume_2d([[0.0, 0.0]], [1.0, 1.0]) == 1.0
    assert hypervolume_2d([[0.0, 1.0], [1.0, 0.0]], [1.0, 1.0]) == 0.0
    assert hypervolume_2d([[0.0, 0.5], [0.5, 0.0]], [1.0, 1.0]) == pytest.approx(0.75)
    assert hypervolume_2d([[2.0, 2.0]], [1.0, 1.0]) == 0.0
    hv, se = hypervolume([[0.0, 0.0, 0.0]], [1.0, 1.0, 1.0])
    assert hv == pytest.approx(1.0) and se == 0.0


def test_hypervolume_two_points_against_monte_carlo():
    front = [[0.0, 0.6], [0.6, 0.0]]
    exact = hypervolume_2d(front, [1.0, 1.0])
    mc, se = hypervolume_mc(front, [1.0, 1.0])
    assert exact == pytest.approx(0.64)
    assert abs(mc - exact) <= 0.01 * exact


def test_exact_2d_agrees_with_monte_carlo_within_three_sigma(rng):
    for seed in range(5):
        t = np.sort(rng.random(8))
        front = np.column_stack([t, (1 - np.sqrt(t)) ** 2])
        ref = np.array([1.1, 1.1])
        exact = hypervolume_2d(front, ref)
        mc, se = hypervolume_mc(front, ref, samples=200_000, seed=seed)
        assert abs(mc - exact) <= 3 * se
        assert abs(mc - exact) <= 0.01 * exact


def test_hypervolume_monotone_under_non_dominated_insertion(rng):
    ref = np.array([1.0, 1.0])
    front = np.empty((0, 2))
    prev = 0.0
    for t in rng.random(30):
        front = np.vstack([front, [t, 1 - t]])
        cur = hypervolume_2d(front, ref)
        assert cur >= prev - 1e-15
        prev = cur


def test_sym_part_true_front_hypervolume():
    # sqrt(f1) + sqrt(f2) = 2; the area above the curve over f1 in [0, 4] is
    # 4.4 * 4 minus the integral of (2 - sqrt u)^2, which is 8/3, plus the strip f1 in [4, 4.4]
    analytic = 4.4 * 4.0 - 8.0 / 3.0 + 0.4 * 4.4
    assert analytic == pytest.approx(16.6933, abs=1e-4)
    p = get_problem("sym-part-simple")
    _, pf = sample_reference_set(p, 396, make_rng(0))
    hv, _ = hypervolume(pf, p.hv_ref)
    # a finite sample sits just below the continuous value
    assert analytic - 0.2 < hv < analytic
    assert 1 / hv > 0.055


def loop_cov_rate(R, A):
    prod = 1.0
    n = len(R[0])
    for j in range(n):
        lr, ur = min(r[j] for r in R), max(r[j] for r in R)
        la, ua = min(a[j] for a in A), max(a[j] for a in A)
        over = min(ua, ur) - max(la, lr)
        prod *= min(1.0, max(0.0, over) / (ur - lr))
    return prod ** (1 / (2 * n))


def test_cov_rate_examples_and_oracle(rng):
    R = rng.random((30, 3))
    assert cov_rate(R, R) == 1.0
    assert rpsp(R, R[::-1]) == igd(R, R[::-1])
    assert cov_rate([[0, 0], [1, 1]], [[2, 2], [3, 3]]) == 0.0
    assert rpsp([[0, 0], [1, 1]], [[2, 2], [3, 3]]) is None
    for _ in range(50):
        n = int(rng.integers(1, 5))
        R = rng.random((20, n))
        A = rng.random((15, n)) * 1.5 - 0.2
        assert cov_rate(R, A) == pytest.approx(loop_cov_rate(R, A), abs=1e-12)


def test_rpsp_never_below_igdx(rng):
    for _ in range(50):
        R = rng.random((20, 2))
        A = rng.random((10, 2)) * 0.8 + 0.3
        value = rpsp(R, A)
        assert value is None or value >= igd(R, A)
        if value is not None:
            assert psp(R, A) == pytest.approx(1 / value)


def leave_one_out(A, R):
    base = igd(R, A)
    return np.array([abs(igd(R, np.delete(A, i, axis=0)) - base) <= 1e-12 for i in range(len(A))])


def test_nsx_matches_leave_one_out_when_nearest_neighbours_are_unique(rng):
    for _ in range(20):
        R = rng.random((15, 2))
        A = rng.random((25, 2))
        mask = non_contributing(A, R)
        assert np.array_equal(mask, leave_one_out(A, R))
        used = np.unique(np.argmin(np.linalg.norm(R[:, None] - A[None], axis=2), axis=1)).size
        frac, cm_nsx = nsx(A, R)
        assert frac == (len(A) - used) / len(A)
        assert cm_nsx == pytest.approx(cm(R, A[mask]))


def test_nsx_edge_cases(rng):
    R = rng.random((10, 2))
    assert nsx([[0.5, 0.5]], R) == (0.0, 0.0)
    A = np.array([[0.5, 0.5]] * 3)
    assert list(non_contributing(A, R)) == [False, True, True]


def test_removing_every_non_contributor_keeps_igdx(rng):
    for _ in range(20):
        R = rng.random((12, 2))
        A = np.vstack([rng.random((20, 2)), rng.random((4, 2))])
        A = np.vstack([A, A[:5]])
        mask = non_contributing(A, R)
        assert abs(igd(R, A[~mask]) - igd(R, A)) <= 1e-9


def exact_rank_sum_p(a, b):
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    n1 = len(a)
    mean = n1 * (len(pooled) + 1) / 2
    observed = abs(ranks[:n1].sum() - mean)
    hits = total = 0
    for combo in itertools.combinations(range(len(pooled)), n1):
        total += 1
        hits += abs(ranks[list(combo)].sum() - mean) >= observed - 1e-9
    return hits / total


@pytest.mark.parametrize("n", [5, 6, 7, 8])
def test_rank_sum_p_value_against_exhaustive_permutations(n):
    rng = make_rng(100 + n)
    for shift in (0.0, 0.8, 1.6):
        a = rng.normal(size=n)
        b = rng.normal(size=n) + shift
        assert wilcoxon_rank_sum(a, b).p_value == pytest.approx(exact_rank_sum_p(a, b), abs=0.02)


def test_rank_sum_examples():
    a = np.arange(1.0, 11.0)
    same = wilcoxon_rank_sum(a, a)
    assert same.mark == "~" and same.p_value == pytest.approx(1.0, abs=1e-12)
    sep = wilcoxon_rank_sum(a, a + 10)
    assert sep.mark == "+" and sep.p_value < 0.05
    assert wilcoxon_rank_sum(a + 10, a).mark == "-"
    flat = wilcoxon_rank_sum([3.0] * 6, [3.0] * 6)
    assert flat.mark == "~" and flat.p_value == 1.0


def test_evaluate_run_fields():
    p = get_problem("sym-part-simple")
    ps, pf = sample_reference_set(p, 396, make_rng(0))
    rep = evaluate_run(ps[::4], pf[::4], ps, pf, p.hv_ref, problem="x", seed=3)
    assert rep.rhv == pytest.approx(1 / rep.hv)
    assert rep.rpsp == pytest.approx(rep.igdx / cov_rate(ps, ps[::4]))
    assert rep.meta == {"problem": "x", "seed": 3}
    bare = evaluate_run(ps, pf, ref_ps=ps)
    assert bare.igdf is None and bare.rhv is None
    beyond = evaluate_run(ps, pf + 10, ref_pf=pf, hv_ref=p.hv_ref)
    assert beyond.hv == 0.0 and beyond.rhv is None
