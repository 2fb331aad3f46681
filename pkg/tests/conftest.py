import numpy as np
import pytest

from lord.core import make_rng


@pytest.fixture
def rng():
    return make_rng(2024)


def brute_dominates(a, b):
    strictly = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strictly = True
    return strictly


def brute_ranks(F):
    """Front index by repeated peeling with explicit pairwise loops."""
    n = len(F)
    rank = [-1] * n
    left = set(range(n))
    r = 0
    while left:
        front = [i for i in left if not any(brute_dominates(F[j], F[i]) for j in left if j != i)]
        for i in front:
            rank[i] = r
        left -= set(front)
        r += 1
    return np.array(rank)


def union_find_count(adjacency):
    n = len(adjacency)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if adjacency[i][j]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    return len({find(i) for i in range(n)})


def pytest_terminal_summary(terminalreporter):
    from verdicts import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
