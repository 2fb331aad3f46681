"""Domain types shared by every part of the optimizer.

Decision and objective vectors are plain 1-D ``float64`` numpy arrays.
A :class:`Candidate` binds the two together; a :class:`Population` is an
ordered list of candidates with matrix views for vectorised work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:
    from .problems import ProblemDef

RngStream = np.random.Generator


class ConfigurationError(ValueError):
    """Invalid user-facing configuration (sizes, budgets, divisions)."""


class ContractViolation(ValueError):
    """An operation was called outside its precondition."""


class ConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""


def make_rng(seed: int) -> RngStream:
    """One PCG64 stream per run; identical seeds give identical draws."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class BoxBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise ConfigurationError("lower and upper bounds differ in length")
        if not np.all(lower < upper):
            raise ConfigurationError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.span))

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def clamp(self, x) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)


@dataclass(eq=False)
class Candidate:
    """A decision vector with its objective vector.

    Equality is identity: two candidates holding equal vectors are still
    different population members.  ``cdx``/``cdf``/``scd`` are scratch
    values written by the filters and are not meaningful between calls.
    """

    x: np.ndarray
    f: np.ndarray
    assoc: int = -1
    cdx: float = float("nan")
    cdf: float = float("nan")
    scd: float = float("nan")


@dataclass
class Population:
    members: list[Candidate] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i) -> Candidate:
        return self.members[i]

    def __contains__(self, cand) -> bool:
        return any(m is cand for m in self.members)

    @property
    def X(self) -> np.ndarray:
        return np.array([m.x for m in self.members])

    @property
    def F(self) -> np.ndarray:
        return np.array([m.f for m in self.members])

    @property
    def assoc(self) -> np.ndarray:
        return np.fromiter((m.assoc for m in self.members), dtype=np.intp, count=len(self.members))


def evaluate(problem: ProblemDef, x) -> np.ndarray:
    """Objective vector of ``x``; ``x`` must already be inside the box."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise ContractViolation(f"expected a decision vector of length {problem.n}, got shape {x.shape}")
    if not problem.bounds.contains(x):
        raise ContractViolation("decision vector lies outside the box bounds")
    f = np.asarray(problem.evaluator(x), dtype=float).reshape(-1)
    if f.size != problem.m:
        raise ContractViolation(f"evaluator returned {f.size} objectives, expected {problem.m}")
    return f


class CountingEvaluator:
    """Wraps :func:`evaluate`, counting calls and notifying listeners.

    Listeners receive every fresh objective vector; the engine uses this
    to keep the PBI ideal point current.
    """

    def __init__(self, problem: ProblemDef, listeners: Iterable[Callable[[np.ndarray], None]] = ()):
        self.problem = problem
        self.calls = 0
        self.listeners = list(listeners)

    def __call__(self, x) -> np.ndarray:
        f = evaluate(self.problem, x)
        self.calls += 1
        for fn in self.listeners:
            fn(f)
        return f


def initialize_population(
    problem: ProblemDef,
    n_pop: int,
    rng: RngStream,
    evaluate_fn: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Population:
    """Uniform random population over the decision box, each member evaluated once."""
    if n_pop < 4:
        raise ConfigurationError(f"n_pop must be at least 4, got {n_pop}")
    evaluate_fn = evaluate_fn or (lambda x: evaluate(problem, x))
    lower, span = problem.bounds.lower, problem.bounds.span
    u = rng.random((n_pop, problem.n))
    X = lower + u * span
    # u < 1 can still round up to the bound after the affine map
    X = np.minimum(X, problem.bounds.upper)
    return Population([Candidate(x=x, f=evaluate_fn(x)) for x in X])


def as_matrix(points: Sequence) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 1)
    return arr
