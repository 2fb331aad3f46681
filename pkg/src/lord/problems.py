"""Multi-modal benchmark problems with analytic Pareto-set samplers.

Every problem is a :class:`ProblemDef` built by a factory registered in
:data:`REGISTRY`.  Third-party problems (for instance the CEC 2019 MMF
suite) plug in as ``"package.module:factory"`` and are paired with
reference-set files read by :func:`load_reference_set`.
"""

from __future__ import annotations

import importlib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .core import BoxBounds, ConfigurationError, RngStream


class CapabilityError(RuntimeError):
    """The problem lacks an analytic sampler for the requested set."""


class ReferenceSetError(ValueError):
    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


@dataclass
class ProblemDef:
    name: str
    n: int
    m: int
    bounds: BoxBounds
    evaluator: Callable[[np.ndarray], np.ndarray]
    k_ps: int = 1
    ps_sampler: Callable[[int, RngStream], np.ndarray] | None = None
    pf_sampler: Callable[[int, RngStream], np.ndarray] | None = None
    hv_ref: np.ndarray | None = None
    n_igd: int = 400
    params: dict = field(default_factory=dict)

    def evaluate_many(self, X) -> np.ndarray:
        return np.array([self.evaluator(x) for x in np.atleast_2d(X)])


def _split_count(count: int, parts: int) -> list[int]:
    base, extra = divmod(count, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


# ---------------------------------------------------------------- SYM-PART

SYM_A, SYM_B, SYM_C = 1.0, 10.0, 8.0
SYM_OMEGA = math.pi / 4


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def sym_part(x, rotated: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if rotated:
        x = _rotation(SYM_OMEGA) @ x
    a, b, c = SYM_A, SYM_B, SYM_C
    t1 = np.clip(np.floor(x[0] / (c + 2 * a) + 0.5), -1, 1)
    t2 = np.clip(np.floor(x[1] / b + 0.5), -1, 1)
    p = x[0] - t1 * (c + 2 * a)
    q = x[1] - t2 * b
    return np.array([(p + a) ** 2 + q**2, (p - a) ** 2 + q**2])


def _sym_part_ps(rotated: bool):
    back = _rotation(-SYM_OMEGA)

    def sampler(count: int, rng: RngStream) -> np.ndarray:
        pts = []
        tiles = [(t1, t2) for t2 in (-1, 0, 1) for t1 in (-1, 0, 1)]
        for (t1, t2), n_tile in zip(tiles, _split_count(count, len(tiles))):
            s = np.linspace(-SYM_A, SYM_A, n_tile)
            seg = np.column_stack([s + t1 * (SYM_C + 2 * SYM_A), np.full(n_tile, t2 * SYM_B)])
            pts.append(seg @ back.T if rotated else seg)
        return np.vstack(pts)

    return sampler


def make_sym_part(rotated: bool = False) -> ProblemDef:
    return ProblemDef(
        name="sym-part-rotated" if rotated else "sym-part-simple",
        n=2,
        m=2,
        bounds=BoxBounds(np.full(2, -20.0), np.full(2, 20.0)),
        evaluator=lambda x: sym_part(x, rotated),
        k_ps=9,
        ps_sampler=_sym_part_ps(rotated),
        hv_ref=np.array([4.4, 4.4]),
        n_igd=396,
    )


# --------------------------------------------------------------- Omni-test


def omni_test(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.array([np.sum(np.sin(np.pi * x)), np.sum(np.cos(np.pi * x))])


def omni_boxes(n: int) -> np.ndarray:
    """Lower corners of the ``3**n`` Pareto-optimal boxes; each box is 0.5 wide."""
    grid = np.array(np.meshgrid(*[[1.0, 3.0, 5.0]] * n, indexing="ij"))
    return grid.reshape(n, -1).T


def _omni_ps(n: int):
    def sampler(count: int, rng: RngStream) -> np.ndarray:
        # optimal points share one phase in every coordinate: x_j = s + 2 h_j
        corners = omni_boxes(n)
        pts = []
        for corner, n_seg in zip(corners, _split_count(count, len(corners))):
            s = np.linspace(0.0, 0.5, n_seg)
            pts.append(corner + s[:, None])
        return np.vstack(pts)

    return sampler


def make_omni_test(n: int = 3) -> ProblemDef:
    if n < 1:
        raise ConfigurationError("omni-test needs n >= 1")
    return ProblemDef(
        name="omni-test",
        n=n,
        m=2,
        bounds=BoxBounds(np.zeros(n), np.full(n, 6.0)),
        evaluator=omni_test,
        k_ps=3**n,
        ps_sampler=_omni_ps(n),
        hv_ref=np.array([4.4, 4.4]),
        n_igd=600,
        params={"n": n},
    )


# ----------------------------------------------------------------- polygon

POLY_CENTERS_1D = (17.0, 50.0, 83.0)
POLY_RADIUS = 10.0
POLY_WIDTH = 100.0


def polygon_geometry(m: int, rotated: bool = False, scale: float = 1.0) -> np.ndarray:
    """Vertices ``(9, m, 2)``; copy k is centred on the k-th grid point, row-major."""
    centers = np.array([(cx, cy) for cy in POLY_CENTERS_1D for cx in POLY_CENTERS_1D]) * scale
    angles = 2 * np.pi * np.arange(m) / m
    verts = np.empty((len(centers), m, 2))
    for k, c in enumerate(centers):
        phi = k * np.pi / (2 * len(centers)) if rotated else 0.0
        verts[k] = c + POLY_RADIUS * scale * np.column_stack([np.cos(angles + phi), np.sin(angles + phi)])
    return verts


def polygon(x, vertices: np.ndarray) -> np.ndarray:
    """Distance from the first two coordinates to the nearest copy of every vertex."""
    p = np.asarray(x, dtype=float)[:2]
    d = np.linalg.norm(vertices - p, axis=2)
    return d.min(axis=0)


def _inside_convex(points: np.ndarray, verts: np.ndarray) -> np.ndarray:
    # counter-clockwise vertices: inside iff left of (or on) every edge
    nxt = np.roll(verts, -1, axis=0)
    edge = nxt - verts
    rel = points[:, None, :] - verts[None, :, :]
    cross = edge[None, :, 0] * rel[:, :, 1] - edge[None, :, 1] * rel[:, :, 0]
    return np.all(cross >= -1e-12, axis=1)


def _polygon_ps(vertices: np.ndarray, n: int, bounds: BoxBounds):
    def sampler(count: int, rng: RngStream) -> np.ndarray:
        pts = []
        for verts, n_copy in zip(vertices, _split_count(count, len(vertices))):
            lo, hi = verts.min(axis=0), verts.max(axis=0)
            got = np.empty((0, 2))
            while got.shape[0] < n_copy:
                cand = lo + rng.random((2 * n_copy + 8, 2)) * (hi - lo)
                got = np.vstack([got, cand[_inside_convex(cand, verts)]])
            pts.append(got[:n_copy])
        P = np.vstack(pts)
        if n > 2:
            extra = bounds.lower[2:] + rng.random((P.shape[0], n - 2)) * bounds.span[2:]
            P = np.hstack([P, extra])
        return P

    return sampler


def make_polygon(m: int = 3, rotated: bool = False, n: int = 2, scale: float = 1.0) -> ProblemDef:
    """Nine disjoint regular ``m``-gons in a square box of side ``100 * scale``.

    ``n > 2`` appends decision variables that do not affect the objectives.
    """
    if m < 3:
        raise ConfigurationError("polygon problems need m >= 3")
    if n < 2:
        raise ConfigurationError("polygon problems need n >= 2")
    verts = polygon_geometry(m, rotated, scale)
    bounds = BoxBounds(np.zeros(n), np.full(n, POLY_WIDTH * scale))
    return ProblemDef(
        name=("rpolygon" if rotated else "polygon"),
        n=n,
        m=m,
        bounds=bounds,
        evaluator=lambda x: polygon(x, verts),
        k_ps=len(verts),
        ps_sampler=_polygon_ps(verts, n, bounds),
        hv_ref=None,
        n_igd=5000,
        params={"m": m, "n": n, "scale": scale, "vertices": verts},
    )


def polygon_copy_of(points, vertices: np.ndarray) -> np.ndarray:
    """Copy index whose convex hull contains each point's first two coordinates, else -1."""
    P = np.atleast_2d(np.asarray(points, dtype=float))[:, :2]
    out = np.full(P.shape[0], -1)
    for k, verts in enumerate(vertices):
        out[(out < 0) & _inside_convex(P, verts)] = k
    return out


# --------------------------------------------------------------- registry

REGISTRY: dict[str, Callable[..., ProblemDef]] = {
    "sym-part-simple": lambda **kw: make_sym_part(rotated=False),
    "sym-part-rotated": lambda **kw: make_sym_part(rotated=True),
    "omni-test": lambda n=None, **kw: make_omni_test(n or 3),
    "polygon": lambda m=None, n=None, scale=None, **kw: make_polygon(m or 3, False, n or 2, scale or 1.0),
    "rpolygon": lambda m=None, n=None, scale=None, **kw: make_polygon(m or 3, True, n or 2, scale or 1.0),
}
REGISTRY["polygon-rotated"] = REGISTRY["rpolygon"]


def get_problem(name: str, **options) -> ProblemDef:
    """Look up a built-in problem, or import ``module:factory`` for a plugin."""
    if name in REGISTRY:
        return REGISTRY[name](**options)
    if ":" in name:
        module, _, attr = name.partition(":")
        try:
            factory = getattr(importlib.import_module(module), attr)
        except (ImportError, AttributeError) as exc:
            raise ConfigurationError(f"cannot load problem plugin {name!r}: {exc}") from exc
        if not callable(factory):
            raise ConfigurationError(f"plugin {name!r} is not a factory")
        problem = factory(**{k: v for k, v in options.items() if v is not None})
        if not isinstance(problem, ProblemDef):
            raise ConfigurationError(f"plugin {name!r} did not return a ProblemDef")
        return problem
    raise ConfigurationError(f"unknown problem {name!r}; choose from {sorted(REGISTRY)} or module:factory")


def sample_reference_set(problem: ProblemDef, count: int, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Decision-space sample of the Pareto set and its objective images."""
    if problem.ps_sampler is None:
        raise CapabilityError(f"{problem.name} has no analytic Pareto-set sampler; supply reference files")
    ps = np.asarray(problem.ps_sampler(count, rng), dtype=float)
    pf = problem.evaluate_many(ps)
    return ps, pf


_SPLIT = re.compile(r"[,\s]+")


def load_reference_set(path, width: int | None = None) -> np.ndarray:
    """Read one point per line; commas or whitespace separate values, ``#`` starts a comment."""
    path = Path(path)
    rows = []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = [t for t in _SPLIT.split(line) if t]
            try:
                row = [float(t) for t in tokens]
            except ValueError:
                raise ReferenceSetError(path, lineno, f"non-numeric value in {line!r}") from None
            if width is None:
                width = len(row)
            if len(row) != width:
                raise ReferenceSetError(path, lineno, f"expected {width} values, found {len(row)}")
            rows.append(row)
    if not rows:
        raise ReferenceSetError(path, None, "no data rows")
    return np.array(rows, dtype=float)


def write_reference_set(path, points) -> None:
    P = np.atleast_2d(np.asarray(points, dtype=float))
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in P:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
