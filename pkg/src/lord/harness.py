"""Experiment plumbing behind the command line: runs, campaigns, summaries."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .core import make_rng
from .engine import OptimizerConfig, RunResult, run
from .metrics import evaluate_run, wilcoxon_rank_sum
from .problems import ProblemDef, get_problem, load_reference_set, sample_reference_set

log = logging.getLogger(__name__)

RESULT_FIELDS = ["problem", "algo", "run", "seed", "igdx", "igdf", "rhv", "rpsp", "cm", "nsx", "fes", "wall_ms"]
METRICS = ["igdx", "igdf", "rhv", "rpsp", "cm", "nsx"]
REFERENCE_SEED = 12345
MIN_RUNS_FOR_TEST = 5


@dataclass(frozen=True)
class ProblemSpec:
    """A problem identifier plus the options its factory accepts."""

    name: str
    options: dict = field(default_factory=dict)
    ref_ps: str | None = None
    ref_pf: str | None = None

    def build(self) -> ProblemDef:
        return get_problem(self.name, **self.options)


def reference_sets(spec: ProblemSpec, problem: ProblemDef) -> tuple[np.ndarray | None, np.ndarray | None]:
    """Reference files when supplied, otherwise a fixed-seed analytic sample."""
    ps = load_reference_set(spec.ref_ps, problem.n) if spec.ref_ps else None
    pf = load_reference_set(spec.ref_pf, problem.m) if spec.ref_pf else None
    if (ps is None or pf is None) and problem.ps_sampler is not None:
        sps, spf = sample_reference_set(problem, problem.n_igd, make_rng(REFERENCE_SEED))
        ps = sps if ps is None else ps
        pf = spf if pf is None else pf
    return ps, pf


def execute(spec: ProblemSpec, cfg: OptimizerConfig) -> dict:
    """One seeded run turned into a JSON-ready artifact."""
    problem = spec.build()
    result: RunResult = run(problem, cfg)
    ref_ps, ref_pf = reference_sets(spec, problem)
    report = evaluate_run(
        result.final_ps,
        result.final_pf,
        ref_ps,
        ref_pf,
        problem.hv_ref,
        problem=spec.name,
        algo=cfg.variant.value,
        seed=cfg.seed,
    )
    return {
        "problem": {"name": spec.name, "options": spec.options, "ref_ps": spec.ref_ps, "ref_pf": spec.ref_pf},
        "config": cfg.to_dict(),
        "n_dir": result.n_dir,
        "generations": result.generations,
        "fes_used": result.fes_used,
        "filter_calls": result.filter_calls,
        "fallbacks": result.fallbacks,
        "param_trace": [list(t) for t in result.param_trace],
        "final_ps": result.final_ps.tolist(),
        "final_pf": result.final_pf.tolist(),
        "report": report.to_dict(),
        "wall_ms": result.wall_ms,
    }


def artifact_row(artifact: dict, run_index: int) -> dict:
    rep = artifact["report"]
    row = {
        "problem": artifact["problem"]["name"],
        "algo": artifact["config"]["variant"],
        "run": run_index,
        "seed": artifact["config"]["seed"],
        "fes": artifact["fes_used"],
        "wall_ms": artifact["wall_ms"],
    }
    row.update({k: rep.get(k) for k in METRICS})
    return row


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


@dataclass(frozen=True)
class Cell:
    spec: ProblemSpec
    algo: str
    run: int
    seed: int
    overrides: dict


def campaign(specs: Iterable[ProblemSpec], algos: Iterable[str], runs: int, base_seed: int, overrides: dict) -> list[Cell]:
    """Grid of cells; run ``r`` always uses ``base_seed + r``."""
    return [
        Cell(spec, algo, r, base_seed + r, overrides)
        for spec in specs
        for algo in algos
        for r in range(runs)
    ]


def run_cell(cell: Cell) -> dict:
    cfg = OptimizerConfig(variant=cell.algo, seed=cell.seed, **cell.overrides)
    return artifact_row(execute(cell.spec, cfg), cell.run)


def iter_cells(cells: list[Cell], jobs: int = 1) -> Iterator[tuple[Cell, dict | None, BaseException | None]]:
    """Yield results in grid order; failures come back as exceptions, not raised."""
    if jobs <= 1:
        for cell in cells:
            try:
                yield cell, run_cell(cell), None
            except Exception as exc:  # noqa: BLE001 - reported per cell
                yield cell, None, exc
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_cell, c) for c in cells]
        for cell, fut in zip(cells, futures):
            try:
                yield cell, fut.result(), None
            except Exception as exc:  # noqa: BLE001
                yield cell, None, exc


def write_results(path: Path, results: Iterable[tuple[Cell, dict | None, BaseException | None]]) -> list[tuple[Cell, BaseException]]:
    """Stream rows to CSV, flushing each; return the failed cells."""
    failures = []
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_FIELDS)
        fh.flush()
        for cell, row, exc in results:
            if exc is not None:
                failures.append((cell, exc))
                continue
            writer.writerow([format_cell(row[k]) for k in RESULT_FIELDS])
            fh.flush()
    return failures


def read_results(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_FIELDS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        rows = []
        for r in reader:
            for k in METRICS + ["wall_ms"]:
                r[k] = float(r[k]) if r[k] != "" else math.nan
            for k in ("run", "seed", "fes"):
                r[k] = int(r[k])
            rows.append(r)
    return rows


@dataclass
class SummaryLine:
    problem: str
    algo: str
    metric: str
    mean: float
    std: float
    n: int
    mark: str | None = None
    p_value: float | None = None


def summarize(rows: list[dict], baseline: str | None = None, alpha: float = 0.05) -> tuple[list[SummaryLine], dict]:
    """Mean, sample std and baseline marks per (problem, algo, metric).

    A mark of ``+`` means the baseline is significantly better than that
    algorithm.  The returned tally counts marks per algorithm.
    """
    groups: dict[tuple[str, str], list[dict]] = {}
    for r in rows:
        groups.setdefault((r["problem"], r["algo"]), []).append(r)
    lines = []
    tally: dict[str, dict[str, int]] = {}
    warned = False
    for (problem, algo), members in groups.items():
        for metric in METRICS:
            vals = np.array([m[metric] for m in members], dtype=float)
            vals = vals[~np.isnan(vals)]
            if vals.size == 0:
                continue
            std = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
            line = SummaryLine(problem, algo, metric, float(vals.mean()), std, int(vals.size))
            base_rows = groups.get((problem, baseline)) if baseline else None
            if base_rows is not None and algo != baseline:
                base = np.array([m[metric] for m in base_rows], dtype=float)
                base = base[~np.isnan(base)]
                if min(base.size, vals.size) < MIN_RUNS_FOR_TEST:
                    if not warned:
                        log.warning("fewer than %d runs in a group; significance omitted", MIN_RUNS_FOR_TEST)
                        warned = True
                else:
                    res = wilcoxon_rank_sum(base, vals, alpha)
                    line.mark, line.p_value = res.mark, res.p_value
                    counts = tally.setdefault(algo, {"+": 0, "-": 0, "~": 0})
                    counts[res.mark] += 1
            lines.append(line)
    return lines, tally


def render_summary(lines: list[SummaryLine], tally: dict, baseline: str | None) -> str:
    out = [f"{'problem':<20} {'algo':<6} {'metric':<6} {'mean':>12} {'std':>12}  sig"]
    for ln in lines:
        mark = f"({ln.mark})" if ln.mark else ""
        out.append(f"{ln.problem:<20} {ln.algo:<6} {ln.metric:<6} {ln.mean:>12.4e} {ln.std:>12.4e}  {mark}")
    for algo, c in sorted(tally.items()):
        out.append(f"+/-/~ vs {baseline} for {algo}: {c['+']}/{c['-']}/{c['~']}")
    return "\n".join(out)
