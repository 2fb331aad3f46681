"""Command line: ``lord run | bench | stats | export``.

Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 internal
consistency failure (strict-mode spectral cross-check).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .core import ConfigurationError, ConsistencyError, ContractViolation, make_rng
from .engine import OptimizerConfig
from .harness import (
    ProblemSpec,
    campaign,
    execute,
    format_cell,
    iter_cells,
    read_results,
    render_summary,
    summarize,
    write_results,
)
from .problems import CapabilityError, ReferenceSetError
from .spectral import spectral_cluster

log = logging.getLogger("lord")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_CONSISTENCY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, help="objective count (polygon problems)")
    p.add_argument("--n", type=int, help="decision dimension (omni-test, lifted polygon)")
    p.add_argument("--scale", type=float, help="polygon box side as a multiple of 100")
    p.add_argument("--ref-ps", help="decision-space reference-set file")
    p.add_argument("--ref-pf", help="objective-space reference-set file")


def _add_optimizer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-pop", type=int, default=200)
    p.add_argument("--max-fes", type=int, default=10000)
    p.add_argument("--p1", type=int, help="outer-layer divisions (default: derived from n-pop)")
    p.add_argument("--p2", type=int, default=0, help="inner-layer divisions")
    p.add_argument("--p-mut", type=float, default=0.25, help="probability of the SBX branch")
    p.add_argument("--alpha-l", type=float, default=0.2, help="graph radius as a fraction of the box diagonal")
    p.add_argument("--pbi-theta", type=float, default=5.0)
    p.add_argument("--lenient", action="store_true", help="warn instead of failing on spectral disagreement")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lord", description="Multi-modal multi-objective optimization with LORD / LORD-II.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="one seeded run written as a JSON artifact")
    p.add_argument("--problem", required=True)
    p.add_argument("--algo", choices=["lord", "lord2"], default="lord")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="artifact path (JSON)")
    _add_problem_flags(p)
    _add_optimizer_flags(p)

    p = sub.add_parser("bench", help="problems x algorithms x runs, one CSV row per run")
    p.add_argument("--problems", nargs="+", required=True)
    p.add_argument("--algos", nargs="+", choices=["lord", "lord2"], default=["lord"])
    p.add_argument("--runs", type=int, default=11)
    p.add_argument("--base-seed", type=int, default=0, help="run r uses seed base-seed + r")
    p.add_argument("--jobs", type=int, default=1, help="worker processes across runs")
    p.add_argument("--out", required=True, help="results CSV")
    _add_problem_flags(p)
    _add_optimizer_flags(p)

    p = sub.add_parser("stats", help="mean, std and rank-sum marks from a results CSV")
    p.add_argument("results")
    p.add_argument("--baseline", help="algorithm the others are compared against")
    p.add_argument("--alpha", type=float, default=0.05)

    p = sub.add_parser("export", help="plot-ready PS/PF CSVs with cluster labels")
    p.add_argument("artifact")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", help="file name prefix (default: artifact stem)")
    return parser


def _problem_spec(args, name: str) -> ProblemSpec:
    options = {k: getattr(args, k) for k in ("m", "n", "scale") if getattr(args, k) is not None}
    return ProblemSpec(name, options, args.ref_ps, args.ref_pf)


def _optimizer_overrides(args) -> dict:
    return {
        "n_pop": args.n_pop,
        "max_fes": args.max_fes,
        "p1": args.p1,
        "p2": args.p2,
        "p_mut": args.p_mut,
        "alpha_l": args.alpha_l,
        "pbi_theta": args.pbi_theta,
        "strict": not args.lenient,
    }


def cmd_run(args) -> int:
    spec = _problem_spec(args, args.problem)
    cfg = OptimizerConfig(variant=args.algo, seed=args.seed, **_optimizer_overrides(args))
    artifact = execute(spec, cfg)
    Path(args.out).write_text(json.dumps(artifact, indent=1) + "\n", encoding="utf-8")
    rep = artifact["report"]
    print(f"wrote {args.out}: igdx={rep['igdx']} igdf={rep['igdf']} fes={artifact['fes_used']}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    overrides = _optimizer_overrides(args)
    OptimizerConfig(**overrides)  # validate before spending any budget
    specs = [_problem_spec(args, name) for name in args.problems]
    for s in specs:
        s.build()
    cells = campaign(specs, args.algos, args.runs, args.base_seed, overrides)
    failures = write_results(Path(args.out), iter_cells(cells, args.jobs))
    for cell, exc in failures:
        print(f"failed: {cell.spec.name} {cell.algo} run {cell.run} seed {cell.seed}: {exc!r}", file=sys.stderr)
    print(f"wrote {len(cells) - len(failures)} of {len(cells)} rows to {args.out}")
    if any(isinstance(exc, ConsistencyError) for _, exc in failures):
        return EXIT_CONSISTENCY
    return EXIT_RUNTIME if failures else EXIT_OK


def cmd_stats(args) -> int:
    if not Path(args.results).is_file():
        raise UsageError(f"no such results file: {args.results}")
    rows = read_results(args.results)
    lines, tally = summarize(rows, args.baseline, args.alpha)
    print(render_summary(lines, tally, args.baseline))
    return EXIT_OK


def cmd_export(args) -> int:
    path = Path(args.artifact)
    if not path.is_file():
        raise UsageError(f"no such artifact: {path}")
    art = json.loads(path.read_text(encoding="utf-8"))
    p = art["problem"]
    problem = ProblemSpec(p["name"], p.get("options") or {}).build()
    cfg = art["config"]
    X = np.array(art["final_ps"], dtype=float)
    F = np.array(art["final_pf"], dtype=float)
    labeling = spectral_cluster(
        X, cfg["alpha_l"] * problem.bounds.diagonal, make_rng(cfg["seed"]), strict=cfg.get("strict", True)
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = args.prefix or path.stem
    for tag, M, col in (("ps", X, "x"), ("pf", F, "f")):
        target = out_dir / f"{prefix}_{tag}.csv"
        with target.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([f"{col}{j + 1}" for j in range(M.shape[1])] + ["cluster"])
            for row, label in zip(M, labeling.labels):
                w.writerow([format_cell(float(v)) for v in row] + [int(label)])
        print(f"wrote {target}")
    print(f"{labeling.k} clusters")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "stats": cmd_stats, "export": cmd_export}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigurationError, ReferenceSetError, CapabilityError, FileNotFoundError) as exc:
        print(f"lord {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as exc:
        print(f"lord {args.command}: consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ContractViolation, RuntimeError, ValueError, OSError) as exc:
        print(f"lord {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
