"""The generation loop shared by LORD and LORD-II."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import Candidate, ConfigurationError, CountingEvaluator, Population, initialize_population, make_rng
from .filters import FilterContext, Variant, apply_filter
from .problems import ProblemDef
from .ranking import dominates
from .refvec import PbiConfig, associate_all, das_dennis, default_divisions
from .variation import ReproductionParams, k_nbr_for, perturb, update_means

log = logging.getLogger(__name__)


@dataclass
class OptimizerConfig:
    variant: Variant = Variant.LORD
    n_pop: int = 200
    max_fes: int = 10000
    p1: int | None = None
    p2: int = 0
    p_mut: float = 0.25
    alpha_l: float = 0.2
    k_nbr_frac: float = 0.2
    pbi_theta: float = 5.0
    seed: int = 0
    strict: bool = True

    def __post_init__(self):
        self.variant = Variant(self.variant)
        if self.n_pop < 4:
            raise ConfigurationError(f"n_pop must be at least 4, got {self.n_pop}")
        if self.max_fes <= self.n_pop:
            raise ConfigurationError(f"max_fes ({self.max_fes}) must exceed n_pop ({self.n_pop})")
        for name in ("p_mut", "alpha_l", "k_nbr_frac"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ConfigurationError(f"{name} must lie in (0, 1], got {value}")
        if self.pbi_theta < 0:
            raise ConfigurationError("pbi_theta must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d


@dataclass
class RunResult:
    final_ps: np.ndarray
    final_pf: np.ndarray
    param_trace: list[tuple[float, float, float]]
    fes_used: int
    wall_ms: float
    n_dir: int
    generations: int
    filter_calls: int = 0
    fallbacks: int = 0
    extras: dict = field(default_factory=dict)


def child_survived(filtered: Population, child: Candidate) -> bool:
    return child in filtered


def run(problem: ProblemDef, cfg: OptimizerConfig, observer=None) -> RunResult:
    """Optimize ``problem`` until the evaluation budget is spent.

    ``observer``, when given, is called as ``observer(event, **data)`` once
    for the initial population (``"init"``), after every filter call
    (``"filter"``) and after every generation (``"generation"``); tests use
    it to check invariants mid-run.
    """
    t0 = time.perf_counter()
    rng = make_rng(cfg.seed)
    p1, p2 = (cfg.p1, cfg.p2) if cfg.p1 is not None else default_divisions(problem.m, cfg.n_pop)
    refs = das_dennis(problem.m, p1, p2)
    if refs.n_dir > cfg.max_fes:
        raise ConfigurationError(f"{refs.n_dir} directions exceed the budget of {cfg.max_fes} evaluations")
    g_max = cfg.max_fes // refs.n_dir
    k_nbr = k_nbr_for(refs.n_dir, cfg.k_nbr_frac)

    pbi_cfg = PbiConfig(theta=cfg.pbi_theta)
    evaluator = CountingEvaluator(problem, listeners=[pbi_cfg.update])
    ctx = FilterContext(
        refs=refs,
        epsilon=cfg.alpha_l * problem.bounds.diagonal,
        pbi_cfg=pbi_cfg,
        variant=cfg.variant,
        strict=cfg.strict,
    )

    pop = initialize_population(problem, cfg.n_pop, rng, evaluator)
    for m, a in zip(pop, associate_all(pop.F, refs)):
        m.assoc = int(a)
    if observer is not None:
        observer("init", pop=pop, ctx=ctx)
    params = ReproductionParams()
    trace = []
    filter_calls = 0

    for gen in range(g_max):
        for k in range(refs.n_dir):
            assoc = pop.assoc
            out = perturb(pop, assoc, refs, k, params, cfg.p_mut, k_nbr, problem.bounds, evaluator, rng)
            if dominates(out.parent1.f, out.child.f):
                continue
            pop = apply_filter(pop, out.child, ctx, rng)
            filter_calls += 1
            if child_survived(pop, out.child):
                if out.used_eta_c is not None:
                    params.success_eta.append(out.used_eta_c)
                else:
                    params.success_f.append(out.used_f_de)
                    params.success_cr.append(out.used_cr)
            if observer is not None:
                observer("filter", pop=pop, child=out.child, ctx=ctx)
        update_means(params)
        trace.append((params.f_de_mean, params.cr_mean, params.eta_c_mean))
        if observer is not None:
            observer("generation", pop=pop, generation=gen, params=params)

    if ctx.fallbacks:
        log.info("%d filter calls used the all-singleton fallback", ctx.fallbacks)
    return RunResult(
        final_ps=pop.X,
        final_pf=pop.F,
        param_trace=trace,
        fes_used=evaluator.calls,
        wall_ms=(time.perf_counter() - t0) * 1000.0,
        n_dir=refs.n_dir,
        generations=g_max,
        filter_calls=filter_calls,
        fallbacks=ctx.fallbacks,
    )
