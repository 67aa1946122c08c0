"""End-to-end placement flow: spectral seed, global placement, legalization."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

from . import metrics
from .bnb import BnbConfig
from .milp import LegalizeConfig, MilpResult, legalize
from .objective import DensityGrid, ObjectiveConfig, total_objective
from .placer import GpConfig, run_global_placement
from .separation import ns_cost
from .spectral import SpectralConfig, orientation_search, spectral_coordinates

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Every knob of the flow.  ``None`` means the per-design default."""

    lambda_ns: float = 1.0
    lambda_d: float = 1.0
    c: float | None = None
    alpha: float = 1e-3
    momentum: float = 0.9
    iterations: int = 5000
    tol: float = 1e-4
    window: int = 20
    refresh: int = 1
    k: float | None = None
    bin_size: float | None = None
    time_cap: float = 4 * 3600.0
    node_limit: int | None = None
    seed: int = 0
    pair_radius: float | None = None
    use_relations: bool = True

    def objective(self, design):
        return ObjectiveConfig.for_design(design, self.c, self.lambda_d, self.lambda_ns)

    def grid(self, design):
        return DensityGrid.for_design(design, self.bin_size)

    def gp(self):
        return GpConfig(self.alpha, self.momentum, self.iterations, self.tol, self.window,
                        self.refresh, self.pair_radius)

    def legalize(self):
        return LegalizeConfig(self.k, self.use_relations,
                              BnbConfig(self.time_cap, node_limit=self.node_limit))

    def with_(self, **kw):
        return replace(self, **kw)


def objective_evaluator(design, cfg):
    """``placement -> F`` for the composite cost, separation solved afresh."""
    obj = cfg.objective(design)
    grid = cfg.grid(design)
    ns = (lambda p: ns_cost(design, p, reduce="sum")) if obj.lambda_ns else None
    return lambda p: total_objective(design, p, obj, ns, grid)


def run_init(design, cfg=RunConfig()):
    seed = spectral_coordinates(design, SpectralConfig(seed=cfg.seed))
    return orientation_search(design, seed, objective_evaluator(design, cfg))


def run_gp(design, placement, cfg=RunConfig(), trace=None):
    return run_global_placement(design, placement.with_fixed(design), cfg.objective(design),
                                cfg.gp(), cfg.grid(design), trace=trace)


def run_legalize(design, placement, cfg=RunConfig()):
    return legalize(design, placement, cfg.legalize())


@dataclass
class FlowResult:
    init: object
    gp: object
    milp: MilpResult
    report: metrics.MetricsReport
    timings: dict = field(default_factory=dict)

    @property
    def placement(self):
        return self.milp.placement

    @property
    def status(self):
        return self.milp.status


def run_flow(design, cfg=RunConfig(), trace=None):
    """Init, global placement and legalization; errors from legalization
    propagate."""
    t = {}
    t0 = time.perf_counter()
    p0 = run_init(design, cfg)
    t["init"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    p1 = run_gp(design, p0, cfg, trace)
    t["gp"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    res = run_legalize(design, p1, cfg)
    t["legalize"] = time.perf_counter() - t0
    rep, _ = metrics.report(design, res.placement, t)
    log.info("flow done: status %s, HPWL %.6g", res.status, rep.hpwl_total)
    return FlowResult(p0, p1, res, rep, t)
