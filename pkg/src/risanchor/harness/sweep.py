"""CRB heatmap sweeps and Monte-Carlo estimator campaigns."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .. import crb
from ..channel import NoiseModel, SignalGrid, add_noise, bs_reference_delay, channel_grid
from ..errors import (DegenerateGeometryError, DomainError, EstimationError,
                      RankDeficientError, SingularInformationError)
from ..estimation import SearchWindow, build_system, estimate_delay_doppler, ls_solve
from ..geometry import Vec2, anchor_params, path_params, polar_from_params, position_line
from .scenario import NOISE_STREAM, Scenario, derive_seed

OK, SINGULAR, RANK_DEFICIENT = "ok", "singular", "rank-deficient"


@dataclass(frozen=True)
class Context:
    """Everything a work unit needs; fixed before any unit runs."""

    segments: tuple
    links: tuple
    profiles: tuple
    pilots: object
    motion: object
    noise_var: float

    @classmethod
    def build(cls, scenario: Scenario, subset, mode=None) -> "Context":
        profiles = scenario.profiles(subset, mode)
        return cls(
            tuple(scenario.ris[r].segment for r in subset),
            tuple(scenario.ris[r].link() for r in subset),
            tuple(profiles[r] for r in subset),
            scenario.pilots.grid(),
            scenario.motion,
            scenario.noise_var,
        )

    @property
    def f_c(self):
        return self.pilots.center_frequency


@dataclass
class HeatmapResult:
    xs: np.ndarray
    ys: np.ndarray
    crb_y: np.ndarray  # (ny, nx), NaN where status != ok
    crb_x: np.ndarray
    status: np.ndarray

    def rows(self):
        """Cells in y-major, then x order."""
        for iy, y in enumerate(self.ys):
            for ix, x in enumerate(self.xs):
                yield x, y, self.crb_y[iy, ix], self.crb_x[iy, ix], self.status[iy, ix]


@dataclass
class MonteCarloResult:
    ue: Vec2
    errors: np.ndarray  # (trials, 2) as (err_x, err_y); NaN for failed trials
    crb_x: float
    crb_y: float

    @property
    def trials(self) -> int:
        return self.errors.shape[0]

    @property
    def ok(self) -> np.ndarray:
        return np.all(np.isfinite(self.errors), axis=1)

    @property
    def failures(self) -> int:
        return int(np.count_nonzero(~self.ok))

    def _good(self):
        return self.errors[self.ok]

    @property
    def rmse_x(self) -> float:
        e = self._good()
        return float(np.sqrt(np.mean(e[:, 0] ** 2))) if e.size else math.nan

    @property
    def rmse_y(self) -> float:
        e = self._good()
        return float(np.sqrt(np.mean(e[:, 1] ** 2))) if e.size else math.nan

    @property
    def bias(self) -> tuple[float, float]:
        e = self._good()
        if not e.size:
            return (math.nan, math.nan)
        return (float(e[:, 0].mean()), float(e[:, 1].mean()))

    @property
    def sqrt_crb_x(self) -> float:
        return math.sqrt(self.crb_x)

    @property
    def sqrt_crb_y(self) -> float:
        return math.sqrt(self.crb_y)


def _parallel_map(func, items, workers):
    items = list(items)
    if workers is None or workers <= 1 or len(items) < 2:
        return [func(it) for it in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunk))


def position_crb(ctx: Context, ue) -> crb.CovBound:
    """Position bound at ``ue``; raises on singular geometry or information."""
    weights = crb.weight_vectors(ctx.pilots, ctx.noise_var)
    variances, slopes = [], []
    for seg, link, prof in zip(ctx.segments, ctx.links, ctx.profiles):
        params = path_params(seg, ue, ctx.motion, ctx.f_c)
        h = channel_grid(seg, prof, link, params, ctx.pilots)
        g = crb.gain_vector(h * ctx.pilots.values)
        J = crb.fim(g, weights)
        J_inv = crb.fim_inverse(J, g, weights)
        grad = crb.b_gradient(seg, anchor_params(params), ctx.motion, ctx.f_c)
        variances.append(crb.anchor_variance(grad, J_inv))
        slopes.append(seg.slope)
    slopes = np.asarray(slopes)
    K = np.column_stack([np.ones_like(slopes), -slopes])
    return crb.position_bound(K, variances)


def _cell(ctx: Context, ue):
    try:
        bound = position_crb(ctx, ue)
    except (SingularInformationError, DegenerateGeometryError, DomainError):
        return math.nan, math.nan, SINGULAR
    except RankDeficientError:
        return math.nan, math.nan, RANK_DEFICIENT
    cy, cx = crb.closed_form_diagonals([s.slope for s in ctx.segments], bound.anchor_variances)
    return cy, cx, OK


def sweep_crb_map(scenario: Scenario, ris_subset=None, profile_mode=None, workers=1) -> HeatmapResult:
    """Per-cell CRB over the scenario grid.

    ``ris_subset`` holds 0-based indices; ``profile_mode`` overrides every
    surface's profile. Profiles are drawn once and shared by all cells.
    """
    subset = scenario.check_positioning(ris_subset)
    xs, ys = scenario.grid.axes()
    shape = (ys.size, xs.size)
    if scenario.is_parallel(subset):
        nan = np.full(shape, np.nan)
        return HeatmapResult(xs, ys, nan, nan.copy(), np.full(shape, RANK_DEFICIENT, dtype=object))
    ctx = Context.build(scenario, subset, profile_mode)
    cells = [(x, y) for y in ys for x in xs]
    out = _parallel_map(partial(_cell, ctx), cells, workers)
    cy = np.array([o[0] for o in out], dtype=float).reshape(shape)
    cx = np.array([o[1] for o in out], dtype=float).reshape(shape)
    status = np.array([o[2] for o in out], dtype=object).reshape(shape)
    return HeatmapResult(xs, ys, cy, cx, status)


def _trial(job):
    ctx, ue, signals, windows, seeds = job
    lines = []
    try:
        for seg, link, sig, window, seed in zip(ctx.segments, ctx.links, signals, windows, seeds):
            y = add_noise(sig, NoiseModel(ctx.noise_var, seed))
            obs = estimate_delay_doppler(y, ctx.pilots, window, bs_reference_delay(link, seg))
            lines.append(position_line(seg, polar_from_params(obs, ctx.motion, ctx.f_c)))
        fix = ls_solve(build_system(lines))
    except (EstimationError, DomainError, RankDeficientError):
        return (math.nan, math.nan)
    return (fix.estimate.x - ue[0], fix.estimate.y - ue[1])


def default_ue(scenario: Scenario) -> Vec2:
    if scenario.ues:
        return scenario.ues[0]
    xs, ys = scenario.grid.axes()
    return Vec2(float(xs[xs.size // 2]), float(ys[ys.size // 2]))


def run_monte_carlo(scenario: Scenario, trials: int, seed=None, ue=None, ris_subset=None,
                    profile_mode=None, workers=1, delay_cells=4.0, doppler_cells=8.0) -> MonteCarloResult:
    """Estimate -> lines -> LS fix repeated over independent noise draws.

    The search window is centred on the noise-free anchor parameters, so the
    campaign measures local (threshold-free) accuracy. Trial ``n`` on RIS
    ``r`` uses noise seed ``derive_seed(seed, NOISE_STREAM, n, r)``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    subset = scenario.check_positioning(ris_subset)
    if scenario.is_parallel(subset):
        raise RankDeficientError("selected RISs are parallel")
    seed = scenario.seed if seed is None else int(seed)
    ue = Vec2(*(default_ue(scenario) if ue is None else ue))
    ctx = Context.build(scenario, subset, profile_mode)

    signals, windows = [], []
    for seg, link, prof in zip(ctx.segments, ctx.links, ctx.profiles):
        params = path_params(seg, ue, ctx.motion, ctx.f_c)
        h = channel_grid(seg, prof, link, params, ctx.pilots)
        signals.append(SignalGrid(h * ctx.pilots.values, "signal"))
        truth = anchor_params(params)
        windows.append(SearchWindow.around(truth.mean_delay, truth.mean_doppler, ctx.pilots,
                                           delay_cells, doppler_cells))

    if ctx.noise_var > 0:
        bound = position_crb(ctx, ue)
        crb_y, crb_x = bound.crb_y, bound.crb_x
    else:
        crb_y = crb_x = 0.0

    jobs = [(ctx, ue, signals, windows,
             [derive_seed(seed, NOISE_STREAM, n, r) for r in subset]) for n in range(trials)]
    errors = np.array(_parallel_map(_trial, jobs, workers), dtype=float).reshape(trials, 2)
    return MonteCarloResult(ue, errors, crb_x, crb_y)
