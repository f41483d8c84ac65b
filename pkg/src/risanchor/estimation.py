"""Delay/Doppler estimation per RIS and the least-squares line intersection."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .channel import PilotGrid, SignalGrid
from .errors import DimensionError, EstimationError, RankDeficientError
from .geometry import AnchorObservation, PositionLine, Vec2

PARALLEL_TOL = 1e-9


@dataclass(frozen=True)
class SearchWindow:
    """Rectangular (delay, Doppler) search region.

    ``tolerance`` is expressed in resolution cells (delay in units of
    1/bandwidth, Doppler in units of 1/time-span).
    """

    delay: tuple[float, float]
    doppler: tuple[float, float]
    delay_count: int
    doppler_count: int
    tolerance: float = 1e-9
    max_iter: int = 200

    def __post_init__(self):
        if not (self.delay[0] <= self.delay[1] and self.doppler[0] <= self.doppler[1]):
            raise EstimationError("search window intervals are empty")
        if self.delay_count < 1 or self.doppler_count < 1:
            raise EstimationError("search window needs at least one grid point per axis")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    @classmethod
    def around(cls, delay, doppler, pilots: PilotGrid, delay_cells=4.0, doppler_cells=8.0,
               tolerance=1e-9) -> "SearchWindow":
        """Window of +-``delay_cells``/B and +-``doppler_cells``/span about a guess.

        Coarse steps are at most a quarter resolution cell on each axis.
        """
        bw, span = _resolution(pilots)
        half_tau = delay_cells / bw
        half_nu = doppler_cells / span
        n_tau = int(np.ceil(2 * half_tau * 4 * bw)) + 1
        n_nu = int(np.ceil(2 * half_nu * 4 * span)) + 1
        return cls((delay - half_tau, delay + half_tau), (doppler - half_nu, doppler + half_nu),
                   n_tau, n_nu, tolerance)

    def axes(self):
        return (np.linspace(*self.delay, self.delay_count),
                np.linspace(*self.doppler, self.doppler_count))


@dataclass(frozen=True)
class LinearFix:
    """Stacked system ``K p = b`` with ``p = (y, x)``."""

    K: np.ndarray
    b: np.ndarray
    estimate: Vec2 | None = None
    residual_norm: float | None = None
    condition: float | None = None

    @property
    def p(self) -> np.ndarray:
        """The estimate in ``(y, x)`` order."""
        if self.estimate is None:
            raise ValueError("system has not been solved")
        return np.array([self.estimate.y, self.estimate.x])


def _resolution(pilots: PilotGrid):
    bw = pilots.bandwidth
    span = pilots.time_span
    if bw <= 0 or span <= 0:
        raise EstimationError("delay-Doppler estimation needs F >= 2 and T >= 2")
    return bw, span


def _quadratic_step(P):
    """Vertex of the quadratic fitted to a 3x3 stencil, in stencil units."""
    gx = (P[2].sum() - P[0].sum()) / 6.0
    gy = (P[:, 2].sum() - P[:, 0].sum()) / 6.0
    hxx = (P[2].sum() - 2.0 * P[1].sum() + P[0].sum()) / 3.0
    hyy = (P[:, 2].sum() - 2.0 * P[:, 1].sum() + P[:, 0].sum()) / 3.0
    hxy = (P[2, 2] - P[2, 0] - P[0, 2] + P[0, 0]) / 4.0
    det = hxx * hyy - hxy * hxy
    if hxx < 0 and det > 0:
        step = -np.array([hyy * gx - hxy * gy, hxx * gy - hxy * gx]) / det
        return np.clip(step, -1.0, 1.0)
    # Not locally concave: move to the best stencil point.
    i, j = np.unravel_index(np.argmax(P), P.shape)
    return np.array([i - 1.0, j - 1.0])


def estimate_delay_doppler(y: SignalGrid, pilots: PilotGrid, window: SearchWindow,
                           reference_delay: float = 0.0) -> AnchorObservation:
    """Periodogram maximum of ``|sum Y X* exp(+j2pi(tau f - nu t))|^2``.

    ``reference_delay`` is a known delay (the BS->RIS leg) removed from ``Y``
    before the search, so the returned delay is the RIS->UE part only.

    The coarse-grid maximum (ties resolved towards the lowest delay, then the
    lowest Doppler) is refined by repeated quadratic fits on a 3x3 stencil
    that shrinks around the peak and widens again when a step is clipped.
    """
    if y.shape != pilots.shape:
        raise DimensionError(f"signal {y.shape} vs pilots {pilots.shape}")
    bw, span = _resolution(pilots)
    z = y.values * np.conj(pilots.values)
    if reference_delay:
        z = z * np.exp(2j * np.pi * reference_delay * pilots.frequencies)[:, None]
    z = np.ascontiguousarray(z)
    # Reference offsets only change a global phase of the correlation.
    fb = pilots.frequencies - pilots.center_frequency
    tb = pilots.times - pilots.times.mean()

    taus, nus = window.axes()
    coarse = _kernels.periodogram_grid(z, fb, tb, taus, nus)
    a, b = np.unravel_index(np.argmax(coarse), coarse.shape)

    # Work in resolution-cell units so both axes are O(1).
    center = np.array([taus[a] * bw, nus[b] * span])
    step_tau = (taus[1] - taus[0]) * bw if taus.size > 1 else 0.25
    step_nu = (nus[1] - nus[0]) * span if nus.size > 1 else 0.25
    h0 = np.array([step_tau, step_nu])
    h = h0.copy()
    h_min = 1e-5
    lo = np.array([window.delay[0] * bw - step_tau, window.doppler[0] * span - step_nu])
    hi = np.array([window.delay[1] * bw + step_tau, window.doppler[1] * span + step_nu])
    offsets = np.array([-1.0, 0.0, 1.0])

    for _ in range(window.max_iter):
        gu = center[0] + offsets * h[0]
        gw = center[1] + offsets * h[1]
        uu, ww = np.meshgrid(gu, gw, indexing="ij")
        vals = _kernels.periodogram_points(z, fb, tb, uu.ravel() / bw, ww.ravel() / span)
        step = _quadratic_step(vals.reshape(3, 3))
        move = step * h
        center = np.clip(center + move, lo, hi)
        if np.all(np.abs(move) < window.tolerance):
            return AnchorObservation.from_means(center[0] / bw, center[1] / span)
        # Steps that hit the stencil edge widen it again; interior steps shrink it.
        h = np.where(np.abs(step) >= 1.0, np.minimum(2.0 * h, h0),
                     np.clip(4.0 * np.abs(move), h_min, h))
    raise EstimationError(f"refinement did not converge in {window.max_iter} iterations")


def build_system(lines) -> LinearFix:
    lines = list(lines)
    if len(lines) < 2:
        raise RankDeficientError(f"need at least 2 position lines, got {len(lines)}")
    slopes = np.array([ln.slope for ln in lines], dtype=float)
    if np.ptp(slopes) <= PARALLEL_TOL:
        raise RankDeficientError("all position lines are parallel")
    K = np.column_stack([np.ones_like(slopes), -slopes])
    b = np.array([ln.intercept for ln in lines], dtype=float)
    return LinearFix(K, b)


def ls_solve(fix: LinearFix) -> LinearFix:
    K, b = fix.K, fix.b
    if K.ndim != 2 or K.shape[1] != 2 or K.shape[0] != b.size:
        raise DimensionError(f"K {K.shape} and b {b.shape} are inconsistent")
    if K.shape[0] < 2 or np.linalg.matrix_rank(K) < 2:
        raise RankDeficientError("K does not have full column rank")
    p, *_ = np.linalg.lstsq(K, b, rcond=None)
    resid = K @ p - b
    return replace(
        fix,
        estimate=Vec2(x=float(p[1]), y=float(p[0])),
        residual_norm=float(np.linalg.norm(resid)),
        condition=float(np.linalg.cond(K)),
    )


def solve_lines(lines) -> LinearFix:
    """:func:`build_system` followed by :func:`ls_solve`."""
    return ls_solve(build_system(lines))
