"""Fisher information of (tau_bar, nu_bar) and the resulting position bound."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PilotGrid
from .constants import DOPPLER_SINGULAR_MARGIN, SPEED_OF_LIGHT
from .errors import DimensionError, RankDeficientError, SingularInformationError
from .geometry import AnchorObservation, MotionModel, RisSegment, doppler_ratio

# det(J) below this fraction of J11 * J22 is treated as singular.
SINGULAR_RTOL = 1e-10


@dataclass(frozen=True)
class WeightVectors:
    f: np.ndarray
    t: np.ndarray
    k: np.ndarray


@dataclass(frozen=True)
class CovBound:
    """Position covariance bound over ``(y, x)`` plus per-anchor variances."""

    matrix: np.ndarray
    anchor_variances: np.ndarray

    @property
    def crb_y(self) -> float:
        return float(self.matrix[0, 0])

    @property
    def crb_x(self) -> float:
        return float(self.matrix[1, 1])


def weight_vectors(pilots: PilotGrid, noise_var: float) -> WeightVectors:
    """Frequency-major sample weights ``8 pi^2 / sigma^2 * (f_k^2, t_i^2)``."""
    if not noise_var > 0:
        raise SingularInformationError("noise variance must be positive (information is infinite)")
    nf, nt = pilots.shape
    scale = 8.0 * np.pi ** 2 / noise_var
    f = scale * np.tile(pilots.frequencies ** 2, nt)
    t = scale * np.repeat(pilots.times ** 2, nf)
    return WeightVectors(f, t, -np.sqrt(f * t))


def gain_vector(signal) -> np.ndarray:
    """``|h * x|^2`` from an ``(F, T)`` array of ``H * X``, frequency-major."""
    s = np.asarray(signal).ravel(order="F")
    return s.real ** 2 + s.imag ** 2


def fim(g: np.ndarray, w: WeightVectors) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != w.f.shape:
        raise DimensionError(f"gain vector length {g.size} vs weights {w.f.size}")
    jf, jk, jt = g @ w.f, g @ w.k, g @ w.t
    return np.array([[jf, jk], [jk, jt]])


def info_determinant(g, w: WeightVectors) -> float:
    """``g^T A g`` with ``A = (f t^T + t f^T)/2 - k k^T``, without forming A."""
    g = np.asarray(g, dtype=float)
    return float((g @ w.f) * (g @ w.t) - (g @ w.k) ** 2)


def fim_inverse(J: np.ndarray, g, w: WeightVectors) -> np.ndarray:
    det = info_determinant(g, w)
    if not det > SINGULAR_RTOL * abs(J[0, 0] * J[1, 1]):
        raise SingularInformationError(f"Fisher information is singular (g^T A g = {det:.3g})")
    adj = np.array([[J[1, 1], -J[0, 1]], [-J[1, 0], J[0, 0]]])
    return adj / det


def b_gradient(ris: RisSegment, obs: AnchorObservation, motion: MotionModel, f_c: float) -> np.ndarray:
    """Derivatives of the line intercept w.r.t. ``(tau_bar, nu_bar)``.

    Intercept is ``b = b0 + k d cos(psi) + s d sin(psi)`` with ``d = c tau_bar``
    and ``psi = arccos(c nu_bar / (v f_c))``.
    """
    u = doppler_ratio(obs, motion, f_c)
    if abs(u) > 1.0 - DOPPLER_SINGULAR_MARGIN:
        raise SingularInformationError(f"Doppler at the kinematic boundary (|u| = {abs(u):.12g})")
    k, s = ris.slope, ris.side
    psi = np.arccos(u)
    c = SPEED_OF_LIGHT
    d_tau = c * (k * np.cos(psi) + s * np.sin(psi))
    d_nu = (k * np.sin(psi) - s * np.cos(psi)) * c * c * obs.mean_delay / (
        motion.speed * f_c * np.sqrt(1.0 - u * u))
    return np.array([d_tau, d_nu])


def anchor_variance(grad: np.ndarray, J_inv: np.ndarray) -> float:
    return float(max(grad @ J_inv @ grad, 0.0))


def _pseudo_inverse(K: np.ndarray) -> np.ndarray:
    if K.ndim != 2 or K.shape[1] != 2 or K.shape[0] < 2:
        raise RankDeficientError(f"K of shape {K.shape} cannot have full column rank")
    gram = K.T @ K
    if np.linalg.matrix_rank(K) < 2:
        raise RankDeficientError("K does not have full column rank")
    return np.linalg.solve(gram, K.T)


def position_bound(K: np.ndarray, c) -> CovBound:
    c = np.asarray(c, dtype=float)
    K = np.asarray(K, dtype=float)
    if c.shape != (K.shape[0],):
        raise DimensionError(f"{c.size} anchor variances for {K.shape[0]} rows")
    if np.any(c < 0):
        raise ValueError("anchor variances must be non-negative")
    Kp = _pseudo_inverse(K)
    return CovBound((Kp * c) @ Kp.T, c)


def closed_form_diagonals(slopes, c) -> tuple[float, float]:
    """Per-coordinate bounds ``(crb_y, crb_x)`` written directly in the slopes."""
    k = np.asarray(slopes, dtype=float)
    c = np.asarray(c, dtype=float)
    R = k.size
    s1, s2 = k.sum(), (k * k).sum()
    den = R * s2 - s1 * s1
    if R < 2 or den <= 0:
        raise RankDeficientError("slopes do not define a full-rank system")
    wy = (s2 - k * s1) / den
    wx = (s1 - R * k) / den
    return float(np.sum(wy * wy * c)), float(np.sum(wx * wx * c))
