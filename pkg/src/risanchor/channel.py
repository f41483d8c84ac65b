"""BS -> RIS -> UE channel synthesis on a frequency x time pilot grid.

Grids are stored as ``(F, T)`` arrays. Whenever a grid is flattened into a
sample vector it is done frequency-major (``order="F"``), i.e. the frequency
index runs fastest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constants import SPEED_OF_LIGHT
from .errors import DegenerateGeometryError, DimensionError
from .geometry import PathParams, RisSegment, Vec2, anchor_params

_FOUR_PI_SQRT = np.sqrt(4.0 * np.pi)

PROFILE_MODES = ("mirror", "random", "custom")
SIGNAL_ROLES = ("channel", "signal", "received")


@dataclass(frozen=True)
class PilotGrid:
    frequencies: np.ndarray
    times: np.ndarray
    values: np.ndarray
    tx_power: float = 1.0

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.values, dtype=complex)
        if f.ndim != 1 or t.ndim != 1 or f.size < 1 or t.size < 1:
            raise DimensionError("frequencies and times must be non-empty vectors")
        if np.any(np.diff(f) <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("frequencies and times must be strictly increasing")
        if x.shape != (f.size, t.size):
            raise DimensionError(f"pilot values have shape {x.shape}, expected {(f.size, t.size)}")
        if not self.tx_power > 0:
            raise ValueError("tx_power must be positive")
        if not np.allclose(np.abs(x), np.sqrt(self.tx_power), rtol=1e-12, atol=0):
            raise ValueError("pilot magnitudes must all equal sqrt(tx_power)")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", x)

    @classmethod
    def uniform(cls, f_start, f_stop, f_count, t_span, t_count, tx_power=1.0) -> "PilotGrid":
        """Evenly spaced band ``[f_start, f_stop]`` and times ``i * t_span / T``."""
        if f_count == 1:
            freqs = np.array([0.5 * (f_start + f_stop)])
        else:
            freqs = np.linspace(f_start, f_stop, int(f_count))
        times = np.arange(int(t_count)) * (t_span / t_count)
        values = np.full((freqs.size, times.size), np.sqrt(tx_power), dtype=complex)
        return cls(freqs, times, values, float(tx_power))

    @property
    def shape(self):
        return self.values.shape

    @property
    def center_frequency(self) -> float:
        return 0.5 * (self.frequencies[0] + self.frequencies[-1])

    @property
    def bandwidth(self) -> float:
        return self.frequencies[-1] - self.frequencies[0]

    @property
    def time_span(self) -> float:
        """Observation span, one sample period longer than the last time stamp."""
        t = self.times
        if t.size == 1:
            return 0.0
        return t[-1] - t[0] + (t[1] - t[0])


@dataclass(frozen=True)
class RisProfile:
    coefficients: np.ndarray
    mode: str = "custom"

    def __post_init__(self):
        coef = np.atleast_1d(np.asarray(self.coefficients, dtype=complex))
        if self.mode not in PROFILE_MODES:
            raise ValueError(f"unknown profile mode {self.mode!r}")
        if self.mode == "mirror" and not np.all(coef == 1):
            raise ValueError("mirror profile must be all ones")
        if self.mode == "random" and not np.all(np.isin(coef, (-1, 1))):
            raise ValueError("random profile coefficients must be +-1")
        object.__setattr__(self, "coefficients", coef)

    def __len__(self):
        return self.coefficients.size


@dataclass(frozen=True)
class BsLink:
    position: Vec2
    pathloss: complex
    first_pixel_delay: float
    arrival_angle: float

    def __post_init__(self):
        if self.first_pixel_delay < 0:
            raise ValueError("first_pixel_delay must be non-negative")

    @classmethod
    def from_geometry(cls, position, ris: RisSegment, pathloss=1.0, first_pixel_delay=None) -> "BsLink":
        """Derive delay and arrival angle from the BS and surface positions.

        The angle is chosen so that pixel ``n`` sees the extra far-field delay
        ``(n - 1) * spacing * sin(phi) / c`` relative to the first pixel.
        """
        pos = np.asarray(position, dtype=float)
        to_bs = pos - ris.origin.as_array()
        dist = float(np.hypot(*to_bs))
        if dist == 0:
            raise DegenerateGeometryError("BS coincides with the first pixel")
        sin_phi = -float(ris.direction @ (to_bs / dist))
        if first_pixel_delay is None:
            first_pixel_delay = dist / SPEED_OF_LIGHT
        return cls(Vec2(*pos), complex(pathloss), float(first_pixel_delay),
                   float(np.arcsin(np.clip(sin_phi, -1.0, 1.0))))


@dataclass(frozen=True)
class SignalGrid:
    values: np.ndarray
    role: str

    def __post_init__(self):
        if self.role not in SIGNAL_ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    @property
    def shape(self):
        return self.values.shape

    def vec(self) -> np.ndarray:
        return self.values.ravel(order="F")


@dataclass(frozen=True)
class NoiseModel:
    variance: float
    seed: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("noise variance must be non-negative")

    @classmethod
    def from_snr_db(cls, snr_db, tx_power=1.0, seed=0) -> "NoiseModel":
        """Transmit-referenced SNR: ``sigma^2 = P_tx / 10^(snr/10)``."""
        return cls(tx_power * 10.0 ** (-snr_db / 10.0), seed)


def steering_vector(ris: RisSegment, f_k, phi: float) -> np.ndarray:
    """Far-field array factor; shape ``(N,)`` for scalar ``f_k``, else ``(F, N)``."""
    n = np.arange(ris.pixel_count)
    path = n * ris.pixel_spacing * np.sin(phi) / SPEED_OF_LIGHT
    return np.exp(-2j * np.pi * np.multiply.outer(f_k, path))


def bs_channel(link: BsLink, ris: RisSegment, f_k) -> np.ndarray:
    common = link.pathloss * np.exp(-2j * np.pi * link.first_pixel_delay * np.asarray(f_k))
    return np.asarray(common)[..., None] * steering_vector(ris, f_k, link.arrival_angle)


def bs_reference_delay(link: BsLink, ris: RisSegment) -> float:
    """Pixel-averaged BS->RIS delay, known at the UE since the BS link is known."""
    mean_steer = 0.5 * (ris.pixel_count - 1) * ris.pixel_spacing * np.sin(link.arrival_angle)
    return link.first_pixel_delay + mean_steer / SPEED_OF_LIGHT


def _check_params(ris: RisSegment, params: PathParams):
    if len(params) != ris.pixel_count:
        raise DimensionError(f"{len(params)} path parameters for {ris.pixel_count} pixels")
    if np.any(params.delays <= 0):
        raise DegenerateGeometryError("zero delay")


def ue_channel(ris: RisSegment, params: PathParams, f_k: float, t_i: float) -> np.ndarray:
    _check_params(ris, params)
    tau, nu = params.delays, params.dopplers
    return np.exp(-2j * np.pi * (tau * f_k - nu * t_i)) / (SPEED_OF_LIGHT * tau * _FOUR_PI_SQRT)


def ue_channel_factored(ris: RisSegment, params: PathParams, f_k: float, t_i: float):
    """Split the RIS->UE channel into the anchor phasor and the residual vector.

    Returns ``(phasor, beta)`` with ``ue_channel == phasor * beta``.
    """
    _check_params(ris, params)
    obs = anchor_params(params)
    phasor = np.exp(-2j * np.pi * (obs.mean_delay * f_k - obs.mean_doppler * t_i))
    beta = np.exp(-2j * np.pi * (obs.residual_delays * f_k - obs.residual_dopplers * t_i))
    beta = beta / (SPEED_OF_LIGHT * params.delays * _FOUR_PI_SQRT)
    return phasor, beta


def pixel_amplitudes(ris, profile: RisProfile, link: BsLink, params: PathParams, freqs) -> np.ndarray:
    """Per-sample, per-pixel weights ``(F, N)`` excluding the RIS->UE phase."""
    _check_params(ris, params)
    if len(profile) != ris.pixel_count:
        raise DimensionError(f"profile has {len(profile)} coefficients for {ris.pixel_count} pixels")
    spread = profile.coefficients / (SPEED_OF_LIGHT * params.delays * _FOUR_PI_SQRT)
    return bs_channel(link, ris, np.asarray(freqs)) * spread


def channel_grid(ris, profile, link, params: PathParams, pilots: PilotGrid) -> np.ndarray:
    """Raw ``(F, T)`` channel array; the hot path used by sweeps."""
    amp = pixel_amplitudes(ris, profile, link, params, pilots.frequencies)
    return _kernels.synth_grid(amp, params.delays, params.dopplers, pilots.frequencies, pilots.times)


def assemble_channel(ris, profile: RisProfile, link: BsLink, ue_params: PathParams, pilots: PilotGrid):
    """Channel grid ``H`` and the nuisance gain grid ``gamma``.

    ``gamma`` carries everything except the common anchor phasor, so
    ``H * X == gamma * exp(-j2pi(tau_bar f - nu_bar t))``.
    """
    amp = pixel_amplitudes(ris, profile, link, ue_params, pilots.frequencies)
    f, t = pilots.frequencies, pilots.times
    h = _kernels.synth_grid(amp, ue_params.delays, ue_params.dopplers, f, t)
    obs = anchor_params(ue_params)
    gamma = _kernels.synth_grid(amp, obs.residual_delays, obs.residual_dopplers, f, t) * pilots.values
    return SignalGrid(h, "channel"), gamma


def make_profile(mode: str, n: int, seed=None) -> RisProfile:
    if n < 1:
        raise ValueError("profile length must be at least 1")
    if mode == "mirror":
        return RisProfile(np.ones(n, dtype=complex), "mirror")
    if mode == "random":
        rng = np.random.default_rng(seed)
        return RisProfile(2.0 * rng.integers(0, 2, size=n) - 1.0, "random")
    raise ValueError(f"make_profile supports 'mirror' and 'random', got {mode!r}")


def received_signal(h: SignalGrid, pilots: PilotGrid) -> SignalGrid:
    """Noise-free ``H * X``."""
    if h.shape != pilots.shape:
        raise DimensionError(f"channel {h.shape} vs pilots {pilots.shape}")
    return SignalGrid(h.values * pilots.values, "signal")


def add_noise(signal: SignalGrid, noise: NoiseModel) -> SignalGrid:
    if signal.role != "signal":
        raise ValueError(f"add_noise expects a 'signal' grid, got {signal.role!r}")
    if noise.variance == 0:
        return SignalGrid(signal.values.copy(), "received")
    rng = np.random.default_rng(noise.seed)
    w = rng.standard_normal((2,) + signal.shape)
    w = np.sqrt(noise.variance / 2.0) * (w[0] + 1j * w[1])
    return SignalGrid(signal.values + w, "received")
