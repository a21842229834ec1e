"""Two-photon interference at a 50/50 coupler and the detector response.

For photons from one pair with intensity correlation exp(-gamma*|t|), the
coincidence rate between the two coupler outputs at electronic delay tau is

    P(tau) = e^{-gamma|tau-dt|} + e^{-gamma|tau+dt|}
             - 2 e^{-gamma*max(|tau|, |dt|)} cos(dw*tau) (e1.e2)**2

with dt the arrival-time difference and dw the frequency difference. The
interference envelope is the geometric mean of the two direct terms, which
equals e^{-gamma|tau|} whenever |tau| >= |dt| (in particular for dt = 0)
and keeps P a perfect square for parallel polarizations. The overall scale
is fixed so that the orthogonal, dt = 0 peak equals 2.

The detector model adds a flat accidental floor, blurs with a Gaussian
timing response and integrates into bins centred on multiples of the bin
width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import AccuracyError, ConsistencyError, UnsupportedConfigurationError

TWO_PI = 2.0 * math.pi
FWHM_TO_SIGMA = 1.0 / math.sqrt(8.0 * math.log(2.0))


@dataclass(frozen=True)
class PhotonWavepacket:
    center_freq: float
    gamma: float
    polarization: tuple = (1.0, 0.0, 0.0)
    arrival_time: float = 0.0

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        pol = np.asarray(self.polarization, dtype=float)
        if pol.shape != (3,) or abs(float(np.linalg.norm(pol)) - 1.0) > 1e-12:
            raise ValueError(f"polarization must be a 3-component unit vector, got {self.polarization}")
        object.__setattr__(self, "polarization", tuple(float(v) for v in pol))


@dataclass(frozen=True)
class CoincidenceProfile:
    taus: np.ndarray
    rates: np.ndarray

    def __post_init__(self) -> None:
        taus = np.asarray(self.taus, dtype=float)
        rates = np.asarray(self.rates, dtype=float)
        if taus.shape != rates.shape:
            raise ValueError("taus and rates must have equal length")
        if np.any(rates < 0):
            raise ValueError("rates must be non-negative")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "rates", rates)

    def at(self, tau: float) -> float:
        """Rate at the grid point nearest ``tau``."""
        return float(self.rates[int(np.argmin(np.abs(self.taus - tau)))])


@dataclass(frozen=True)
class DetectorModel:
    jitter_fwhm: float = 120e-12
    bin_width: float = 64e-12

    def __post_init__(self) -> None:
        if self.jitter_fwhm < 0 or not self.bin_width > 0:
            raise ValueError("jitter must be >= 0 and bin width > 0")

    @property
    def sigma(self) -> float:
        return self.jitter_fwhm * FWHM_TO_SIGMA


PARALLEL = (1.0, 0.0, 0.0)
ORTHOGONAL = (0.0, 1.0, 0.0)


def _rates(gamma: float, delta_t: float, delta_w: float, overlap2: float, taus: np.ndarray) -> np.ndarray:
    a = np.exp(-gamma * np.abs(taus - delta_t))
    b = np.exp(-gamma * np.abs(taus + delta_t))
    envelope = np.exp(-gamma * np.maximum(np.abs(taus), abs(delta_t)))
    return a + b - 2.0 * envelope * np.cos(delta_w * taus) * overlap2


def coincidence_profile(a: PhotonWavepacket, b: PhotonWavepacket, taus) -> CoincidenceProfile:
    """Pre-detector coincidence rate of photons ``a`` and ``b`` versus delay."""
    if a.gamma != b.gamma:
        raise UnsupportedConfigurationError("both photons must share one decay rate")
    taus = np.asarray(taus, dtype=float)
    overlap2 = float(np.dot(a.polarization, b.polarization)) ** 2
    rates = _rates(a.gamma, a.arrival_time - b.arrival_time, a.center_freq - b.center_freq, overlap2, taus)
    if np.any(rates < -1e-12):
        raise ConsistencyError(f"negative coincidence rate {rates.min():.3e}")
    return CoincidenceProfile(taus, np.maximum(rates, 0.0))


def pair_profiles(gamma: float, delta_t: float, delta_w: float, taus) -> tuple[CoincidenceProfile, CoincidenceProfile]:
    """Orthogonal and parallel profiles for a delay/frequency offset."""
    first = PhotonWavepacket(delta_w, gamma, PARALLEL, delta_t)
    perp = coincidence_profile(first, PhotonWavepacket(0.0, gamma, ORTHOGONAL, 0.0), taus)
    par = coincidence_profile(first, PhotonWavepacket(0.0, gamma, PARALLEL, 0.0), taus)
    return perp, par


def visibility(gamma: float, delta_t: float, n_grid: int = 20001) -> float:
    """Peak contrast between orthogonal and parallel profiles, same frequency."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    half = abs(delta_t) + 10.0 / gamma
    taus = np.union1d(np.linspace(-half, half, n_grid), [0.0, delta_t, -delta_t])
    perp, par = pair_profiles(gamma, delta_t, 0.0, taus)
    hi, lo = perp.rates.max(), par.rates.max()
    return float((hi - lo) / (hi + lo))


def detector_grid(half_span: float, bin_width: float, oversample: int = 9) -> np.ndarray:
    """Fine grid that tiles bins centred on multiples of ``bin_width``.

    Each bin holds ``oversample`` (odd) equally spaced samples, one of them at
    the bin centre, and the grid covers all bins with |centre| <= half_span.
    """
    if oversample < 8 or oversample % 2 == 0:
        raise ValueError("oversample must be odd and >= 9")
    n_bins = int(math.ceil(half_span / bin_width))
    dt = bin_width / oversample
    k = np.arange(-(n_bins * oversample + oversample // 2), n_bins * oversample + oversample // 2 + 1)
    return k * dt


def apply_detector(profile: CoincidenceProfile, det: DetectorModel,
                   accidental_floor: float = 0.0) -> CoincidenceProfile:
    """Floor, Gaussian timing jitter, then integration into time bins.

    Returns bin-integrated counts at the bin centres. Bins only partly
    covered by the input grid are dropped.
    """
    taus = profile.taus
    steps = np.diff(taus)
    dt = float(steps.mean())
    if np.any(np.abs(steps - dt) > 1e-6 * dt):
        raise AccuracyError("profile grid must be uniform")
    if dt > det.bin_width / 8.0 * (1 + 1e-9):
        raise AccuracyError(f"grid spacing {dt:.3e} s exceeds bin_width/8 = {det.bin_width / 8:.3e} s")

    rates = profile.rates + accidental_floor
    if det.sigma > 0:
        rates = ndimage.gaussian_filter1d(rates, det.sigma / dt, mode="nearest", truncate=8.0)

    idx = np.floor(taus / det.bin_width + 0.5 + 1e-9).astype(np.int64)
    first = idx.min()
    sums = np.bincount(idx - first, weights=rates * dt)
    filled = np.bincount(idx - first)
    full = filled == filled.max()
    centres = (np.arange(sums.size) + first) * det.bin_width
    return CoincidenceProfile(centres[full], np.maximum(sums[full], 0.0))


def beat_family(gamma: float, delta_fs: Sequence[float], det: DetectorModel, floor: float,
                half_span: float | None = None, oversample: int = 9) -> list[tuple[float, CoincidenceProfile]]:
    """Post-detector parallel-polarization profiles at dt = 0 for each frequency offset (Hz)."""
    half_span = 12.0 / gamma if half_span is None else half_span
    taus = detector_grid(half_span, det.bin_width, oversample)
    out = []
    for df in delta_fs:
        _, par = pair_profiles(gamma, 0.0, TWO_PI * df, taus)
        out.append((float(df), apply_detector(par, det, floor)))
    return out


def post_detector_visibility(gamma: float, delta_t: float, det: DetectorModel, floor: float,
                             oversample: int = 9) -> float:
    taus = detector_grid(abs(delta_t) + 12.0 / gamma + 4 * det.sigma, det.bin_width, oversample)
    perp, par = pair_profiles(gamma, delta_t, 0.0, taus)
    hi = apply_detector(perp, det, floor).rates.max()
    lo = apply_detector(par, det, floor).rates.max()
    return float((hi - lo) / (hi + lo))


def visibility_sweep(gamma: float, delta_ts: Sequence[float], det: DetectorModel,
                     floor: float) -> list[tuple[float, float]]:
    return [(float(t), post_detector_visibility(gamma, t, det, floor)) for t in delta_ts]


def floor_for_car(gamma: float, det: DetectorModel, car: float, oversample: int = 9) -> float:
    """Accidental floor giving the orthogonal dt = 0 peak bin a true/accidental ratio ``car``."""
    taus = detector_grid(12.0 / gamma + 4 * det.sigma, det.bin_width, oversample)
    perp, _ = pair_profiles(gamma, 0.0, 0.0, taus)
    peak_counts = apply_detector(perp, det, 0.0).rates.max()
    return float(peak_counts / det.bin_width / car)
