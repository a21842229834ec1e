"""Pair rates, Raman noise, SNR bookkeeping and coincidence statistics.

Power-dependent quantities use pump power in mW. The pair flux grows as
``pair_coeff * P**2`` and the Raman background as ``raman_coeff * P``, both
referred to the same plane (on-chip photon flux), so each arm sees
``eta * (pair + raman) + dark`` at its detector. That convention makes the
Raman-limited SNR independent of link loss; only dark counts break it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize

from .errors import ClampWarning, InsufficientDataError, UndefinedCarError

H_PLANCK = 6.62607015e-34
C_LIGHT = 299792458.0


@dataclass(frozen=True)
class PairSourceModel:
    """Coefficients for pair/noise rates and coincidence counting.

    pair_coeff : pairs/s per mW**2 (on chip)
    raman_coeff : Raman photons/s per mW at the same plane as the pair flux
    eta_s, eta_i : end-to-end transmissions of the two arms
    dk_s, dk_i : power-independent noise counts/s at each detector
    tau_b : coincidence bin width, s
    """

    pair_coeff: float
    raman_coeff: float
    eta_s: float
    eta_i: float
    dk_s: float
    dk_i: float
    tau_b: float

    def __post_init__(self) -> None:
        for name in ("pair_coeff", "raman_coeff", "dk_s", "dk_i"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("eta_s", "eta_i"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if not self.tau_b > 0:
            raise ValueError("tau_b must be positive")

    def with_(self, **changes) -> "PairSourceModel":
        return replace(self, **changes)


@dataclass(frozen=True)
class NoiseBudget:
    """Noise bookkeeping through the converter.

    converter_noise is the converter-added noise flux (photons/s, same plane
    as the signal flux); see ``watts_to_photon_rate`` for a power figure.
    """

    converter_noise: float
    converted_fraction_signal: float = 0.25
    passed_fraction_noise: float = 0.20

    def __post_init__(self) -> None:
        for name in ("converted_fraction_signal", "passed_fraction_noise"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.converter_noise < 0:
            raise ValueError("converter noise must be non-negative")


class CountDecomposition(NamedTuple):
    raman_coeff: float
    pair_coeff: float
    residuals: np.ndarray
    clamped: bool


@dataclass(frozen=True)
class FilterStage:
    """Ideal rectangular bandpass: full bandwidth and centre in Hz."""

    bandwidth: float
    transmission: float
    center: float = 0.0


# -- counts and SNR ---------------------------------------------------------

def watts_to_photon_rate(power_w: float, wavelength_m: float) -> float:
    return power_w * wavelength_m / (H_PLANCK * C_LIGHT)


def decompose_counts(powers: Sequence[float], counts: Sequence[float]) -> CountDecomposition:
    """Split counts into a linear (Raman) and quadratic (pair) part, both >= 0."""
    p = np.asarray(powers, dtype=float)
    c = np.asarray(counts, dtype=float)
    if p.shape != c.shape:
        raise ValueError("powers and counts must have equal length")
    if len(np.unique(p)) < 3:
        raise InsufficientDataError("need at least 3 distinct pump powers")
    if not np.any(c):
        return CountDecomposition(0.0, 0.0, np.zeros_like(c), False)

    a = np.column_stack([p, p**2])
    free, *_ = np.linalg.lstsq(a, c, rcond=None)
    clamped = bool(np.any(free < 0))
    if clamped:
        coef, _ = optimize.nnls(a, c)
        warnings.warn(f"unconstrained decomposition {free} has a negative term; clamped to {coef}",
                      ClampWarning, stacklevel=2)
    else:
        coef = free
    return CountDecomposition(float(coef[0]), float(coef[1]), c - a @ coef, clamped)


def raman_fraction(decomp: CountDecomposition, power: float) -> float:
    """Share of the counts at ``power`` attributed to the linear term."""
    lin = decomp.raman_coeff * power
    total = lin + decomp.pair_coeff * power**2
    return lin / total if total > 0 else 0.0


def pair_rate(model: PairSourceModel, power: float) -> float:
    return model.pair_coeff * power**2


def snr_before(model: PairSourceModel, power: float) -> float:
    """Raman-limited SNR of the source, linear in pump power (mW)."""
    if power < 0:
        raise ValueError("power must be non-negative")
    if power == 0:
        return 0.0
    if model.raman_coeff == 0:
        return math.inf
    return model.pair_coeff * power / model.raman_coeff


def snr_after(budget: NoiseBudget, signal_flux: float, input_noise: float) -> float:
    """SNR of the converted idler given the input signal and noise fluxes."""
    if signal_flux < 0 or input_noise < 0:
        raise ValueError("fluxes must be non-negative")
    num = budget.converted_fraction_signal * signal_flux
    den = budget.passed_fraction_noise * input_noise + budget.converter_noise
    if den == 0:
        return math.inf
    return num / den


def arm_snr(model: PairSourceModel, power: float, arm: str) -> float:
    """Detector-plane SNR of one arm: pair counts over Raman plus dark counts."""
    eta, dk = (model.eta_s, model.dk_s) if arm == "s" else (model.eta_i, model.dk_i)
    noise = eta * model.raman_coeff * power + dk
    sig = eta * pair_rate(model, power)
    if noise == 0:
        return math.inf
    return sig / noise


# -- coincidences -----------------------------------------------------------

def coincidence_rates(model: PairSourceModel, gamma_e: float) -> tuple[float, float]:
    """True and accidental coincidences per bin, ``dk`` taken as the total noise rates."""
    if gamma_e < 0:
        raise ValueError("gamma_e must be non-negative")
    cp = gamma_e * model.eta_s * model.eta_i * model.tau_b
    ca = (gamma_e * model.eta_s + model.dk_s) * (gamma_e * model.eta_i + model.dk_i) * model.tau_b**2
    return cp, ca


def car(model: PairSourceModel, gamma_e: float, snr_s: float, snr_i: float) -> float:
    """Coincidence-to-accidental ratio from the pair rate and the two arm SNRs."""
    if not gamma_e > 0:
        raise UndefinedCarError("CAR is undefined for a zero pair rate")
    return 1.0 / (gamma_e * model.tau_b) / ((1.0 + 1.0 / snr_s) * (1.0 + 1.0 / snr_i))


def car_at_power(model: PairSourceModel, power: float) -> float:
    return car(model, pair_rate(model, power), arm_snr(model, power, "s"), arm_snr(model, power, "i"))


def car_curve(model: PairSourceModel, powers: Sequence[float]) -> np.ndarray:
    return np.array([car_at_power(model, p) for p in powers])


def car_peak(model: PairSourceModel, p_lo: float = 1e-3, p_hi: float = 20.0) -> tuple[float, float]:
    """Pump power (mW) and value of the CAR maximum, searched in log-power."""
    grid = np.geomspace(p_lo, p_hi, 400)
    vals = car_curve(model, grid)
    i = int(np.argmax(vals))
    if i in (0, len(grid) - 1):
        return float(grid[i]), float(vals[i])
    res = optimize.minimize_scalar(lambda lp: -car_at_power(model, math.exp(lp)),
                                   bracket=(math.log(grid[i - 1]), math.log(grid[i]), math.log(grid[i + 1])),
                                   tol=1e-10)
    return math.exp(res.x), -float(res.fun)


def car_degradation(snr_before: float, snr_after: float) -> float:
    """CAR after conversion over CAR before, when only the signal SNR changes."""
    if not (snr_before > 0 and snr_after > 0):
        raise ValueError("SNRs must be positive")
    return (1.0 + 1.0 / snr_before) / (1.0 + 1.0 / snr_after)


def degradation_curve(model: PairSourceModel, budget: NoiseBudget,
                      powers: Sequence[float]) -> np.ndarray:
    """CAR degradation across pump powers for an on-chip signal flux and Raman input."""
    out = []
    for p in powers:
        sig = pair_rate(model, p)
        noise = model.raman_coeff * p
        out.append(car_degradation(snr_before(model, p), snr_after(budget, sig, noise)))
    return np.array(out)


def filter_chain(freqs: np.ndarray, density: np.ndarray, stages: Sequence[FilterStage]) -> np.ndarray:
    """Pass a spectral density through ideal rectangular filters in series."""
    if len(stages) == 0:
        raise ValueError("at least one filter stage is required")
    f = np.asarray(freqs, dtype=float)
    out = np.array(density, dtype=float, copy=True)
    for st in stages:
        inband = np.abs(f - st.center) <= 0.5 * st.bandwidth
        out = np.where(inband, out * st.transmission, 0.0)
    return out


# -- calibration ------------------------------------------------------------

def calibrate_source(pair_rate_ref: float, power_ref: float = 4.0, snr_ref: float = 2.5,
                     car_ref: float = 10.0, peak_power: float = 0.67,
                     eta_s: float = 0.0173, eta_i: float = 0.0072) -> PairSourceModel:
    """Source coefficients matching anchor values at one pump power.

    ``pair_rate_ref`` (pairs/s at ``power_ref``) fixes pair_coeff and
    ``snr_ref`` the Raman coefficient. A common dark rate places the CAR
    maximum at ``peak_power`` and the bin width then sets CAR(power_ref).
    """
    pair_coeff = pair_rate_ref / power_ref**2
    raman_coeff = pair_coeff * power_ref / snr_ref
    base = PairSourceModel(pair_coeff, raman_coeff, eta_s, eta_i, 0.0, 0.0, 1e-9)

    def peak_minus_target(log_dk):
        dk = math.exp(log_dk)
        m = base.with_(dk_s=dk, dk_i=dk)
        return math.log(car_peak(m)[0] / peak_power)

    log_dk = optimize.brentq(peak_minus_target, math.log(1e-3), math.log(1e9), xtol=1e-12)
    dk = math.exp(log_dk)
    m = base.with_(dk_s=dk, dk_i=dk)
    # CAR scales as 1/tau_b
    tau_b = m.tau_b * car_at_power(m, power_ref) / car_ref
    return m.with_(tau_b=tau_b)
