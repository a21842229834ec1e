"""Steady-state four-wave-mixing Bragg-scattering in a three-mode ring.

The signal couples to a blue (``i+``) and a red (``i-``) idler through the
pump-induced rate Omega0; Omega1 measures the idler asymmetry and Omega2
the common idler detuning from dispersion. With d/dt = 0 the mean fields
solve

    (alpha + i*ds) Es - i*O0*Ei- - i*O0*Ei+ = i*sqrt(theta*Ps)
    (alpha + i*(ds + O1 + O2)) Ei+          = i*O0*Es
    (alpha + i*(ds - O1 + O2)) Ei-          = i*O0*Es

where ds = delta_s*tR is the per-round-trip signal detuning. All detunings
passed to public functions are physical (rad/s); the conversion to
round-trip units happens here.

Positive Omega1 pushes the blue idler further from its resonance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np

from .errors import AccuracyError
from .resonator import DispersionModel, ModeCoupling, resonance_frequency

TWO_PI = 2.0 * math.pi
FWHM_TO_SIGMA = 1.0 / math.sqrt(8.0 * math.log(2.0))


@dataclass(frozen=True)
class FwmBsParams:
    """Reduced model: coupling, asymmetry and dispersion mismatch, loss, extraction."""

    omega0_cpl: float
    omega1_mis: float
    omega2_disp: float
    alpha: float
    theta: float
    t_round_trip: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.theta <= 2 * self.alpha * (1 + 1e-12):
            raise ValueError(f"theta must lie in (0, 2*alpha], got theta={self.theta}, alpha={self.alpha}")
        if self.omega0_cpl < 0:
            raise ValueError(f"Omega0 must be non-negative, got {self.omega0_cpl}")
        if not self.t_round_trip > 0:
            raise ValueError("round-trip time must be positive")

    @classmethod
    def from_mode(cls, mc: ModeCoupling, omega0: float = 0.0, omega1: float = 0.0,
                  omega2: float = 0.0) -> "FwmBsParams":
        return cls(omega0, omega1, omega2, mc.alpha, mc.theta, mc.t_round_trip)

    def with_(self, **changes) -> "FwmBsParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class PumpConfig:
    """Two pumps in the telecom band; powers in W, detunings and separation in rad/s."""

    p1_power: float
    p2_power: float
    p1_detuning: float
    p2_detuning: float
    pump_separation: float
    gamma_p: float
    gamma_s: float
    ring_length: float
    pump_coupling: ModeCoupling

    def __post_init__(self) -> None:
        if self.p1_power < 0 or self.p2_power < 0:
            raise ValueError("pump powers must be non-negative")
        if not self.ring_length > 0:
            raise ValueError("ring length must be positive")

    def with_(self, **changes) -> "PumpConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class SteadyStateFields:
    e_s: complex
    e_i_plus: complex
    e_i_minus: complex


@dataclass(frozen=True)
class ConversionResult:
    ce_blue: float
    ce_red: float
    t_signal: float


class Shape(str, Enum):
    LORENTZIAN = "lorentzian"
    GAUSSIAN = "gaussian"
    DELTA = "delta"


@dataclass(frozen=True)
class SignalSpectrum:
    """Input power spectrum: FWHM in Hz, centre detuning in rad/s."""

    fwhm: float = 0.0
    shape: Shape = Shape.LORENTZIAN
    center_detuning: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", Shape(self.shape))
        if self.shape is not Shape.DELTA and not self.fwhm > 0:
            raise ValueError(f"fwhm must be positive for a {self.shape.value} spectrum")


@dataclass(frozen=True)
class IntegrationGrid:
    """Quadrature control for spectrally averaged responses.

    Gaussian spectra are sampled over +-``span_fwhm`` FWHM. Lorentzian spectra
    are integrated over the whole line by sampling uniformly in the
    cumulative-distribution variable, so no tail is truncated. The point count
    is doubled until the averages change by less than ``rtol``.
    """

    n_points: int = 501
    span_fwhm: float = 10.0
    rtol: float = 1e-4
    max_doublings: int = 10


ParamsLike = Union[FwmBsParams, Callable[[float], FwmBsParams]]


# -- pumps and mismatches ---------------------------------------------------

def pump_intracavity(power: float, detuning: float, mc: ModeCoupling) -> float:
    """Intracavity pump power |Ep|**2 (W) for on-chip ``power`` and ``detuning`` (rad/s)."""
    if power < 0:
        raise ValueError("power must be non-negative")
    x = detuning * mc.t_round_trip
    return mc.theta * power / (mc.alpha**2 + x**2)


def pump_fields(pc: PumpConfig) -> tuple[float, float]:
    return (pump_intracavity(pc.p1_power, pc.p1_detuning, pc.pump_coupling),
            pump_intracavity(pc.p2_power, pc.p2_detuning, pc.pump_coupling))


def omega0_from_pumps(pc: PumpConfig) -> float:
    """Bragg-scattering rate 2*gamma_s*L*|Ep1*Ep2|."""
    e1, e2 = pump_fields(pc)
    return 2.0 * pc.gamma_s * pc.ring_length * math.sqrt(e1 * e2)


def mismatches_from_dispersion(pc: PumpConfig, disp_signal_band: DispersionModel,
                               mu: int) -> tuple[float, float]:
    """Idler asymmetry Omega1 and common mismatch Omega2 for a |mu|-FSR shift.

    The blue idler sits in signal-band mode +|mu| and the red idler in -|mu|.
    Both idler detunings are taken from the exact comb, so with D3 = 0 this is

        Omega1 = (D1*|mu| - sep)*tR - (gamma_p*L/2)*(|Ep1|**2 - |Ep2|**2)
        Omega2 = D2*mu**2*tR/2

    and a nonzero D3 adds D3*|mu|**3*tR/6 to Omega1 (the cubic term is odd in
    mode number, so it splits the two idlers rather than shifting both).
    """
    if mu == 0:
        raise ValueError("mu must be nonzero")
    m = abs(int(mu))
    tr = pc.pump_coupling.t_round_trip
    w0 = disp_signal_band.omega0_ref
    # detuning convention: resonance minus optical frequency, matching delta_s
    det_blue = (resonance_frequency(disp_signal_band, m) - w0) - pc.pump_separation
    det_red = (resonance_frequency(disp_signal_band, -m) - w0) + pc.pump_separation
    e1, e2 = pump_fields(pc)
    xpm = 0.5 * pc.gamma_p * pc.ring_length * (e1 - e2)
    omega1 = 0.5 * (det_blue - det_red) * tr - xpm
    omega2 = 0.5 * (det_blue + det_red) * tr
    return omega1, omega2


# -- steady state -----------------------------------------------------------

def _solve(p: FwmBsParams, delta_s, p_signal: float = 1.0):
    ds = np.asarray(delta_s, dtype=float) * p.t_round_trip
    drive = 1j * math.sqrt(p.theta * p_signal)
    d_plus = p.alpha + 1j * (ds + p.omega1_mis + p.omega2_disp)
    d_minus = p.alpha + 1j * (ds - p.omega1_mis + p.omega2_disp)
    o2 = p.omega0_cpl**2
    e_s = drive / (p.alpha + 1j * ds + o2 / d_plus + o2 / d_minus)
    e_p = 1j * p.omega0_cpl * e_s / d_plus
    e_m = 1j * p.omega0_cpl * e_s / d_minus
    return e_s, e_p, e_m


def steady_state(p: FwmBsParams, delta_s: float, p_signal: float = 1.0) -> SteadyStateFields:
    """Intracavity signal and idler fields for a cw signal at ``delta_s`` (rad/s)."""
    if p_signal < 0:
        raise ValueError("signal power must be non-negative")
    e_s, e_p, e_m = _solve(p, float(delta_s), p_signal)
    return SteadyStateFields(complex(e_s), complex(e_p), complex(e_m))


def _efficiencies(p: FwmBsParams, delta_s):
    e_s, e_p, e_m = _solve(p, delta_s, 1.0)
    ce_b = p.theta * np.abs(e_p) ** 2
    ce_r = p.theta * np.abs(e_m) ** 2
    t_s = np.abs(1.0 + 1j * math.sqrt(p.theta) * e_s) ** 2
    return ce_b, ce_r, t_s


def cw_response(p: FwmBsParams, delta_s: float, p_signal: float = 1.0) -> ConversionResult:
    """On-chip conversion efficiencies and signal transmission for a cw input.

    The response is linear in the signal field, so ``p_signal`` only has to be
    positive.
    """
    if not p_signal > 0:
        raise ValueError("signal power must be positive")
    ce_b, ce_r, t_s = _efficiencies(p, float(delta_s))
    return ConversionResult(float(ce_b), float(ce_r), float(t_s))


def _params_at(p_at: ParamsLike):
    if isinstance(p_at, FwmBsParams):
        return lambda deltas: _efficiencies(p_at, deltas)

    def evaluate(deltas):
        rows = [_efficiencies(p_at(float(d)), float(d)) for d in np.ravel(deltas)]
        arr = np.array(rows, dtype=float).T
        return tuple(a.reshape(np.shape(deltas)) for a in arr)

    return evaluate


def _quadrature(evaluate, spectrum: SignalSpectrum, n: int, grid: IntegrationGrid):
    w = TWO_PI * spectrum.fwhm
    # midpoint rule on the open interval
    k = (np.arange(n) + 0.5) / n
    if spectrum.shape is Shape.LORENTZIAN:
        u = np.pi * (k - 0.5)
        deltas = spectrum.center_detuning + 0.5 * w * np.tan(u)
        weights = np.full(n, 1.0 / n)
    else:
        span = grid.span_fwhm * w
        deltas = spectrum.center_detuning + span * (2.0 * k - 1.0)
        sigma = w * FWHM_TO_SIGMA
        weights = np.exp(-0.5 * ((deltas - spectrum.center_detuning) / sigma) ** 2)
        weights /= weights.sum()
    ce_b, ce_r, t_s = evaluate(deltas)
    return np.array([weights @ ce_b, weights @ ce_r, weights @ t_s])


def pulsed_response(p_at: ParamsLike, spectrum: SignalSpectrum,
                    grid: IntegrationGrid = IntegrationGrid()) -> ConversionResult:
    """Spectral-density-weighted average of the cw response.

    ``p_at`` is either fixed parameters or a function of signal detuning
    (rad/s) returning parameters.
    """
    evaluate = _params_at(p_at)
    if spectrum.shape is Shape.DELTA:
        ce_b, ce_r, t_s = evaluate(np.array([spectrum.center_detuning]))
        return ConversionResult(float(ce_b[0]), float(ce_r[0]), float(t_s[0]))

    n = grid.n_points
    prev = _quadrature(evaluate, spectrum, n, grid)
    for _ in range(grid.max_doublings):
        n *= 2
        cur = _quadrature(evaluate, spectrum, n, grid)
        change = np.max(np.abs(cur - prev) / np.maximum(np.abs(cur), 1e-300))
        if change < grid.rtol:
            return ConversionResult(*(float(v) for v in cur))
        prev = cur
    raise AccuracyError(
        f"spectral average not converged after {grid.max_doublings} doublings "
        f"(relative change {change:.2e} > {grid.rtol:.1e})"
    )


# -- sweeps -----------------------------------------------------------------

def detuning_sweep(p_base: FwmBsParams, deltas: Sequence[float],
                   p_signal: float = 1.0) -> list[tuple[float, ConversionResult]]:
    if len(deltas) == 0:
        raise ValueError("deltas must be non-empty")
    if not p_signal > 0:
        raise ValueError("signal power must be positive")
    ce_b, ce_r, t_s = _efficiencies(p_base, np.asarray(deltas, dtype=float))
    return [(float(d), ConversionResult(float(b), float(r), float(t)))
            for d, b, r, t in zip(deltas, ce_b, ce_r, t_s)]


def bandwidth_sweep(p_at: ParamsLike, fwhms: Sequence[float], shape=Shape.LORENTZIAN,
                    grid: IntegrationGrid = IntegrationGrid()) -> list[tuple[float, ConversionResult]]:
    if any(f <= 0 for f in fwhms):
        raise ValueError("fwhms must be positive")
    return [(float(f), pulsed_response(p_at, SignalSpectrum(f, shape, 0.0), grid)) for f in fwhms]


def params_from_pumps(pc: PumpConfig, signal_mc: ModeCoupling, disp: DispersionModel,
                      mu: int) -> FwmBsParams:
    """Reduced parameters for pumps ``pc`` translating by |mu| signal-band FSRs."""
    omega1, omega2 = mismatches_from_dispersion(pc, disp, mu)
    return FwmBsParams(omega0_from_pumps(pc), omega1, omega2,
                       signal_mc.alpha, signal_mc.theta, signal_mc.t_round_trip)


def pump2_detuning_sweep(pc: PumpConfig, detunings2: Sequence[float], spectrum: SignalSpectrum,
                         signal_mc: ModeCoupling, disp: DispersionModel, mu: int,
                         grid: IntegrationGrid = IntegrationGrid()) -> list[tuple[float, ConversionResult]]:
    """Conversion versus the detuning of pump 2 with pump 1 held fixed.

    Pump 2 is the higher-frequency pump; detuning it by ``d2`` (resonance minus
    laser) moves the laser by ``-d2`` and so changes the pump separation by the
    same amount relative to ``pc.pump_separation`` (the separation at
    ``d2 = pc.p2_detuning``). Its intracavity power follows the cavity
    Lorentzian while pump 1's stays fixed.
    """
    out = []
    for d2 in detunings2:
        shifted = pc.with_(p2_detuning=float(d2),
                           pump_separation=pc.pump_separation - (float(d2) - pc.p2_detuning))
        params = params_from_pumps(shifted, signal_mc, disp, mu)
        out.append((float(d2), pulsed_response(params, spectrum, grid)))
    return out


def matched_separation(pc: PumpConfig, disp_signal: DispersionModel, mu: int) -> float:
    """Pump separation (rad/s) that zeroes Omega1, XPM included."""
    probe = pc.with_(pump_separation=0.0)
    omega1, _ = mismatches_from_dispersion(probe, disp_signal, mu)
    # Omega1 falls by tR per rad/s of extra separation
    return omega1 / pc.pump_coupling.t_round_trip


@dataclass(frozen=True)
class WindowPoint:
    mu: int
    shift_hz: float
    ce_blue: float
    ce_red: float


def translation_window(pc: PumpConfig, disp_signal: DispersionModel, mus: Sequence[int],
                       spectrum: SignalSpectrum, disp_pump: DispersionModel,
                       signal_mc: ModeCoupling,
                       grid: IntegrationGrid = IntegrationGrid()) -> list[WindowPoint]:
    """Conversion across multi-FSR shifts with both pumps on their resonances.

    For each mu the pumps occupy telecom modes 0 and |mu|, so their separation
    is the exact pump-band mode spacing (pump-band D2/D3 included). Omega0 is
    unchanged across the window.
    """
    if len(mus) == 0 or any(m == 0 for m in mus):
        raise ValueError("mus must be non-empty and nonzero")
    out = []
    for mu in mus:
        m = abs(int(mu))
        sep = float(resonance_frequency(disp_pump, m) - resonance_frequency(disp_pump, 0))
        params = params_from_pumps(pc.with_(pump_separation=sep), signal_mc, disp_signal, m)
        res = pulsed_response(params, spectrum, grid)
        out.append(WindowPoint(int(mu), disp_signal.d1 * mu / TWO_PI, res.ce_blue, res.ce_red))
    return out


def window_width(points: Sequence[WindowPoint], threshold: float = 0.30) -> float:
    """Width (Hz) of the longest run of consecutive shifts with blue CE above ``threshold``.

    Points are taken in ascending shift order; the width is last minus first
    shift of the run (0 for a single point or none).
    """
    pts = sorted(points, key=lambda p: p.shift_hz)
    best = 0.0
    start = None
    for i, p in enumerate(pts):
        if p.ce_blue > threshold:
            if start is None:
                start = i
            best = max(best, p.shift_hz - pts[start].shift_hz)
        else:
            start = None
    return best
