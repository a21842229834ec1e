"""Microring resonance combs and single-mode coupling.

Resonance frequencies follow the Taylor comb

    omega(mu) = omega0 + D1*mu + D2*mu**2/2 + D3*mu**3/6

and a single mode is described by its intrinsic and coupling quality
factors. Loss and coupling enter the coupled-mode solvers as dimensionless
per-round-trip rates

    alpha = omega*tR / (2*QL),    theta = omega*tR / Qc,

so the all-pass through-port transmission is ``|1 - theta/(alpha + i*delta*tR)|**2``.
All public functions take angular frequencies in rad/s.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize

from .errors import FitFailureError, InsufficientDataError, NoResonanceError, SingularFitError

TWO_PI = 2.0 * math.pi

#: FSR of the 40 um rings in both bands; the default round-trip time is 1/FSR.
FSR_HZ = 572e9
DEFAULT_T_ROUND_TRIP = 1.0 / FSR_HZ


@dataclass(frozen=True)
class DispersionModel:
    """Taylor coefficients of one resonance comb (all in rad/s)."""

    omega0_ref: float
    d1: float
    d2: float = 0.0
    d3: float = 0.0

    def __post_init__(self) -> None:
        if not self.omega0_ref > 0:
            raise ValueError(f"omega0_ref must be positive, got {self.omega0_ref}")
        if not self.d1 > 0:
            raise ValueError(f"D1 must be positive, got {self.d1}")

    @classmethod
    def from_hz(cls, f0: float, fsr: float, d2: float = 0.0, d3: float = 0.0) -> "DispersionModel":
        """Build from ordinary frequencies (Hz), i.e. the D_k/2pi values."""
        return cls(TWO_PI * f0, TWO_PI * fsr, TWO_PI * d2, TWO_PI * d3)

    @property
    def t_round_trip(self) -> float:
        """Round-trip time 2*pi/D1 implied by the FSR."""
        return TWO_PI / self.d1


@dataclass(frozen=True)
class ModeCoupling:
    """One cavity mode: resonance (rad/s), Qi, Qc and round-trip time (s).

    ``qi`` may be ``math.inf`` for a lossless cavity.
    """

    omega_res: float
    qi: float
    qc: float
    t_round_trip: float = DEFAULT_T_ROUND_TRIP

    def __post_init__(self) -> None:
        if not (self.qi > 0 and self.qc > 0):
            raise ValueError(f"quality factors must be positive, got Qi={self.qi}, Qc={self.qc}")
        if not self.t_round_trip > 0:
            raise ValueError(f"round-trip time must be positive, got {self.t_round_trip}")
        if not self.omega_res > 0:
            raise ValueError(f"resonance frequency must be positive, got {self.omega_res}")

    @classmethod
    def from_loaded(cls, omega_res: float, ql: float, ql_over_qc: float,
                    t_round_trip: float = DEFAULT_T_ROUND_TRIP) -> "ModeCoupling":
        """Build from the loaded Q and the extraction ratio QL/Qc (= theta/2alpha)."""
        if not 0 < ql_over_qc <= 1:
            raise ValueError(f"QL/Qc must lie in (0, 1], got {ql_over_qc}")
        qc = ql / ql_over_qc
        inv_qi = 1.0 / ql - 1.0 / qc
        qi = math.inf if inv_qi <= 0 else 1.0 / inv_qi
        return cls(omega_res, qi, qc, t_round_trip)

    @property
    def ql(self) -> float:
        return 1.0 / (1.0 / self.qi + 1.0 / self.qc)

    @property
    def alpha(self) -> float:
        return self.omega_res * self.t_round_trip / (2.0 * self.ql)

    @property
    def theta(self) -> float:
        return self.omega_res * self.t_round_trip / self.qc

    @property
    def linewidth_hz(self) -> float:
        """Loaded FWHM linewidth in Hz."""
        return self.omega_res / (TWO_PI * self.ql)


@dataclass(frozen=True)
class TransmissionScan:
    """Power transmission sampled at angular-frequency offsets (rad/s)."""

    detunings: np.ndarray
    transmission: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.detunings, dtype=float)
        t = np.asarray(self.transmission, dtype=float)
        if d.ndim != 1 or d.shape != t.shape:
            raise ValueError("detunings and transmission must be 1-D and of equal length")
        if d.size < 3:
            raise ValueError("a scan needs at least 3 points")
        if np.any(np.diff(d) <= 0):
            raise ValueError("detunings must be strictly increasing")
        object.__setattr__(self, "detunings", d)
        object.__setattr__(self, "transmission", t)


@dataclass(frozen=True)
class ModeRecord:
    mu: int
    omega: float


class DispersionFit(NamedTuple):
    model: DispersionModel
    residuals: list[float]
    rejected: list[int]


class ModeFit(NamedTuple):
    """Both (Qi, Qc) assignments consistent with a fitted dip."""

    under: ModeCoupling
    over: ModeCoupling
    residual_rms: float


def resonance_frequency(disp: DispersionModel, mu):
    """Angular frequency of relative mode ``mu`` (scalar or array)."""
    mu = np.asarray(mu, dtype=float) if not isinstance(mu, (int, float)) else float(mu)
    out = disp.omega0_ref + disp.d1 * mu + 0.5 * disp.d2 * mu**2
    if disp.d3 != 0.0:
        out = out + disp.d3 * mu**3 / 6.0
    return out


def _design(mu: np.ndarray, with_d3: bool, scale: float) -> np.ndarray:
    x = mu / scale
    cols = [np.ones_like(x), x, 0.5 * x**2]
    if with_d3:
        cols.append(x**3 / 6.0)
    return np.column_stack(cols)


def _lstsq_comb(mu: np.ndarray, y: np.ndarray, with_d3: bool):
    scale = float(np.max(np.abs(mu)))
    a = _design(mu, with_d3, scale)
    coef, _, rank, sv = np.linalg.lstsq(a, y, rcond=None)
    if rank < a.shape[1] or sv[-1] / sv[0] < 1e-12:
        raise SingularFitError(f"dispersion design matrix is rank deficient (rank {rank} < {a.shape[1]})")
    # undo the mu scaling: k-th coefficient carries scale**k
    coef = coef / scale ** np.arange(a.shape[1])
    return coef


def fit_dispersion(modes: Sequence[ModeRecord], reject_threshold: float = 5.0) -> DispersionFit:
    """Least-squares fit of the Taylor comb to measured resonances.

    While the largest residual exceeds ``reject_threshold`` times the median
    absolute residual of the modes still in the fit, that mode is dropped and
    the fit repeated. D3 is fitted only when at least six modes take part.
    """
    mus = np.array([m.mu for m in modes], dtype=float)
    omegas = np.array([m.omega for m in modes], dtype=float)
    if len(set(mus.tolist())) != len(mus):
        raise ValueError("mode orders must be distinct")
    if len(mus) < 4:
        raise InsufficientDataError(f"need at least 4 modes, got {len(mus)}")
    if 0 not in mus:
        raise InsufficientDataError("the reference mode mu=0 is required")

    ref = float(omegas[mus == 0][0])
    y = omegas - ref
    # residuals at the level of float rounding of omega itself are not outliers
    floor = 1e3 * np.finfo(float).eps * float(np.max(np.abs(omegas)))

    def fit(mask):
        coef = _lstsq_comb(mus[mask], y[mask], with_d3=int(mask.sum()) >= 6)
        full = _design(mus, len(coef) == 4, 1.0) @ coef
        return coef, y - full

    # drop the worst offender and refit, one mode at a time: a strong outlier
    # drags the first fit towards itself, so a single threshold pass would
    # also discard its well-behaved neighbours
    keep = np.ones(len(mus), dtype=bool)
    coef, resid = fit(keep)
    while True:
        scale = max(float(np.median(np.abs(resid[keep]))), floor)
        score = np.where(keep, np.abs(resid), -np.inf)
        worst = int(np.argmax(score))
        if score[worst] <= reject_threshold * scale:
            break
        keep[worst] = False
        if keep.sum() < 4:
            raise InsufficientDataError(f"only {int(keep.sum())} modes left after outlier rejection")
        coef, resid = fit(keep)

    d3 = float(coef[3]) if len(coef) == 4 else 0.0
    model = DispersionModel(ref + float(coef[0]), float(coef[1]), float(coef[2]), d3)
    rejected = sorted(int(m) for m in mus[~keep])
    return DispersionFit(model, resid.tolist(), rejected)


def coupling_rates(mc: ModeCoupling) -> tuple[float, float]:
    """Per-round-trip loss and coupling rates ``(alpha, theta)``."""
    return mc.alpha, mc.theta


def linear_transmission(mc: ModeCoupling, delta):
    """All-pass power transmission at detuning ``delta`` (rad/s)."""
    t = 1.0 - mc.theta / (mc.alpha + 1j * np.asarray(delta, dtype=float) * mc.t_round_trip)
    out = np.abs(t) ** 2
    return float(out) if out.ndim == 0 else out


def _lorentz_dip(d, center, hw, depth):
    return 1.0 - depth * hw**2 / (hw**2 + (d - center) ** 2)


def fit_mode(scan: TransmissionScan, omega_guess: float,
             t_round_trip: float = DEFAULT_T_ROUND_TRIP, max_nfev: int = 2000) -> ModeFit:
    """Fit a single Lorentzian dip and return both coupling branches.

    ``scan.detunings`` are offsets from ``omega_guess``. Depth and width fix
    QL and the product theta*(2*alpha - theta); the under- and over-coupled
    roots of that quadratic are both returned.
    """
    d = scan.detunings
    t = scan.transmission
    i0 = int(np.argmin(t))
    if t[i0] > 0.99:
        raise NoResonanceError(f"no resonance dip: minimum transmission {t[i0]:.4f} > 0.99")

    depth0 = 1.0 - t[i0]
    below = np.nonzero(t <= 1.0 - depth0 / 2.0)[0]
    hw0 = max(0.5 * (d[below[-1]] - d[below[0]]), float(np.min(np.diff(d))))

    def residual(p):
        return _lorentz_dip(d, d[i0] + p[0] * hw0, hw0 * math.exp(p[1]), p[2]) - t

    sol = optimize.least_squares(
        residual, x0=[0.0, 0.0, depth0], bounds=([-np.inf, -np.inf, 0.0], [np.inf, np.inf, 1.0]),
        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev,
    )
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    if not sol.success:
        raise FitFailureError(f"Lorentzian fit did not converge: {sol.message} (rms residual {rms:.3e})", rms)

    center = d[i0] + sol.x[0] * hw0
    hw = hw0 * math.exp(sol.x[1])
    depth = float(sol.x[2])
    omega = omega_guess + center
    ql = omega / (2.0 * hw)
    t_min = max(0.0, 1.0 - depth)
    branches = []
    for sign in (-1.0, 1.0):
        theta_over_alpha = 1.0 + sign * math.sqrt(t_min)
        qc = math.inf if theta_over_alpha == 0 else 2.0 * ql / theta_over_alpha
        inv_qi = 1.0 / ql - 1.0 / qc
        qi = math.inf if inv_qi <= 0 else 1.0 / inv_qi
        branches.append(ModeCoupling(omega, qi, qc, t_round_trip))
    return ModeFit(branches[0], branches[1], rms)


def synthetic_scan(mc: ModeCoupling, span: float, n: int = 2001) -> TransmissionScan:
    """Noiseless scan of ``linear_transmission`` over +-span/2 (rad/s) around the resonance."""
    d = np.linspace(-span / 2.0, span / 2.0, n)
    return TransmissionScan(d, linear_transmission(mc, d))


def read_modes_csv(path) -> list[ModeRecord]:
    """Read ``mu,omega_hz`` rows (frequencies in Hz) into mode records."""
    with open(Path(path), newline="", encoding="utf-8") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        return [ModeRecord(int(r["mu"]), TWO_PI * float(r["omega_hz"])) for r in rows]


def read_scan_csv(path) -> TransmissionScan:
    """Read ``detuning_hz,transmission`` rows into a scan (rad/s offsets)."""
    with open(Path(path), newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    return TransmissionScan(
        np.array([TWO_PI * float(r["detuning_hz"]) for r in rows]),
        np.array([float(r["transmission"]) for r in rows]),
    )
