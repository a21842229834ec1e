"""Electro-optic phase-modulator sidebands as a frequency-shift benchmark.

A lossless phase modulator driven at ``mod_freq`` with modulation depth
``phi0`` puts the fraction J_n(phi0)**2 of the input power into sideband n.
Bessel functions come from ``scipy.special.jv``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize, special


@dataclass(frozen=True)
class EomConfig:
    mod_freq: float = 100e9
    max_order: int = 20

    def __post_init__(self) -> None:
        if not self.mod_freq > 0:
            raise ValueError("mod_freq must be positive")
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")


class ComparisonRow(NamedTuple):
    shift_hz: float
    order: int
    eom_eff: float
    fwmbs_ce: float
    reachable: bool


def sideband_efficiency(n: int, phi0):
    """Power fraction J_n(phi0)**2 in sideband ``n``."""
    phi0 = np.asarray(phi0, dtype=float)
    if np.any(phi0 < 0):
        raise ValueError("phi0 must be non-negative")
    out = special.jv(n, phi0) ** 2
    return float(out) if out.ndim == 0 else out


def max_sideband_efficiency(n: int, scan_points: int = 2001) -> tuple[float, float]:
    """Best modulation depth for sideband ``n`` and the efficiency there.

    The first maximum of J_n**2 sits just above phi0 = n, so the search runs
    over (0, n + 10]: a coarse scan picks the best bracket and a bounded
    golden-section-type search refines it to 1e-8 in phi0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    grid = np.linspace(0.0, n + 10.0, scan_points)[1:]
    vals = special.jv(n, grid) ** 2
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(lambda x: -special.jv(n, x) ** 2, bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-10})
    return float(res.x), float(-res.fun)


def eom_vs_fwmbs(cfg: EomConfig, window: Sequence) -> list[ComparisonRow]:
    """Best EOM sideband efficiency next to the blue-idler CE for each shift.

    ``window`` holds ``fwmbs.WindowPoint``-like records (``shift_hz``,
    ``ce_blue``). Shifts more than half a modulation frequency from the
    nearest sideband, or beyond ``max_order``, are flagged unreachable and
    get zero EOM efficiency.
    """
    if len(window) == 0:
        raise ValueError("translation window is empty")
    rows = []
    for pt in window:
        shift = float(pt.shift_hz)
        n = int(round(abs(shift) / cfg.mod_freq))
        reachable = abs(abs(shift) - n * cfg.mod_freq) <= 0.5 * cfg.mod_freq and n <= cfg.max_order
        if not reachable:
            eff = 0.0
        elif n == 0:
            eff = 1.0
        else:
            eff = max_sideband_efficiency(n)[1]
        rows.append(ComparisonRow(shift, n, eff, float(pt.ce_blue), bool(reachable)))
    return rows


def bessel_power_sum(phi0: float, n_max: int | None = None) -> float:
    """Sum of J_n(phi0)**2 over |n| <= n_max (default 4*ceil(phi0) + 20)."""
    n_max = 4 * math.ceil(phi0) + 20 if n_max is None else n_max
    n = np.arange(1, n_max + 1)
    return float(special.jv(0, phi0) ** 2 + 2.0 * np.sum(special.jv(n, phi0) ** 2))
