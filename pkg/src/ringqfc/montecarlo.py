"""Event-level simulation of coincidence counting.

Two simulators serve as brute-force checks of the closed forms in
``pairsource``:

* ``monte_carlo_coincidences``: Poisson pair emission, per-arm thinning,
  exponential cavity escape of each photon, Poisson dark counts, and a
  start-stop histogram of idler-minus-signal delays.
* ``monte_carlo_self_correlation``: one arm alone, split 50/50 onto two
  detectors. A single arm of a pair source is chaotic light, so detections
  are drawn from a Cox process driven by a complex Ornstein-Uhlenbeck field
  whose intensity correlation decays at ``decay_rate``.

``seed`` is anything ``numpy.random.SeedSequence`` accepts (an int or a
list of ints). Shards use ``SeedSequence(seed).spawn(shards)`` and cover
consecutive, equal slices of ``duration``; their histograms are summed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import StatisticsWarning
from .pairsource import PairSourceModel

#: exp(-gamma|t|) decay for a 640 MHz wide source, gamma = 2*pi*FWHM
DEFAULT_DECAY_RATE = 2.0 * math.pi * 640e6
MIN_COINCIDENCES = 1e4


@dataclass(frozen=True)
class McResult:
    """Histogram and estimators from a coincidence simulation.

    ``cp_hat`` and ``ca_hat`` are per-bin coincidence probabilities per unit
    time times the bin width, i.e. directly comparable with
    ``pairsource.coincidence_rates``. ``car_hat`` is accidental-subtracted
    (true over accidental); ``peak_ratio`` is the raw peak-bin count over the
    accidental level, the quantity an experiment without subtraction reports.
    """

    taus: np.ndarray
    counts: np.ndarray
    duration: float
    bin_width: float
    n_peak: int
    accidental_mean: float
    n_accidental_bins: int

    @property
    def ca_hat(self) -> float:
        return self.accidental_mean / self.duration * self.bin_width

    @property
    def cp_hat(self) -> float:
        return (self.n_peak - self.accidental_mean) / self.duration * self.bin_width

    @property
    def car_hat(self) -> float:
        return (self.n_peak - self.accidental_mean) / self.accidental_mean

    @property
    def peak_ratio(self) -> float:
        return self.n_peak / self.accidental_mean

    def _var_ratio(self) -> float:
        a, n, m = self.accidental_mean, self.n_peak, self.n_accidental_bins
        return n / a**2 + n**2 / a**3 / m

    @property
    def car_sigma(self) -> float:
        """Delta-method standard error of ``car_hat`` (and of ``peak_ratio``)."""
        return math.sqrt(self._var_ratio())

    @property
    def ca_sigma(self) -> float:
        return math.sqrt(self.accidental_mean / self.n_accidental_bins) / self.duration * self.bin_width

    @property
    def cp_sigma(self) -> float:
        var = self.n_peak + self.accidental_mean / self.n_accidental_bins
        return math.sqrt(var) / self.duration * self.bin_width


def _delay_histogram(t_start: np.ndarray, t_stop: np.ndarray, bin_width: float, half_bins: int) -> np.ndarray:
    """Counts of (stop - start) delays in bins centred on k*bin_width, |k| <= half_bins."""
    t_start = np.sort(t_start)
    t_stop = np.sort(t_stop)
    reach = (half_bins + 0.5) * bin_width
    counts = np.zeros(2 * half_bins + 1, dtype=np.int64)
    # chunk the start events to bound memory of the pair expansion
    for lo_i in range(0, len(t_start), 200_000):
        s = t_start[lo_i:lo_i + 200_000]
        lo = np.searchsorted(t_stop, s - reach, side="left")
        hi = np.searchsorted(t_stop, s + reach, side="left")
        n = hi - lo
        if n.sum() == 0:
            continue
        owner = np.repeat(np.arange(len(s)), n)
        offs = np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n)
        d = t_stop[lo[owner] + offs] - s[owner]
        k = np.floor(d / bin_width + 0.5).astype(np.int64) + half_bins
        k = k[(k >= 0) & (k <= 2 * half_bins)]
        counts += np.bincount(k, minlength=2 * half_bins + 1)
    return counts


def _summarize(counts: np.ndarray, duration: float, bin_width: float, half_bins: int,
               min_lag_bins: int) -> McResult:
    ks = np.arange(-half_bins, half_bins + 1)
    acc = counts[np.abs(ks) >= min_lag_bins]
    return McResult(ks * bin_width, counts, duration, bin_width, int(counts[half_bins]),
                    float(acc.mean()), int(acc.size))


def _lag_layout(bin_width: float, decay_rate: float, accidental_bins: int) -> tuple[int, int]:
    # correlations below e^-30 of the peak are ignored
    min_lag = int(math.ceil(30.0 / (decay_rate * bin_width))) + 1
    return min_lag + accidental_bins, min_lag


def monte_carlo_coincidences(model: PairSourceModel, gamma_e: float, duration: float, seed,
                             decay_rate: float = DEFAULT_DECAY_RATE, shards: int = 1,
                             accidental_bins: int = 200) -> McResult:
    """Simulate a pair source with dark counts and histogram the arrival delays.

    Each photon escapes the cavity after an exponential delay with rate
    ``decay_rate``, so the signal-idler delay is Laplace distributed,
    proportional to exp(-decay_rate*|t|). Bins are ``model.tau_b`` wide and
    centred on zero delay.
    """
    expected = gamma_e * model.eta_s * model.eta_i * duration
    if expected < MIN_COINCIDENCES:
        warnings.warn(f"only {expected:.0f} true coincidences expected (< {MIN_COINCIDENCES:.0f})",
                      StatisticsWarning, stacklevel=2)
    half_bins, min_lag = _lag_layout(model.tau_b, decay_rate, accidental_bins)
    counts = np.zeros(2 * half_bins + 1, dtype=np.int64)
    span = duration / shards
    for child in np.random.SeedSequence(seed).spawn(shards):
        rng = np.random.default_rng(child)
        n = rng.poisson(gamma_e * span)
        t0 = rng.uniform(0.0, span, n)
        sig = t0 + rng.exponential(1.0 / decay_rate, n)
        idl = t0 + rng.exponential(1.0 / decay_rate, n)
        sig = sig[rng.random(n) < model.eta_s]
        idl = idl[rng.random(n) < model.eta_i]
        sig = np.concatenate([sig, rng.uniform(0.0, span, rng.poisson(model.dk_s * span))])
        idl = np.concatenate([idl, rng.uniform(0.0, span, rng.poisson(model.dk_i * span))])
        counts += _delay_histogram(sig, idl, model.tau_b, half_bins)
    return _summarize(counts, duration, model.tau_b, half_bins, min_lag)


def monte_carlo_self_correlation(rate: float, duration: float, seed, bin_width: float,
                                 decay_rate: float = DEFAULT_DECAY_RATE, dt: float | None = None,
                                 accidental_bins: int = 200, chunk: int = 1 << 21) -> McResult:
    """Hanbury Brown-Twiss histogram of one chaotic arm split onto two detectors.

    ``rate`` is the mean count rate at each detector. The field is sampled
    every ``dt`` (default bin_width/4), which must resolve the coherence time.
    """
    dt = bin_width / 4.0 if dt is None else dt
    if decay_rate * dt > 0.1:
        raise ValueError("time step too coarse for the coherence time")
    expected = 2.0 * rate**2 * bin_width * duration
    if expected < MIN_COINCIDENCES:
        warnings.warn(f"only {expected:.0f} peak coincidences expected", StatisticsWarning, stacklevel=2)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    rho = math.exp(-0.5 * decay_rate * dt)
    kick = math.sqrt(1.0 - rho**2)
    mean_counts = rate * dt
    n_total = int(round(duration / dt))
    z = (rng.normal() + 1j * rng.normal()) / math.sqrt(2.0)
    zi = np.array([rho * z])
    a_idx, b_idx = [], []
    for start in range(0, n_total, chunk):
        m = min(chunk, n_total - start)
        xi = (rng.normal(size=m) + 1j * rng.normal(size=m)) / math.sqrt(2.0)
        field, zi = signal.lfilter([kick], [1.0, -rho], xi, zi=zi)
        intensity = np.abs(field) ** 2
        for store in (a_idx, b_idx):
            n = rng.poisson(mean_counts * intensity)
            hit = np.nonzero(n)[0]
            store.append(np.repeat(hit, n[hit]) + start)
    # intensity is constant within a sample, so arrivals are uniform inside it;
    # this also keeps lattice-aligned delays off the bin edges
    t_a = (np.concatenate(a_idx) + rng.random(sum(map(len, a_idx)))) * dt
    t_b = (np.concatenate(b_idx) + rng.random(sum(map(len, b_idx)))) * dt
    half_bins, min_lag = _lag_layout(bin_width, decay_rate, accidental_bins)
    counts = _delay_histogram(t_a, t_b, bin_width, half_bins)
    return _summarize(counts, n_total * dt, bin_width, half_bins, min_lag)
