"""Figure-level experiments driven by a ``ScenarioConfig``.

Every runner returns a ``Table``: column names, rows, and a few named scalar
results used by the regression manifest. ``write_csv`` prefixes the rows with
the package version, the scalar results (``##`` lines) and the resolved
configuration (``#`` lines, re-parseable by ``config.parse_assignments``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import eom, fwmbs, hom, montecarlo, pairsource, resonator
from .config import ScenarioConfig, format_config, format_value
from .errors import RingQfcError

TWO_PI = 2.0 * math.pi


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    results: dict = field(default_factory=dict)


# -- shared builders ----------------------------------------------------------

def symmetric_grid(half_span: float, n: int) -> np.ndarray:
    """``n`` points on [-half_span, half_span]; odd ``n`` contains 0 exactly."""
    if n < 2:
        return np.zeros(1)
    k = np.arange(n) - (n - 1) / 2.0
    return half_span * k / ((n - 1) / 2.0)


def signal_mode(cfg: ScenarioConfig) -> resonator.ModeCoupling:
    f = cfg["signal.freq_hz"]
    return resonator.ModeCoupling.from_loaded(TWO_PI * f, f / cfg["signal.linewidth_hz"],
                                              cfg["signal.ql_over_qc"], 1.0 / cfg["fsr_hz"])


def pump_mode(cfg: ScenarioConfig) -> resonator.ModeCoupling:
    f = cfg["pump.freq_hz"]
    return resonator.ModeCoupling.from_loaded(TWO_PI * f, f / cfg["pump.linewidth_hz"],
                                              cfg["pump.ql_over_qc"], 1.0 / cfg["fsr_hz"])


def pump_config(cfg: ScenarioConfig) -> fwmbs.PumpConfig:
    return fwmbs.PumpConfig(cfg["pump.p1_power_w"], cfg["pump.p2_power_w"], 0.0, 0.0, 0.0,
                            cfg["pump.gamma_p"], cfg["pump.gamma_s"],
                            TWO_PI * cfg["ring_radius_m"], pump_mode(cfg))


def signal_dispersion(cfg: ScenarioConfig) -> resonator.DispersionModel:
    return resonator.DispersionModel.from_hz(cfg["signal.freq_hz"], cfg["fsr_hz"],
                                             cfg["disp.signal_d2_hz"], cfg["disp.signal_d3_hz"])


def pump_dispersion(cfg: ScenarioConfig) -> resonator.DispersionModel:
    return resonator.DispersionModel.from_hz(cfg["pump.freq_hz"], cfg["fsr_hz"],
                                             cfg["disp.pump_d2_hz"], cfg["disp.pump_d3_hz"])


def reduced_params(cfg: ScenarioConfig) -> fwmbs.FwmBsParams:
    mc = signal_mode(cfg)
    return fwmbs.FwmBsParams.from_mode(mc, fwmbs.omega0_from_pumps(pump_config(cfg)),
                                       cfg["fwmbs.omega1_over_alpha"] * mc.alpha,
                                       cfg["fwmbs.omega2_over_alpha"] * mc.alpha)


def spectrum(cfg: ScenarioConfig) -> fwmbs.SignalSpectrum:
    shape = fwmbs.Shape(cfg["spectrum.shape"])
    return fwmbs.SignalSpectrum(0.0 if shape is fwmbs.Shape.DELTA else cfg["spectrum.fwhm_hz"], shape)


def source_model(cfg: ScenarioConfig) -> pairsource.PairSourceModel:
    p_ref = cfg["source.power_ref_mw"]
    return pairsource.calibrate_source(cfg["source.pair_rate_ref"], p_ref, cfg["source.snr_ref"],
                                       cfg["source.car_ref"], cfg["source.car_peak_power_mw"],
                                       cfg["source.eta_s"], cfg["source.eta_i"])


def _conv_row(x, r: fwmbs.ConversionResult) -> list:
    return [x, r.ce_blue, r.ce_red, r.t_signal]


# -- converter ----------------------------------------------------------------

def run_cw_sweep(cfg: ScenarioConfig) -> Table:
    p = reduced_params(cfg)
    hz = symmetric_grid(cfg["sweep.detuning_span_hz"], cfg["sweep.points"])
    sweep = fwmbs.detuning_sweep(p, TWO_PI * hz)
    t = Table(["detuning_hz", "ce_blue", "ce_red", "t_signal"],
              [_conv_row(f, r) for f, (_, r) in zip(hz, sweep)])
    at0 = fwmbs.cw_response(p, 0.0)
    t.results.update(omega0_over_alpha=p.omega0_cpl / p.alpha, ce_blue_at_0=at0.ce_blue,
                     ce_red_at_0=at0.ce_red, t_signal_at_0=at0.t_signal,
                     max_ce_blue=max(r.ce_blue for _, r in sweep))
    return t


def run_asymmetric(cfg: ScenarioConfig) -> Table:
    t = run_cw_sweep(cfg)
    p = reduced_params(cfg)
    pulsed = fwmbs.pulsed_response(p, spectrum(cfg))
    t.results.update(max_ce_red=max(r[2] for r in t.rows), pulsed_ce_blue=pulsed.ce_blue,
                     pulsed_ce_red=pulsed.ce_red, pulsed_t_signal=pulsed.t_signal)
    return t


def run_bandwidth(cfg: ScenarioConfig) -> Table:
    p = reduced_params(cfg)
    shape = fwmbs.Shape(cfg["spectrum.shape"])
    fwhms = np.geomspace(cfg["bandwidth.fwhm_min_hz"], cfg["bandwidth.fwhm_max_hz"], cfg["bandwidth.points"])
    sweep = fwmbs.bandwidth_sweep(p, fwhms, shape)
    t = Table(["fwhm_hz", "ce_blue", "ce_red", "t_signal"], [_conv_row(f, r) for f, r in sweep])
    marked = fwmbs.pulsed_response(p, fwmbs.SignalSpectrum(0.64e9, shape))
    t.results.update(ce_blue_at_640mhz=marked.ce_blue, t_signal_at_640mhz=marked.t_signal,
                     crossover_fwhm_hz=crossover_fwhm(p, shape))
    return t


def crossover_fwhm(p: fwmbs.FwmBsParams, shape=fwmbs.Shape.LORENTZIAN,
                   lo: float = 1e8, hi: float = 1e10) -> float:
    """Input bandwidth at which signal transmission overtakes the stronger idler."""
    from scipy import optimize

    def gap(log_f):
        r = fwmbs.pulsed_response(p, fwmbs.SignalSpectrum(math.exp(log_f), shape))
        return r.t_signal - max(r.ce_blue, r.ce_red)

    if gap(math.log(lo)) > 0 or gap(math.log(hi)) < 0:
        return math.nan
    return math.exp(optimize.brentq(gap, math.log(lo), math.log(hi), xtol=1e-6))


def window_points(cfg: ScenarioConfig) -> list:
    mus = list(range(1, cfg["window.mu_max"] + 1))
    return fwmbs.translation_window(pump_config(cfg), signal_dispersion(cfg), mus, spectrum(cfg),
                                    pump_dispersion(cfg), signal_mode(cfg))


def run_window(cfg: ScenarioConfig) -> Table:
    pts = window_points(cfg)
    t = Table(["shift_hz", "ce_blue", "ce_red"], [[p.shift_hz, p.ce_blue, p.ce_red] for p in pts])
    t.results["window_width_hz"] = fwmbs.window_width(pts, cfg["window.threshold"])
    return t


def run_pump2(cfg: ScenarioConfig) -> Table:
    pc = pump_config(cfg)
    disp = signal_dispersion(cfg)
    mu = cfg["pump2.mu"]
    pc = pc.with_(pump_separation=fwmbs.matched_separation(pc, disp, mu))
    half = cfg["pump2.half_linewidth_hz"]
    x = symmetric_grid(cfg["pump2.max_halfwidths"], cfg["pump2.points"])
    sweep = fwmbs.pump2_detuning_sweep(pc, TWO_PI * half * x, spectrum(cfg), signal_mode(cfg), disp, mu)
    t = Table(["detuning2_over_halfwidth", "ce_blue", "ce_red", "t_signal"],
              [_conv_row(xi, r) for xi, (_, r) in zip(x, sweep)])
    peak = np.array([max(r.ce_blue, r.ce_red) for _, r in sweep])
    inner = np.abs(x) <= 1.0 + 1e-12
    t.results.update(peak_ce=float(peak.max()),
                     plateau_variation=float((peak[inner].max() - peak[inner].min()) / peak[inner].max()))
    return t


# -- resonator ----------------------------------------------------------------

def run_disp_fit(cfg: ScenarioConfig) -> Table:
    truth = signal_dispersion(cfg)
    if cfg["fit.modes_path"]:
        modes = resonator.read_modes_csv(cfg["fit.modes_path"])
    else:
        mus = range(cfg["fit.mu_min"], cfg["fit.mu_max"] + 1)
        modes = [resonator.ModeRecord(m, float(resonator.resonance_frequency(truth, m))) for m in mus]
        modes = [resonator.ModeRecord(m.mu, m.omega + (TWO_PI * cfg["fit.crossing_shift_hz"]
                                                       if m.mu == cfg["fit.crossing_mu"] else 0.0))
                 for m in modes]
    fit = resonator.fit_dispersion(modes, cfg["fit.reject_threshold"])
    model = fit.model
    t = Table(["mu", "freq_hz", "deviation_hz", "residual_hz", "rejected"])
    for m, r in zip(modes, fit.residuals):
        grid = model.omega0_ref + model.d1 * m.mu
        t.rows.append([m.mu, m.omega / TWO_PI, (m.omega - grid) / TWO_PI, r / TWO_PI, int(m.mu in fit.rejected)])
    t.results.update(f0_hz=model.omega0_ref / TWO_PI, fsr_hz=model.d1 / TWO_PI, d2_hz=model.d2 / TWO_PI,
                     d3_hz=model.d3 / TWO_PI, rejected=" ".join(map(str, fit.rejected)) or "none")
    if not cfg["fit.modes_path"]:
        t.results.update(d1_rel_err=abs(model.d1 / truth.d1 - 1), d2_rel_err=abs(model.d2 / truth.d2 - 1))

    mc = signal_mode(cfg)
    if cfg["fit.scan_path"]:
        scan = resonator.read_scan_csv(cfg["fit.scan_path"])
    else:
        scan = resonator.synthetic_scan(mc, TWO_PI * cfg["fit.scan_span_hz"], cfg["fit.scan_points"])
    mf = resonator.fit_mode(scan, mc.omega_res, mc.t_round_trip)
    t.results.update(ql=mf.over.ql, qc_over=mf.over.qc, qi_over=mf.over.qi,
                     qc_under=mf.under.qc, qi_under=mf.under.qi)
    if not cfg["fit.scan_path"]:
        t.results.update(ql_rel_err=abs(mf.over.ql / mc.ql - 1), qc_rel_err=abs(mf.over.qc / mc.qc - 1))
    return t


# -- pair source --------------------------------------------------------------

def _read_counts(path) -> tuple[np.ndarray, np.ndarray]:
    import csv
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    return (np.array([float(r["power_mw"]) for r in rows]),
            np.array([float(r["counts_per_s"]) for r in rows]))


def run_decompose(cfg: ScenarioConfig) -> Table:
    model = source_model(cfg)
    if cfg["pairs.counts_path"]:
        p, c = _read_counts(cfg["pairs.counts_path"])
    else:
        p = np.array(cfg["pairs.powers_mw"])
        c = model.eta_s * (model.raman_coeff * p + model.pair_coeff * p**2)
    dec = pairsource.decompose_counts(p, c)
    t = Table(["power_mw", "counts_per_s", "linear_part", "quadratic_part", "raman_fraction"])
    for pi, ci in zip(p, c):
        t.rows.append([pi, ci, dec.raman_coeff * pi, dec.pair_coeff * pi**2, pairsource.raman_fraction(dec, pi)])
    t.results.update(raman_coeff=dec.raman_coeff, pair_coeff=dec.pair_coeff, clamped=dec.clamped,
                     raman_fraction_at_ref=pairsource.raman_fraction(dec, cfg["source.power_ref_mw"]))
    return t


def run_car(cfg: ScenarioConfig) -> Table:
    model = source_model(cfg)
    powers = np.geomspace(cfg["car.p_min_mw"], cfg["car.p_max_mw"], cfg["car.points"])
    mc_powers = list(cfg["mc.powers_mw"]) if cfg["monte_carlo"] else []
    grid = np.union1d(powers, mc_powers)
    sim = {}
    for i, p in enumerate(mc_powers):
        sim[p] = simulate_car(model, p, cfg["mc.duration_s"], [cfg.seed, i],
                              TWO_PI * cfg["mc.source_fwhm_hz"], cfg["mc.shards"])
    t = Table(["power_mw", "car_model", "snr_s", "snr_i", "car_mc", "car_mc_sigma"])
    for p in grid:
        r = sim.get(p)
        t.rows.append([p, pairsource.car_at_power(model, p), pairsource.arm_snr(model, p, "s"),
                       pairsource.arm_snr(model, p, "i"),
                       r.car_hat if r else math.nan, r.car_sigma if r else math.nan])
    p_star, c_star = pairsource.car_peak(model, cfg["car.p_min_mw"], cfg["car.p_max_mw"])
    t.results.update(peak_power_mw=p_star, peak_car=c_star, dark_rate=model.dk_s, tau_b_s=model.tau_b,
                     car_at_ref=pairsource.car_at_power(model, cfg["source.power_ref_mw"]),
                     snr_at_ref=pairsource.snr_before(model, cfg["source.power_ref_mw"]))
    if sim:
        z = [abs(r.car_hat - pairsource.car_at_power(model, p)) / r.car_sigma for p, r in sim.items()]
        t.results["mc_max_z"] = max(z)
    return t


def simulate_car(model: pairsource.PairSourceModel, power: float, duration: float, seed,
                 decay_rate: float, shards: int = 1) -> montecarlo.McResult:
    """Monte Carlo at one pump power with Raman folded into the uncorrelated noise."""
    noisy = model.with_(dk_s=model.dk_s + model.eta_s * model.raman_coeff * power,
                        dk_i=model.dk_i + model.eta_i * model.raman_coeff * power)
    return montecarlo.monte_carlo_coincidences(noisy, pairsource.pair_rate(model, power), duration, seed,
                                               decay_rate, shards)


def run_noise_budget(cfg: ScenarioConfig) -> Table:
    model = source_model(cfg)
    model = model.with_(raman_coeff=model.raman_coeff / cfg["budget.raman_suppression"])
    noise = pairsource.watts_to_photon_rate(cfg["budget.converter_noise_w"], cfg["budget.wavelength_m"])
    budget = pairsource.NoiseBudget(noise, cfg["budget.signal_fraction"], cfg["budget.noise_fraction"])
    powers = np.geomspace(cfg["budget.p_min_mw"], cfg["budget.p_max_mw"], cfg["budget.points"])
    deg = pairsource.degradation_curve(model, budget, powers)
    t = Table(["power_mw", "snr_before", "snr_after", "car_degradation"])
    for p, d in zip(powers, deg):
        t.rows.append([p, pairsource.snr_before(model, p),
                       pairsource.snr_after(budget, pairsource.pair_rate(model, p), model.raman_coeff * p), d])
    t.results.update(converter_noise_per_s=noise, min_degradation=float(deg.min()),
                     max_degradation=float(deg.max()), degradation_at_min_power=float(deg[0]))
    return t


# -- interference and EOM -----------------------------------------------------

def _detector(cfg: ScenarioConfig) -> hom.DetectorModel:
    return hom.DetectorModel(cfg["hom.jitter_fwhm_s"], cfg["hom.bin_width_s"])


def run_hom_visibility(cfg: ScenarioConfig) -> Table:
    gamma = TWO_PI * cfg["hom.source_fwhm_hz"]
    det = _detector(cfg)
    floor = hom.floor_for_car(gamma, det, cfg["hom.orthogonal_car"], cfg["hom.oversample"])
    delays = symmetric_grid(cfg["hom.delay_max_s"], cfg["hom.points"])
    t = Table(["delta_t_s", "visibility_pre", "visibility_post"])
    for d in delays:
        t.rows.append([d, hom.visibility(gamma, d),
                       hom.post_detector_visibility(gamma, d, det, floor, cfg["hom.oversample"])])
    t.results.update(floor=floor, visibility_post_at_0=hom.post_detector_visibility(
        gamma, 0.0, det, floor, cfg["hom.oversample"]))
    return t


def run_hom_beat(cfg: ScenarioConfig) -> Table:
    gamma = TWO_PI * cfg["hom.source_fwhm_hz"]
    det = _detector(cfg)
    floor = hom.floor_for_car(gamma, det, cfg["hom.orthogonal_car"], cfg["hom.oversample"])
    fam = hom.beat_family(gamma, cfg["delta_f_hz"], det, floor, oversample=cfg["hom.oversample"])
    t = Table(["delta_f_hz", "bin_center_ps", "counts"])
    floor_counts = floor * det.bin_width
    for i, (df, prof) in enumerate(fam):
        t.rows.extend([df, tau * 1e12, c] for tau, c in zip(prof.taus, prof.rates))
        t.results[f"tau0_over_floor_{i}"] = prof.at(0.0) / floor_counts
    t.results["floor_counts"] = floor_counts
    return t


def run_eom(cfg: ScenarioConfig) -> Table:
    pts = window_points(cfg)
    ecfg = eom.EomConfig(cfg["eom.mod_freq_hz"], cfg["eom.max_order"])
    rows = eom.eom_vs_fwmbs(ecfg, pts)
    t = Table(["shift_hz", "eom_eff", "fwmbs_ce", "eom_reachable"],
              [[r.shift_hz, r.eom_eff, r.fwmbs_ce, int(r.reachable)] for r in rows])
    t.results["eom_beats_fwmbs_count"] = sum(r.eom_eff > r.fwmbs_ce for r in rows)
    t.results["max_j1_squared"] = eom.max_sideband_efficiency(1)[1]
    return t


RUNNERS = {
    "disp-fit": run_disp_fit,
    "fwmbs-cw-sweep": run_cw_sweep,
    "fwmbs-bandwidth": run_bandwidth,
    "fwmbs-asymmetric": run_asymmetric,
    "fwmbs-window": run_window,
    "pump2-detuning": run_pump2,
    "pairs-decompose": run_decompose,
    "pairs-car": run_car,
    "noise-budget": run_noise_budget,
    "hom-visibility": run_hom_visibility,
    "hom-beat": run_hom_beat,
    "eom-compare": run_eom,
}


# -- output -------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_csv(cfg: ScenarioConfig, table: Table) -> str:
    lines = [f"## ringqfc {__version__}"]
    lines += [f"## result {k} = {format_value(float(v) if isinstance(v, np.floating) else v)}"
              for k, v in table.results.items()]
    lines += [f"# {line}" for line in format_config(cfg).splitlines()]
    lines.append(",".join(table.columns))
    lines += [",".join(_cell(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def run_table(cfg: ScenarioConfig) -> Table:
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        return RUNNERS[cfg.scenario](cfg)


def run_scenario(cfg: ScenarioConfig, output_path: str | None = None) -> Table:
    """Run ``cfg`` and write its CSV to ``output_path`` (default: the configured path)."""
    table = run_table(cfg)
    path = Path(output_path or cfg.output_path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_csv(cfg, table))
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None
    return table


class OutputError(RingQfcError):
    kind = "io"


def read_header_config(csv_text: str) -> str:
    """The ``# key = value`` block of a scenario CSV, as config text."""
    out = []
    for line in csv_text.splitlines():
        if line.startswith("## "):
            continue
        if not line.startswith("#"):
            break
        out.append(line[2:] if line.startswith("# ") else line[1:])
    return "\n".join(out) + "\n"
