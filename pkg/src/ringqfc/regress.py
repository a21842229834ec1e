"""Regression manifest: shipped scenario configs checked against acceptance bounds."""

from __future__ import annotations

import tempfile
from dataclasses import replace
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .config import parse_config
from .scenarios import Table, run_scenario


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


def scenario_dir() -> Path:
    return Path(str(resources.files("ringqfc") / "data" / "scenarios"))


def shipped_config_text(scenario: str) -> str:
    return (scenario_dir() / f"{scenario}.conf").read_text(encoding="utf-8")


def _within(x: float, target: float, tol: float) -> bool:
    return abs(x - target) <= tol


def _unimodal(values) -> bool:
    d = np.sign(np.diff(np.asarray(values, dtype=float)))
    d = d[d != 0]
    return d.size > 0 and int(np.sum(d[1:] != d[:-1])) <= 1 and d[0] > 0 and d[-1] < 0


def _checks(tables: dict[str, Table], rerun) -> list[Check]:
    out = []
    r = tables["fwmbs-cw-sweep"].results
    ok = _within(r["ce_blue_at_0"], 0.38, 0.01) and _within(r["ce_red_at_0"], 0.38, 0.01) \
        and r["t_signal_at_0"] <= 0.05
    out.append(Check("1 symmetric cw conversion", ok,
                     f"ce = {r['ce_blue_at_0']:.4f}/{r['ce_red_at_0']:.4f}, t = {r['t_signal_at_0']:.4f}"))

    r = tables["fwmbs-bandwidth"].results
    ok = _within(r["ce_blue_at_640mhz"], 0.30, 0.02) and _within(r["t_signal_at_640mhz"], 0.16, 0.03) \
        and 1e9 < r["crossover_fwhm_hz"] < 2e9
    out.append(Check("2 bandwidth degradation", ok,
                     f"ce(0.64 GHz) = {r['ce_blue_at_640mhz']:.4f}, t = {r['t_signal_at_640mhz']:.4f}, "
                     f"crossover = {r['crossover_fwhm_hz'] / 1e9:.3f} GHz"))

    r = tables["fwmbs-asymmetric"].results
    best = max(r["max_ce_blue"], r["max_ce_red"])
    out.append(Check("3 asymmetric idlers", _within(best, 0.46, 0.02), f"max single-idler ce = {best:.4f}"))

    w = tables["fwmbs-window"].results["window_width_hz"]
    out.append(Check("4 translation window", w >= 5e12, f"width = {w / 1e12:.3f} THz"))

    r = tables["pump2-detuning"].results
    out.append(Check("pump-2 detuning plateau", r["plateau_variation"] < 0.20,
                     f"peak ce {r['peak_ce']:.4f}, variation over +-1 half-width {r['plateau_variation']:.3f}"))

    t = tables["pairs-car"]
    r = t.results
    if "mc_max_z" in r:
        out.append(Check("6 CAR closed form vs Monte Carlo", r["mc_max_z"] <= 3.0,
                         f"max |z| = {r['mc_max_z']:.2f}"))
    car_col = [row[1] for row in t.rows]
    ok = _unimodal(car_col) and _within(r["car_at_ref"], 10.0, 1e-6) and _within(r["snr_at_ref"], 2.5, 1e-9)
    out.append(Check("7 CAR rise-then-fall", ok,
                     f"peak {r['peak_car']:.2f} at {r['peak_power_mw']:.3f} mW, CAR(4 mW) = {r['car_at_ref']:.4f}"))

    r = tables["noise-budget"].results
    sup = rerun("noise-budget", {"budget.raman_suppression": 10.0}).results
    ok = 0.95 < r["min_degradation"] and r["max_degradation"] < 1.25 and sup["degradation_at_min_power"] < 0.95
    out.append(Check("8 CAR degradation", ok,
                     f"default range [{r['min_degradation']:.4f}, {r['max_degradation']:.4f}], "
                     f"10x Raman suppression at lowest power {sup['degradation_at_min_power']:.4f}"))

    r = tables["pairs-decompose"].results
    out.append(Check("Raman share at 4 mW", _within(r["raman_fraction_at_ref"], 0.29, 0.01),
                     f"{r['raman_fraction_at_ref']:.4f}"))

    v = tables["hom-visibility"].results["visibility_post_at_0"]
    out.append(Check("9 post-detector visibility", v > 0.90, f"V(0) = {v:.4f}"))

    r = tables["hom-beat"].results
    last = max(k for k in r if k.startswith("tau0_over_floor_"))
    out.append(Check("10 beat dip misses the floor at large detuning", r[last] > 1.5,
                     f"tau=0 counts / floor = {r[last]:.3f} (largest delta f)"))

    t = tables["eom-compare"]
    j1 = t.results["max_j1_squared"]
    row572 = min(t.rows, key=lambda row: abs(row[0] - 572e9))
    ok = _within(j1, 0.3386, 0.0005) and row572[1] < row572[2]
    out.append(Check("11 EOM comparison", ok,
                     f"max J1^2 = {j1:.5f}; at {row572[0] / 1e9:.0f} GHz eom {row572[1]:.4f} < fwm-bs {row572[2]:.4f}"))

    r = tables["disp-fit"].results
    errs = [r["d1_rel_err"], r["d2_rel_err"], r["ql_rel_err"], r["qc_rel_err"]]
    ok = max(errs) < 1e-6 and r["rejected"] == "-13"
    out.append(Check("12 inverse-problem round trips", ok,
                     f"max rel err {max(errs):.2e}, rejected modes: {r['rejected']}"))
    return out


def regression_manifest(workdir: str | None = None, defaults_text: str | None = None) -> list[Check]:
    """Run every shipped scenario and check its scalar results."""
    scenarios = sorted(p.stem for p in scenario_dir().glob("*.conf"))
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(workdir or tmp)
        configs = {s: parse_config(shipped_config_text(s), defaults_text) for s in scenarios}

        def rerun(name, overrides):
            cfg = configs[name]
            cfg = replace(cfg, params={**cfg.params, **overrides})
            return run_scenario(cfg, str(root / f"{name}-variant.csv"))

        tables = {s: run_scenario(cfg, str(root / f"{s}.csv")) for s, cfg in configs.items()}
        return _checks(tables, rerun)


def format_report(checks: list[Check]) -> str:
    return "\n".join(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}" for c in checks)


def all_passed(checks: list[Check]) -> bool:
    return all(c.passed for c in checks)
