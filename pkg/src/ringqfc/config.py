"""Flat ``key = value`` scenario configuration.

One assignment per line, ``#`` starts a comment, keys are case sensitive
and may be dotted (``signal.linewidth_hz``). Lines starting with ``##`` are
metadata and ignored, so a CSV header written by ``scenarios`` parses back
to the configuration that produced it.

All frequencies are stored in Hz and times in s. For convenience a key with
a ``_khz``/``_mhz``/``_ghz``/``_thz`` (or ``_ps``/``_ns``/``_us``) suffix is
accepted in place of the ``_hz`` (``_s``) key and scaled accordingly.

The defaults file (``data/defaults.conf``, or ``$RINGQFC_DEFAULTS``) is the
single source of default values; ``KEYS`` only records value types.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError

SCENARIOS = (
    "disp-fit", "fwmbs-cw-sweep", "fwmbs-bandwidth", "fwmbs-asymmetric", "fwmbs-window",
    "pump2-detuning", "pairs-decompose", "pairs-car", "noise-budget", "hom-visibility",
    "hom-beat", "eom-compare",
)

SHAPES = ("lorentzian", "gaussian", "delta")

# value types: float, int, str, bool, floats (comma list), or a tuple of allowed strings
_RESONATOR = {
    "fsr_hz": float, "signal.freq_hz": float, "signal.linewidth_hz": float, "signal.ql_over_qc": float,
}
_PUMPS = {
    "pump.freq_hz": float, "pump.linewidth_hz": float, "pump.ql_over_qc": float,
    "pump.p1_power_w": float, "pump.p2_power_w": float, "pump.gamma_s": float, "pump.gamma_p": float,
    "ring_radius_m": float,
}
_DISP = {"disp.signal_d2_hz": float, "disp.signal_d3_hz": float,
         "disp.pump_d2_hz": float, "disp.pump_d3_hz": float}
_SPECTRUM = {"spectrum.fwhm_hz": float, "spectrum.shape": SHAPES}
_REDUCED = {"fwmbs.omega1_over_alpha": float, "fwmbs.omega2_over_alpha": float}
_SOURCE = {
    "source.pair_rate_ref": float, "source.power_ref_mw": float, "source.snr_ref": float,
    "source.car_ref": float, "source.car_peak_power_mw": float,
    "source.eta_s": float, "source.eta_i": float,
}
_WINDOW = {"window.mu_max": int, "window.threshold": float}

REQUIRED: dict[str, dict] = {
    "disp-fit": {**_RESONATOR, "disp.signal_d2_hz": float, "disp.signal_d3_hz": float,
                 "fit.modes_path": str, "fit.scan_path": str, "fit.mu_min": int, "fit.mu_max": int,
                 "fit.crossing_mu": int, "fit.crossing_shift_hz": float,
                 "fit.reject_threshold": float, "fit.scan_span_hz": float, "fit.scan_points": int},
    "fwmbs-cw-sweep": {**_RESONATOR, **_PUMPS, **_REDUCED,
                       "sweep.detuning_span_hz": float, "sweep.points": int},
    "fwmbs-bandwidth": {**_RESONATOR, **_PUMPS, **_REDUCED, "spectrum.shape": SHAPES,
                        "bandwidth.fwhm_min_hz": float, "bandwidth.fwhm_max_hz": float,
                        "bandwidth.points": int},
    "fwmbs-asymmetric": {**_RESONATOR, **_PUMPS, **_REDUCED, **_SPECTRUM,
                         "sweep.detuning_span_hz": float, "sweep.points": int},
    "fwmbs-window": {**_RESONATOR, **_PUMPS, **_DISP, **_SPECTRUM, **_WINDOW},
    "pump2-detuning": {**_RESONATOR, **_PUMPS, **_DISP, **_SPECTRUM,
                       "pump2.mu": int, "pump2.half_linewidth_hz": float,
                       "pump2.max_halfwidths": float, "pump2.points": int},
    "pairs-decompose": {**_SOURCE, "pairs.counts_path": str, "pairs.powers_mw": "floats"},
    "pairs-car": {**_SOURCE, "car.p_min_mw": float, "car.p_max_mw": float, "car.points": int,
                  "monte_carlo": bool, "mc.powers_mw": "floats", "mc.duration_s": float,
                  "mc.source_fwhm_hz": float, "mc.shards": int},
    "noise-budget": {**_SOURCE, "budget.converter_noise_w": float, "budget.wavelength_m": float,
                     "budget.signal_fraction": float, "budget.noise_fraction": float,
                     "budget.raman_suppression": float, "budget.p_min_mw": float,
                     "budget.p_max_mw": float, "budget.points": int},
    "hom-visibility": {"hom.source_fwhm_hz": float, "hom.jitter_fwhm_s": float, "hom.bin_width_s": float,
                       "hom.orthogonal_car": float, "hom.delay_max_s": float, "hom.points": int,
                       "hom.oversample": int},
    "hom-beat": {"hom.source_fwhm_hz": float, "hom.jitter_fwhm_s": float, "hom.bin_width_s": float,
                 "hom.orthogonal_car": float, "hom.oversample": int, "delta_f_hz": "floats"},
    "eom-compare": {**_RESONATOR, **_PUMPS, **_DISP, **_SPECTRUM, **_WINDOW,
                    "eom.mod_freq_hz": float, "eom.max_order": int},
}

GLOBAL_KEYS = {"scenario": SCENARIOS, "output": str, "seed": int, "monte_carlo": bool}

KEYS: dict[str, object] = dict(GLOBAL_KEYS)
for _req in REQUIRED.values():
    KEYS.update(_req)

_SUFFIXES = {
    "_khz": ("_hz", 1e3), "_mhz": ("_hz", 1e6), "_ghz": ("_hz", 1e9), "_thz": ("_hz", 1e12),
    "_ps": ("_s", 1e-12), "_ns": ("_s", 1e-9), "_us": ("_s", 1e-6),
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: dict = field(default_factory=dict)
    output_path: str = ""
    seed: int = 0

    def __getitem__(self, key):
        return self.params[key]

    def resolved(self) -> dict:
        """Every setting, including scenario/output/seed, in canonical form."""
        out = {"scenario": self.scenario, "output": self.output_path, "seed": self.seed}
        out.update(self.params)
        return out


def _canonical_key(key: str, lineno: int) -> tuple[str, float]:
    if key in KEYS:
        return key, 1.0
    for suffix, (target, scale) in _SUFFIXES.items():
        if key.endswith(suffix):
            base = key[: -len(suffix)] + target
            if base in KEYS:
                return base, scale
    raise ConfigError(f"unknown key '{key}'", lineno)


def _convert(key: str, raw: str, scale: float, lineno: int):
    kind = KEYS[key]
    try:
        if kind is float:
            return float(raw) * scale
        if kind is int:
            value = int(raw)
            if key == "seed" and value < 0:
                raise ValueError("seed must be non-negative")
            return value
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(f"expected true/false, got '{raw}'")
            return low in ("true", "1", "yes")
        if kind == "floats":
            return tuple(float(v) * scale for v in raw.split(",") if v.strip())
        if isinstance(kind, tuple):
            if raw not in kind:
                raise ValueError(f"expected one of {', '.join(kind)}, got '{raw}'")
            return raw
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for '{key}': {exc}", lineno) from None


def parse_assignments(text: str) -> dict:
    """Parse ``key = value`` lines into canonical keys and typed values."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.lstrip().startswith("##"):
            continue
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got '{body}'", lineno)
        key, raw = (s.strip() for s in body.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        canon, scale = _canonical_key(key, lineno)
        out[canon] = _convert(canon, raw, scale, lineno)
    return out


def defaults_path() -> Path:
    env = os.environ.get("RINGQFC_DEFAULTS")
    if env:
        return Path(env)
    return Path(str(resources.files("ringqfc") / "data" / "defaults.conf"))


def load_defaults_text() -> str:
    path = defaults_path()
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read defaults file {path}: {exc.strerror}") from None


def parse_config(text: str, defaults_text: str | None = None) -> ScenarioConfig:
    """User settings merged over the defaults and validated for the chosen scenario."""
    defaults = parse_assignments(load_defaults_text() if defaults_text is None else defaults_text)
    user = parse_assignments(text)
    if "scenario" not in user:
        raise ConfigError("missing required key 'scenario'")
    merged = {**defaults, **user}
    scenario = merged["scenario"]
    needed = REQUIRED[scenario]
    missing = sorted(k for k in needed if k not in merged)
    if missing:
        raise ConfigError(f"scenario '{scenario}' is missing required keys: {', '.join(missing)}")
    params = {k: merged[k] for k in sorted(needed)}
    return ScenarioConfig(scenario, params, merged.get("output", f"{scenario}.csv"), merged.get("seed", 0))


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    if isinstance(value, tuple):
        return ",".join(format_value(v) for v in value)
    return str(value)


def format_config(cfg: ScenarioConfig) -> str:
    return "".join(f"{k} = {format_value(v)}\n" for k, v in cfg.resolved().items())
