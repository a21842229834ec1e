import math

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

FSR = 572e9
T_R = 1.0 / FSR


@pytest.fixture
def signal_mode():
    from ringqfc.resonator import ModeCoupling
    f = 319.3e12
    return ModeCoupling.from_loaded(2 * math.pi * f, f / 1.9e9, 0.875, T_R)


@pytest.fixture
def default_cfg():
    """Factory: parsed shipped config for a scenario, with optional overrides."""
    from dataclasses import replace

    from ringqfc.config import parse_config
    from ringqfc.regress import shipped_config_text

    def make(scenario, **overrides):
        cfg = parse_config(shipped_config_text(scenario))
        return replace(cfg, params={**cfg.params, **overrides})

    return make


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in mod.TITLES.items():
        ok, detail = mod.RESULTS.get(n, (False, "not evaluated"))
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {n:2d} ({title}): {detail}")
