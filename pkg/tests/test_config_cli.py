import json
import math
from dataclasses import replace

import pytest

from ringqfc import cli
from ringqfc.config import KEYS, REQUIRED, SCENARIOS, format_config, parse_assignments, parse_config
from ringqfc.errors import ConfigError
from ringqfc.regress import shipped_config_text
from ringqfc.scenarios import read_header_config, run_scenario, run_table


def test_parse_basic_and_comments():
    got = parse_assignments("## metadata = ignored\nseed = 3  # comment\n\nsignal.linewidth_ghz = 1.9\n")
    assert got == {"seed": 3, "signal.linewidth_hz": pytest.approx(1.9e9)}


def test_time_suffix_and_lists():
    got = parse_assignments("hom.bin_width_ps = 64\ndelta_f_hz = 0, 1e9 ,2e9\nmonte_carlo = yes")
    assert got["hom.bin_width_s"] == pytest.approx(64e-12)
    assert got["delta_f_hz"] == (0.0, 1e9, 2e9)
    assert got["monte_carlo"] is True


@pytest.mark.parametrize("text, line, fragment", [
    ("bogus = 1", 1, "unknown key"),
    ("seed = 1\nsignal.linewidth_hz = fast", 2, "bad value"),
    ("seed = 1\n\nnot an assignment", 3, "expected"),
    ("spectrum.shape = square", 1, "expected one of"),
    ("seed = -4", 1, "non-negative"),
    ("monte_carlo = maybe", 1, "true/false"),
])
def test_parse_errors_carry_line(text, line, fragment):
    with pytest.raises(ConfigError) as err:
        parse_assignments(text)
    assert err.value.line == line
    assert str(err.value).startswith(f"line {line}: ")
    assert fragment in str(err.value)


def test_missing_scenario_and_keys():
    with pytest.raises(ConfigError, match="scenario"):
        parse_config("seed = 1")
    with pytest.raises(ConfigError) as err:
        parse_config("scenario = hom-beat", defaults_text="hom.bin_width_s = 64e-12")
    msg = str(err.value)
    for key in ("delta_f_hz", "hom.jitter_fwhm_s", "hom.source_fwhm_hz"):
        assert key in msg


def test_missing_defaults_file(monkeypatch, tmp_path):
    monkeypatch.setenv("RINGQFC_DEFAULTS", str(tmp_path / "absent.conf"))
    with pytest.raises(ConfigError, match="defaults"):
        parse_config("scenario = hom-beat")


def test_every_scenario_has_a_shipped_config():
    assert set(SCENARIOS) == set(REQUIRED)
    for name in SCENARIOS:
        cfg = parse_config(shipped_config_text(name))
        assert cfg.scenario == name
        assert set(cfg.params) == set(REQUIRED[name])
        assert all(k in KEYS for k in cfg.params)


def test_user_overrides_defaults():
    cfg = parse_config("scenario = fwmbs-cw-sweep\nsignal.linewidth_ghz = 2.5\nseed = 9")
    assert cfg["signal.linewidth_hz"] == pytest.approx(2.5e9)
    assert cfg.seed == 9


def test_header_round_trip(tmp_path):
    cfg = parse_config(shipped_config_text("fwmbs-cw-sweep") + "sweep.points = 11\n")
    out = tmp_path / "cw.csv"
    run_scenario(cfg, str(out))
    back = parse_config(read_header_config(out.read_text()))
    assert back == replace(cfg, output_path=cfg.output_path)
    assert format_config(back) == format_config(cfg)


def test_identical_runs_identical_bytes(tmp_path):
    text = shipped_config_text("pairs-car") + "mc.duration_s = 0.2\nmc.shards = 2\ncar.points = 5\n"
    cfg = replace(parse_config(text), output_path=str(tmp_path / "car.csv"))
    with pytest.warns(Warning):
        run_scenario(cfg)
    first = (tmp_path / "car.csv").read_bytes()
    with pytest.warns(Warning):
        run_scenario(cfg)
    assert (tmp_path / "car.csv").read_bytes() == first
    other = replace(cfg, seed=cfg.seed + 1)
    with pytest.warns(Warning):
        run_scenario(other)
    assert (tmp_path / "car.csv").read_bytes() != first


def test_cw_sweep_centre_value():
    table = run_table(parse_config(shipped_config_text("fwmbs-cw-sweep")))
    row = min(table.rows, key=lambda r: abs(r[0]))
    assert row[0] == 0.0
    assert row[1] == pytest.approx(0.38, abs=0.01) and row[2] == pytest.approx(0.38, abs=0.01)


def test_hom_visibility_centre_value():
    table = run_table(parse_config(shipped_config_text("hom-visibility")))
    row = [r for r in table.rows if r[0] == 0.0][0]
    assert row[1] == 1.0 and row[2] > 0.9


def test_coupling_perturbation_breaks_cw_bound(default_cfg):
    base = default_cfg("fwmbs-cw-sweep")
    worse = default_cfg("fwmbs-cw-sweep", **{"signal.ql_over_qc": base["signal.ql_over_qc"] * 0.9})
    ce = run_table(worse).results["ce_blue_at_0"]
    assert abs(ce - 0.38) > 0.01


# -- CLI ----------------------------------------------------------------------

def test_cli_run(tmp_path, capsys):
    conf = tmp_path / "c.conf"
    conf.write_text("scenario = eom-compare\nwindow.mu_max = 3\n")
    out = tmp_path / "sub" / "eom.csv"
    assert cli.main(["run", str(conf), "-o", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("## ringqfc ")
    assert "shift_hz,eom_eff,fwmbs_ce,eom_reachable" in text
    assert capsys.readouterr().out.strip() == str(out)


@pytest.mark.parametrize("body, code, kind", [
    ("scenario = eom-compare\nwhat = 1\n", 2, "config"),
    ("scenario = hom-beat\nhom.bin_width_s = -1\n", 1, None),
])
def test_cli_errors_are_json(tmp_path, capsys, body, code, kind):
    conf = tmp_path / "c.conf"
    conf.write_text(body)
    assert cli.main(["run", str(conf), "-o", str(tmp_path / "x.csv")]) == code
    err = capsys.readouterr().err.strip().splitlines()[-1]
    payload = json.loads(err)
    assert payload["status"] == "error" and payload["message"]
    if kind:
        assert payload["kind"] == kind


def test_cli_missing_config_file(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "none.conf")]) == 2
    assert json.loads(capsys.readouterr().err)["status"] == "error"


def test_cli_scenarios_listing(capsys):
    assert cli.main(["scenarios"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [line.split(":")[0] for line in lines] == list(SCENARIOS)


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2
