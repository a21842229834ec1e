import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringqfc.errors import InsufficientDataError, NoResonanceError
from ringqfc.resonator import (
    DispersionModel, ModeCoupling, ModeRecord, TransmissionScan, fit_dispersion, fit_mode,
    linear_transmission, read_modes_csv, read_scan_csv, resonance_frequency, synthetic_scan,
)

TWO_PI = 2 * math.pi
T_R = 1 / 572e9


def comb(disp, mus, crossing=None, shift=0.0):
    out = []
    for m in mus:
        w = float(resonance_frequency(disp, m))
        if m == crossing:
            w += shift
        out.append(ModeRecord(m, w))
    return out


def test_resonance_frequency_taylor_terms():
    d = DispersionModel.from_hz(300e12, 500e9, -20e6, 1e6)
    assert resonance_frequency(d, 0) == d.omega0_ref
    expected = d.omega0_ref + 2 * d.d1 + 0.5 * d.d2 * 4 + d.d3 * 8 / 6
    assert resonance_frequency(d, 2) == pytest.approx(expected, rel=1e-15)
    assert d.t_round_trip == pytest.approx(1 / 500e9, rel=1e-15)


def test_dispersion_model_rejects_nonpositive_fsr():
    with pytest.raises(ValueError):
        DispersionModel(1e15, 0.0)


def test_fit_dispersion_noiseless_recovers_coefficients():
    truth = DispersionModel.from_hz(319.3e12, 572e9, -16.5e6, 0.78e6)
    fit = fit_dispersion(comb(truth, range(-20, 21)))
    m = fit.model
    assert fit.rejected == []
    assert m.omega0_ref == pytest.approx(truth.omega0_ref, rel=1e-12)
    assert m.d1 == pytest.approx(truth.d1, rel=1e-12)
    # omega ~ 2e15 rad/s is stored to ~0.3 rad/s, which limits D2 to ~1e-11 relative
    assert m.d2 == pytest.approx(truth.d2, rel=1e-10)
    assert m.d3 == pytest.approx(truth.d3, rel=1e-6)


def test_fit_dispersion_rejects_avoided_crossing():
    truth = DispersionModel.from_hz(319.3e12, 572e9, -16.5e6, 0.0)
    fit = fit_dispersion(comb(truth, range(-20, 21), crossing=-13, shift=TWO_PI * 400e6))
    assert fit.rejected == [-13]
    assert fit.model.d2 == pytest.approx(truth.d2, rel=1e-6)


@given(d2=st.floats(-50e6, -1e6), d3=st.floats(-2e6, 2e6), crossing=st.integers(-15, 15),
       shift=st.floats(200e6, 2e9))
def test_fit_dispersion_property_single_outlier(d2, d3, crossing, shift):
    if crossing == 0:
        crossing = 7
    truth = DispersionModel.from_hz(319.3e12, 572e9, d2, d3)
    fit = fit_dispersion(comb(truth, range(-16, 17), crossing, TWO_PI * shift))
    assert fit.rejected == [crossing]
    assert fit.model.d1 == pytest.approx(truth.d1, rel=1e-9)
    assert fit.model.d2 == pytest.approx(truth.d2, rel=1e-6)


def test_fit_dispersion_needs_enough_modes():
    truth = DispersionModel.from_hz(319.3e12, 572e9, -16.5e6)
    with pytest.raises(InsufficientDataError):
        fit_dispersion(comb(truth, [-1, 0, 1]))
    with pytest.raises(InsufficientDataError):
        fit_dispersion(comb(truth, [1, 2, 3, 4, 5]))
    with pytest.raises(ValueError):
        fit_dispersion(comb(truth, [0, 1, 1, 2, 3]))


def test_from_loaded_coupling_regimes():
    w = TWO_PI * 200e12
    crit = ModeCoupling.from_loaded(w, 2e5, 0.5, T_R)
    assert crit.qi == pytest.approx(crit.qc, rel=1e-12)
    assert crit.theta == pytest.approx(crit.alpha, rel=1e-12)
    lossless = ModeCoupling.from_loaded(w, 2e5, 1.0, T_R)
    assert math.isinf(lossless.qi)
    assert lossless.theta == pytest.approx(2 * lossless.alpha, rel=1e-12)
    assert crit.linewidth_hz == pytest.approx(200e12 / 2e5, rel=1e-12)


def test_linear_transmission_limits():
    w = TWO_PI * 200e12
    crit = ModeCoupling.from_loaded(w, 2e5, 0.5, T_R)
    assert linear_transmission(crit, 0.0) == pytest.approx(0.0, abs=1e-24)
    lossless = ModeCoupling(w, math.inf, 1e5, T_R)
    d = np.linspace(-1e11, 1e11, 101)
    assert np.allclose(linear_transmission(lossless, d), 1.0, atol=1e-14)
    # half-width detuning of a critically coupled mode gives T = 1/2
    hw = crit.alpha / T_R
    assert linear_transmission(crit, hw) == pytest.approx(0.5, rel=1e-12)


@given(ql=st.floats(1e4, 1e6), r=st.floats(0.05, 0.999), d=st.floats(-1e12, 1e12))
def test_linear_transmission_bounded(ql, r, d):
    mc = ModeCoupling.from_loaded(TWO_PI * 200e12, ql, r, T_R)
    t = linear_transmission(mc, d)
    assert -1e-12 <= t <= 1 + 1e-12


@pytest.mark.parametrize("r", [0.2, 0.5 - 1e-3, 0.875])
def test_fit_mode_round_trip(r, signal_mode):
    mc = ModeCoupling.from_loaded(signal_mode.omega_res, signal_mode.ql, r, T_R)
    fit = fit_mode(synthetic_scan(mc, TWO_PI * 10e9), mc.omega_res, T_R)
    branch = fit.over if r > 0.5 else fit.under
    assert branch.ql == pytest.approx(mc.ql, rel=1e-6)
    assert branch.qc == pytest.approx(mc.qc, rel=1e-6)
    assert branch.qi == pytest.approx(mc.qi, rel=1e-6)
    # the other branch swaps the roles of Qi and Qc
    other = fit.under if r > 0.5 else fit.over
    assert other.qc == pytest.approx(mc.qi, rel=1e-6)


def test_fit_mode_off_centre_guess(signal_mode):
    scan = synthetic_scan(signal_mode, TWO_PI * 10e9)
    shifted = TransmissionScan(scan.detunings + TWO_PI * 0.3e9, scan.transmission)
    fit = fit_mode(shifted, signal_mode.omega_res - TWO_PI * 0.3e9, T_R)
    assert fit.over.omega_res == pytest.approx(signal_mode.omega_res, rel=1e-12)


def test_fit_mode_without_dip():
    scan = TransmissionScan(np.linspace(-1, 1, 11), np.ones(11))
    with pytest.raises(NoResonanceError):
        fit_mode(scan, 1e15)


def test_scan_validation():
    with pytest.raises(ValueError):
        TransmissionScan(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        TransmissionScan(np.array([0.0, 2.0, 1.0]), np.ones(3))


def test_csv_readers(tmp_path):
    modes = tmp_path / "modes.csv"
    modes.write_text("# measured\nmu,omega_hz\n0,1.0e14\n1,1.005e14\n")
    recs = read_modes_csv(modes)
    assert [r.mu for r in recs] == [0, 1]
    assert recs[1].omega == pytest.approx(TWO_PI * 1.005e14)
    scan = tmp_path / "scan.csv"
    scan.write_text("detuning_hz,transmission\n-1e9,0.9\n0,0.1\n1e9,0.9\n")
    s = read_scan_csv(scan)
    assert s.detunings[0] == pytest.approx(-TWO_PI * 1e9)
    assert list(s.transmission) == [0.9, 0.1, 0.9]
