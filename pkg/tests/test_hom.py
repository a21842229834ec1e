import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringqfc import hom
from ringqfc.errors import AccuracyError, ConsistencyError, UnsupportedConfigurationError
from ringqfc.hom import (
    CoincidenceProfile, DetectorModel, PhotonWavepacket, apply_detector, coincidence_profile,
    detector_grid, visibility,
)

GAMMA = 2 * math.pi * 640e6
TAUS = np.linspace(-3e-9, 3e-9, 6001)
unit = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
    lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: tuple(np.asarray(v) / np.linalg.norm(v)))


def closed_form_visibility(gamma, dt):
    x = math.exp(-gamma * abs(dt))
    return x / (1 - x + x * x)


def test_profile_special_cases():
    a = PhotonWavepacket(0.0, GAMMA, hom.PARALLEL)
    par = coincidence_profile(a, PhotonWavepacket(0.0, GAMMA, hom.PARALLEL), TAUS)
    assert np.all(par.rates == 0)
    perp = coincidence_profile(a, PhotonWavepacket(0.0, GAMMA, hom.ORTHOGONAL), TAUS)
    assert np.allclose(perp.rates, 2 * np.exp(-GAMMA * np.abs(TAUS)), rtol=1e-15, atol=0)
    assert perp.at(0.0) == 2.0


@pytest.mark.parametrize("df", [0.3e9, 1e9, 4e9])
def test_beat_is_orthogonal_times_one_minus_cos(df):
    dw = 2 * math.pi * df
    perp, par = hom.pair_profiles(GAMMA, 0.0, dw, TAUS)
    assert np.allclose(par.rates, perp.rates * (1 - np.cos(dw * TAUS)), rtol=0, atol=1e-12)


def test_pre_detector_beat_period():
    df = 2e9
    _, par = hom.pair_profiles(GAMMA, 0.0, 2 * math.pi * df, TAUS)
    env = 2 * np.exp(-GAMMA * np.abs(TAUS))
    shifted = 1 - np.cos(2 * math.pi * df * (TAUS + 1 / df))
    assert np.allclose(par.rates / env, shifted, atol=1e-9)


@given(dt=st.floats(-2e-9, 2e-9), df=st.floats(-10e9, 10e9), ea=unit, eb=unit)
def test_rates_nonnegative(dt, df, ea, eb):
    a = PhotonWavepacket(2 * math.pi * df, GAMMA, ea, dt)
    b = PhotonWavepacket(0.0, GAMMA, eb, 0.0)
    assert np.all(coincidence_profile(a, b, TAUS).rates >= 0)


@given(ea=unit, eb=unit, angle=st.floats(0, 2 * math.pi), dt=st.floats(-1e-9, 1e-9))
def test_common_rotation_invariance(ea, eb, angle, dt):
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]]) @ np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    a = PhotonWavepacket(1e9, GAMMA, ea, dt)
    b = PhotonWavepacket(0.0, GAMMA, eb)
    ra = PhotonWavepacket(1e9, GAMMA, tuple(rot @ ea), dt)
    rb = PhotonWavepacket(0.0, GAMMA, tuple(rot @ eb))
    assert np.allclose(coincidence_profile(a, b, TAUS).rates, coincidence_profile(ra, rb, TAUS).rates,
                       rtol=0, atol=1e-12)


def test_input_validation():
    with pytest.raises(UnsupportedConfigurationError):
        coincidence_profile(PhotonWavepacket(0, GAMMA), PhotonWavepacket(0, 2 * GAMMA), TAUS)
    with pytest.raises(ValueError):
        PhotonWavepacket(0, GAMMA, (1.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        PhotonWavepacket(0, 0.0)
    with pytest.raises(ValueError):
        DetectorModel(120e-12, 0.0)


def test_consistency_guard(monkeypatch):
    monkeypatch.setattr(hom, "_rates", lambda *a: -np.ones_like(a[-1]))
    with pytest.raises(ConsistencyError):
        coincidence_profile(PhotonWavepacket(0, GAMMA), PhotonWavepacket(0, GAMMA), TAUS)


def test_visibility_examples():
    assert visibility(GAMMA, 0.0) == 1.0
    assert visibility(GAMMA, 5 / GAMMA) < 0.1
    assert visibility(GAMMA, 50 / GAMMA) < 1e-20


@pytest.mark.parametrize("g_dt", [0.05, 0.5, 1.0, 2.0, 4.0])
def test_visibility_closed_form(g_dt):
    assert visibility(GAMMA, g_dt / GAMMA) == pytest.approx(closed_form_visibility(GAMMA, g_dt / GAMMA),
                                                             rel=1e-12)


def test_visibility_brute_force_grid():
    dt = 1 / GAMMA
    taus = np.linspace(-(dt + 10 / GAMMA), dt + 10 / GAMMA, 1_000_001)
    perp, par = hom.pair_profiles(GAMMA, dt, 0.0, taus)
    brute = (perp.rates.max() - par.rates.max()) / (perp.rates.max() + par.rates.max())
    assert visibility(GAMMA, dt) == pytest.approx(brute, abs=1e-6)


def test_visibility_symmetric_and_monotone():
    dts = np.linspace(0, 3e-9, 61)
    v = [visibility(GAMMA, t) for t in dts]
    assert np.all(np.diff(v) <= 1e-15)
    assert all(visibility(GAMMA, t) == pytest.approx(visibility(GAMMA, -t), rel=1e-14) for t in dts)


# -- detector -----------------------------------------------------------------

DET = DetectorModel()


def grid_profile(rates_fn, oversample=9, half=3e-9):
    taus = detector_grid(half, DET.bin_width, oversample)
    return CoincidenceProfile(taus, rates_fn(taus))


def test_coarse_grid_rejected():
    prof = CoincidenceProfile(np.linspace(-1e-9, 1e-9, 101), np.ones(101))
    with pytest.raises(AccuracyError):
        apply_detector(prof, DET)


def test_constant_in_constant_out():
    out = apply_detector(grid_profile(lambda t: np.zeros_like(t)), DET, 0.3)
    assert np.allclose(out.rates, 0.3 * DET.bin_width, rtol=1e-12)
    assert np.allclose(out.taus / DET.bin_width, np.round(out.taus / DET.bin_width))
    assert 0.0 in out.taus


def test_binning_conserves_total():
    from scipy import ndimage

    prof = grid_profile(lambda t: 2 * np.exp(-GAMMA * np.abs(t)))
    dt = prof.taus[1] - prof.taus[0]
    out = apply_detector(prof, DET, 0.01)
    conv = ndimage.gaussian_filter1d(prof.rates + 0.01, DET.sigma / dt, mode="nearest", truncate=8.0)
    assert out.rates.sum() == pytest.approx(conv.sum() * dt, rel=1e-9)


@given(a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_detector_linear(a, b):
    f = grid_profile(lambda t: 2 * np.exp(-GAMMA * np.abs(t)))
    g = grid_profile(lambda t: 1 - np.cos(2e10 * t))
    raw = a * f.rates + b * g.rates
    shift = max(0.0, -raw.min())
    combo = apply_detector(CoincidenceProfile(f.taus, raw + shift), DET)
    expected = a * apply_detector(f, DET).rates + b * apply_detector(g, DET).rates + shift * DET.bin_width
    assert np.allclose(combo.rates, expected, rtol=1e-10, atol=1e-22)


def test_zero_jitter_small_bins_is_identity():
    det = DetectorModel(0.0, 0.1e-12)
    taus = detector_grid(1e-9, det.bin_width, 9)
    prof = CoincidenceProfile(taus, 2 * np.exp(-GAMMA * np.abs(taus)))
    out = apply_detector(prof, det, 0.05)
    direct = 2 * np.exp(-GAMMA * np.abs(out.taus)) + 0.05
    # bin averaging of a cusp of slope 2*gamma over 0.1 ps bins: relative error <= gamma*b/2
    assert np.allclose(out.rates / det.bin_width, direct, rtol=GAMMA * det.bin_width / 2)


@pytest.mark.parametrize("df", [1e9, 2e9, 4e9])
def test_jitter_attenuates_pure_cosine(df):
    det = DetectorModel(120e-12, 1e-12)
    taus = detector_grid(1.5e-9, det.bin_width, 9)
    prof = CoincidenceProfile(taus, 1 - np.cos(2 * math.pi * df * taus))
    out = apply_detector(prof, det)
    at0 = out.at(0.0) / det.bin_width
    factor = math.exp(-2 * (math.pi * df * det.sigma) ** 2)
    assert 1 - at0 == pytest.approx(factor, rel=1e-3)


def test_beat_family_zero_detuning_reaches_floor():
    floor = hom.floor_for_car(GAMMA, DET, 25.0)
    fam = hom.beat_family(GAMMA, [0.0, 4e9], DET, floor)
    (_, flat), (_, beat) = fam
    assert flat.at(0.0) == pytest.approx(floor * DET.bin_width, rel=1e-9)
    assert beat.at(0.0) > 2 * floor * DET.bin_width


def test_floor_sets_post_detector_visibility():
    for car in (10.0, 25.0, 100.0):
        floor = hom.floor_for_car(GAMMA, DET, car)
        assert hom.post_detector_visibility(GAMMA, 0.0, DET, floor) == pytest.approx(car / (car + 2), rel=1e-9)


def test_visibility_sweep_shape():
    floor = hom.floor_for_car(GAMMA, DET, 25.0)
    sweep = hom.visibility_sweep(GAMMA, [-1e-9, 0.0, 1e-9], DET, floor)
    assert sweep[1][1] > 0.9
    assert sweep[0][1] == pytest.approx(sweep[2][1], rel=1e-6)
    assert sweep[0][1] < sweep[1][1]
