import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinflash.constants import GAMMA, HBAR, KB, MU0, Q, a_per_m_to_oe, oe_to_a_per_m
from spinflash.device import (DEFAULT_ETA_FIT, DEFAULT_K_HEAT, DeviceConfig, barrier_of_bias,
                              calibrate_eta_fit, calibrate_k_heat, critical_current,
                              effective_anisotropy_field, ki_of_bias, ms_of_bias,
                              peak_thermal_field, resistance, thermal_sigma)
from spinflash.errors import AboveCurie, InvalidConfig


def test_material_defaults(dev):
    assert (dev.t_fl, dev.t_ox, dev.t_hm, dev.w_hm, dev.diameter) == (1.1e-9, 1.4e-9, 3e-9, 50e-9, 50e-9)
    assert (dev.ms0, dev.ki0, dev.alpha, dev.xi_vcma, dev.t0, dev.tc) == (6.25e5, 3.2e-4, 0.05, 60e-15, 300.0, 750.0)
    assert dev.tmr0 == 1.75
    assert dev.area == pytest.approx(math.pi * 25e-9 ** 2, rel=1e-15)


@pytest.mark.parametrize("field,value", [("t_fl", 0.0), ("ms0", -1.0), ("tc", 250.0), ("alpha", -0.1)])
def test_invalid_config(field, value):
    with pytest.raises(InvalidConfig):
        DeviceConfig(**{field: value})


def test_ms_zero_bias_hand_value(dev):
    # 6.25e5 * (1 - 0.4**1.5) = 6.25e5 * 0.7470178...
    assert ms_of_bias(dev, 0.0) == pytest.approx(466886.1, rel=1e-6)


def test_ms_without_heating_is_flat():
    d = DeviceConfig(k_heat=0.0)
    expected = 6.25e5 * (1 - (300 / 750) ** 1.5)
    for v in (-1.0, 0.0, 0.3, 1.0):
        assert ms_of_bias(d, v) == pytest.approx(expected, rel=1e-15)
        assert ki_of_bias(d, v) == pytest.approx(ki_of_bias(d, 0.0), rel=1e-15)


def test_ms_ki_decrease_with_bias(dev):
    v = np.linspace(0, 1, 21)
    ms = [ms_of_bias(dev, x) for x in v]
    ki = [ki_of_bias(dev, x) for x in v]
    assert np.all(np.diff(ms) < 0) and np.all(np.diff(ki) < 0)
    assert ms_of_bias(dev, -0.5) == ms_of_bias(dev, 0.5)


def test_ki_exponent_one_matches_ms(dev):
    d = dev.replace(eta_bloch=1.0)
    for v in (0.0, 0.4, 0.9):
        assert ki_of_bias(d, v) / d.ki0 == pytest.approx(ms_of_bias(d, v) / d.ms0, rel=1e-14)


def test_above_curie():
    d = DeviceConfig(k_heat=500.0)
    with pytest.raises(AboveCurie):
        ms_of_bias(d, 1.0)


def test_barrier_hand_values(dev):
    area = math.pi * (25e-9) ** 2
    d0 = 3.2e-4 * area / (1.38e-23 * 300)
    slope = 60e-15 * area / (1.38e-23 * 300 * 1.4e-9)
    assert barrier_of_bias(dev, 0.0) == d0
    assert d0 == pytest.approx(151.768, rel=1e-5)
    assert slope == pytest.approx(20.326, rel=1e-4)
    assert barrier_of_bias(dev, 0.4) == pytest.approx(143.637, rel=1e-5)
    v = np.linspace(0, 0.4, 9)
    b = np.array([barrier_of_bias(dev, x) for x in v])
    assert np.allclose(np.diff(b) / np.diff(v), -slope, rtol=1e-9)


def test_barrier_needs_oxide():
    d = DeviceConfig()
    object.__setattr__(d, "t_ox", 0.0)
    with pytest.raises(InvalidConfig):
        barrier_of_bias(d, 0.1)


def test_critical_current_calibration(dev):
    assert critical_current(dev, 0.0) == pytest.approx(20e-6, rel=1e-12)
    assert calibrate_eta_fit(dev.replace(eta_fit=1.0)) == pytest.approx(DEFAULT_ETA_FIT, rel=1e-12)


def test_critical_current_formula(dev):
    ms, ki = ms_of_bias(dev, 0.2), ki_of_bias(dev, 0.2)
    expected = Q * MU0 * dev.t_fl * ms * ki * dev.t_hm * dev.w_hm / (HBAR * dev.xi_vcma * dev.eta_fit)
    assert critical_current(dev, 0.2) == pytest.approx(expected, rel=1e-14)


@given(w=st.floats(10e-9, 500e-9), a=st.floats(0.1, 10.0), v=st.floats(-0.5, 0.5))
def test_critical_current_linear_in_width(w, a, v):
    d = DeviceConfig()
    assert critical_current(d, v, a * w) / critical_current(d, v, w) == pytest.approx(a, rel=1e-14)


def test_critical_current_decreases_with_bias(dev):
    v = np.linspace(0, 0.4, 41)
    ic = np.array([critical_current(dev, x) for x in v])
    assert np.all(np.diff(ic) < 0)


def test_resistance_states(dev):
    assert resistance(dev, [0, 0, -1]) == pytest.approx(2e3, rel=1e-15)
    assert resistance(dev, [0, 0, 1]) == pytest.approx(2e3 * 2.75, rel=1e-15)
    r_ap = 5.5e3
    assert resistance(dev, [1, 0, 0]) == pytest.approx(2 * 2e3 * r_ap / (2e3 + r_ap), rel=1e-14)


@given(th=st.floats(0, math.pi), ph=st.floats(0, 2 * math.pi))
def test_resistance_bounds(th, ph):
    d = DeviceConfig()
    m = [math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)]
    r = resistance(d, m)
    assert d.r_p * (1 - 1e-12) <= r <= d.r_ap * (1 + 1e-12)


def test_inplane_field_magnitude(dev):
    assert abs(dev.h_inplane) == pytest.approx(3183.1, rel=1e-4)
    assert dev.h_inplane < 0


def test_zero_bias_anisotropy_field(dev):
    ms = ms_of_bias(dev, 0.0)
    ki = 3.2e-4 * (1 - 0.4 ** 1.5) ** 2.2
    assert effective_anisotropy_field(dev, 0.0) == pytest.approx(2 * ki / (MU0 * ms * 1.1e-9) - ms, rel=1e-12)
    assert a_per_m_to_oe(effective_anisotropy_field(dev, 0.0)) == pytest.approx(693, rel=2e-3)


def test_anisotropy_turns_inplane_near_035v(dev):
    assert effective_anisotropy_field(dev, 0.3) > 0
    assert effective_anisotropy_field(dev, 0.4) < 0


def test_thermal_sigma_formula(dev):
    ms = ms_of_bias(dev, 0.0)
    expected = math.sqrt(2 * 0.05 * KB * 300 / (GAMMA * MU0 * ms * dev.volume * 1e-12))
    assert thermal_sigma(dev, 300.0, 1e-12) == pytest.approx(expected, rel=1e-14)
    assert thermal_sigma(dev, 0.0, 1e-12) == 0.0


def test_peak_thermal_field_range(dev):
    assert calibrate_k_heat(dev) == pytest.approx(DEFAULT_K_HEAT, rel=1e-9)
    v = np.linspace(-1, 1, 41)
    peaks = np.array([a_per_m_to_oe(peak_thermal_field(dev, x)) for x in v])
    assert np.all(peaks >= 0) and peaks.max() == pytest.approx(2500.0, rel=1e-9)
    assert peaks[0] == pytest.approx(2500.0, rel=1e-9)


def test_unit_conversion_round_trip():
    assert a_per_m_to_oe(oe_to_a_per_m(123.0)) == pytest.approx(123.0, rel=1e-15)
