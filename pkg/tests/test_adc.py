import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinflash.adc import (CONVENTIONAL, INTERLEAVED, ComparatorModel, EnergyEvent, FlashADC,
                           PhaseSchedule, QuantizerBank, ThermometerCode, design_widths,
                           energy_accounting, quantize, run_conventional, run_interleaved, sense,
                           thermometer_to_binary, write_conversion_log)
from spinflash.device import DeviceConfig, critical_current
from spinflash.errors import InfeasibleWidth, InvalidConfig, ResetFailed
from spinflash.switching import AP, P, ResetProtocol, equilibrium

QUIET = ComparatorModel(sigma=0.0)
LADDER = [20e-6 * (k + 1) for k in range(7)]


@pytest.fixture(scope="module")
def adc():
    return FlashADC.designed(comparator=QUIET)


def test_design_widths_ladder(dev):
    w = design_widths(20e-6, 140e-6, 7, dev)
    assert w[0] == pytest.approx(50e-9, rel=1e-12)
    for k, wk in enumerate(w):
        assert critical_current(dev, 0.0, wk) == pytest.approx(LADDER[k], rel=1e-9)


def test_design_widths_doubling(dev):
    a = design_widths(10e-6, 70e-6, 7, dev)
    b = design_widths(20e-6, 140e-6, 7, dev)
    assert np.allclose(np.array(b) / np.array(a), 2.0, rtol=1e-14)


@pytest.mark.parametrize("lo,hi", [(1e-6, 10e-6), (100e-6, 2e-3)])
def test_design_widths_infeasible(lo, hi):
    with pytest.raises(InfeasibleWidth):
        design_widths(lo, hi)


def test_design_widths_bad_range():
    with pytest.raises(InvalidConfig):
        design_widths(50e-6, 20e-6)


def test_bank_invariants(dev):
    w = design_widths()
    bank = QuantizerBank.from_widths(w)
    assert bank.all_p() and len(bank.devices) == 7
    assert np.all(np.diff(bank.thresholds()) > 0)
    with pytest.raises(InvalidConfig):
        QuantizerBank.from_widths(w[:6])
    with pytest.raises(InvalidConfig):
        QuantizerBank.from_widths(list(reversed(w)))


def test_thermometer_strings():
    c = ThermometerCode.from_string("0001111")
    assert c.bits == (True, True, True, True, False, False, False)
    assert str(c) == "0001111"
    with pytest.raises(InvalidConfig):
        ThermometerCode.from_string("00011")


@pytest.mark.parametrize("s,value", [("0000000", 0), ("1111111", 7), ("0011111", 5)])
def test_binary_examples(s, value):
    assert thermometer_to_binary(ThermometerCode.from_string(s)) == (value, False)


def test_binary_equals_popcount_on_all_well_formed_codes():
    for n in range(8):
        code = ThermometerCode(tuple(k < n for k in range(7)))
        assert not code.has_bubble
        assert thermometer_to_binary(code) == (code.popcount, False) == (n, False)


def test_bubble_detection_exhaustive():
    for bits in itertools.product([False, True], repeat=7):
        code = ThermometerCode(bits)
        value, bubble = thermometer_to_binary(code)
        n = sum(bits)
        well_formed = bits == tuple(k < n for k in range(7))
        assert bubble == (not well_formed)
        assert value == (max(k for k, b in enumerate(bits) if b) + 1 if n else 0)


@pytest.mark.parametrize("i_in,expected", [(0.0, "0000000"), (90e-6, "0001111"), (150e-6, "1111111")])
def test_quantize_examples(adc, i_in, expected):
    bank = adc.new_bank()
    code, outs = quantize(bank, i_in)
    assert str(code) == expected
    assert [o.final_state == AP for o in outs] == list(code.bits)


def test_sense_examples(dev):
    ap, p = equilibrium(dev, AP), equilibrium(dev, P)
    assert sense(dev, ap, dev, p, QUIET).bit is True
    assert sense(dev, p, dev, p, QUIET).bit is False
    r = sense(dev, [0, 0, -1], dev, [0, 0, -1], QUIET)
    assert r.delta_v == pytest.approx(-QUIET.reference(dev))


def test_sense_tie_breaks_to_zero(dev):
    # an input exactly at the reference decides 0
    cmp_ = ComparatorModel(sigma=0.0, i_read=10e-6)
    m_mid = None
    # find m_z where R(m) - R_P equals half the swing
    from scipy.optimize import brentq
    from spinflash.device import resistance
    target = 0.5 * (dev.r_ap - dev.r_p)
    mz = brentq(lambda z: resistance(dev, [math.sqrt(1 - z * z), 0, z]) - dev.r_p - target, -1, 1, xtol=1e-16)
    r = sense(dev, [math.sqrt(1 - mz * mz), 0, mz], dev, [0, 0, -1], cmp_)
    assert abs(r.delta_v) < 1e-12
    assert mz == pytest.approx(0.4667, abs=1e-3)


def test_read_margin_and_error_probability(dev):
    cmp10 = ComparatorModel(i_read=10e-6)
    assert (dev.r_ap - dev.r_p) * 10e-6 == pytest.approx(35e-3, rel=1e-12)
    # default read current: +-35 mV around the midpoint reference, 7 sigma
    assert ComparatorModel().reference(dev) == pytest.approx(35e-3, rel=1e-12)
    assert ComparatorModel().error_probability(dev) < 1e-10
    assert ComparatorModel().error_probability(dev) == pytest.approx(0.5 * math.erfc(7 / math.sqrt(2)), rel=1e-9)
    assert cmp10.error_probability(dev) > ComparatorModel().error_probability(dev)


def test_metastable_flag(dev):
    cmp_ = ComparatorModel(sigma=5e-3)
    from scipy.optimize import brentq
    from spinflash.device import resistance
    target = 0.5 * (dev.r_ap - dev.r_p)
    mz = brentq(lambda z: resistance(dev, [math.sqrt(1 - z * z), 0, z]) - dev.r_p - target, -1, 1)
    r = sense(dev, [math.sqrt(1 - mz * mz), 0, mz], dev, [0, 0, -1], cmp_, np.random.default_rng(0))
    assert r.metastable


def test_schedule_periods():
    conv = PhaseSchedule(architecture=CONVENTIONAL)
    inter = PhaseSchedule(architecture=INTERLEAVED)
    assert conv.period == pytest.approx(5e-9, rel=1e-15)
    assert inter.period == pytest.approx(3.28e-9, rel=1e-15)
    assert 1 / inter.period == pytest.approx(304.1e6, rel=0.01)
    with pytest.raises(InvalidConfig):
        PhaseSchedule(t_reset=3e-9, architecture=INTERLEAVED)
    with pytest.raises(InvalidConfig):
        PhaseSchedule(architecture="pipelined")


def test_conventional_three_samples(adc):
    recs = run_conventional([30e-6, 70e-6, 10e-6], adc)
    assert [r.t_start for r in recs] == pytest.approx([0.0, 5e-9, 10e-9])
    assert recs[-1].t_start + recs[-1].period == pytest.approx(15e-9)
    assert [r.binary for r in recs] == [1, 3, 0]
    assert recs[0].phase_times["reset"] == pytest.approx((3.28e-9, 5e-9))


def test_conventional_idle_input(adc):
    recs = run_conventional([0.0] * 4, adc)
    assert all(r.binary == 0 and not r.errors for r in recs)


def test_ramp_codes_nondecreasing_and_complete(adc):
    ramp = list(np.linspace(0, 160e-6, 8))
    for runner in (run_conventional, run_interleaved):
        codes = [r.binary for r in runner(ramp, adc)]
        assert codes == sorted(codes)
        assert codes == list(range(8))
        assert not any(r.thermo.has_bubble for r in runner(ramp, adc))


def test_interleaved_timing(adc):
    recs = run_interleaved([50e-6] * 5, adc)
    assert recs[1].t_start - recs[0].t_start == pytest.approx(3.28e-9)
    assert "reset" not in recs[0].phase_times
    assert recs[1].phase_times["reset"][0] == pytest.approx(recs[1].t_start)
    # first sample latency (convert + sense) equals the conventional one
    c0 = run_conventional([50e-6], adc)[0]
    assert recs[0].phase_times["sense"][1] == pytest.approx(c0.phase_times["sense"][1])


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(0.0, 170e-6), min_size=3, max_size=12))
def test_architecture_equivalence_random(inputs):
    adc = FlashADC.designed()
    a = [r.binary for r in run_conventional(inputs, adc)]
    b = [r.binary for r in run_interleaved(inputs, adc)]
    assert a == b


def test_architecture_equivalence_sinusoid():
    from spinflash.cli import sampled_sinusoid
    adc = FlashADC.designed()
    s = sampled_sinusoid(100, 0.0, 160e-6)
    a = run_conventional(s, adc)
    b = run_interleaved(s, adc)
    assert [r.binary for r in a] == [r.binary for r in b]
    assert not any(r.errors for r in a + b)


def test_dummy_integrity_violation_is_reported():
    # a reset too weak to restore P leaves the next dummy bank in AP
    adc = FlashADC.designed(comparator=QUIET, reset=ResetProtocol(current_factor=0.2))
    recs = run_interleaved([150e-6, 0.0, 0.0], adc)
    assert any("role-violation" in e for e in recs[1].errors)


def test_conventional_propagates_reset_failure():
    adc = FlashADC.designed(comparator=QUIET, reset=ResetProtocol(current_factor=0.2))
    with pytest.raises(ResetFailed):
        run_conventional([150e-6], adc)


def test_gain_hook(adc):
    g = FlashADC.designed(comparator=QUIET, gains=(1.0,) * 6 + (0.5,))
    assert str(g.convert_static([150e-6])[0]) == "0111111"
    assert str(adc.convert_static([150e-6])[0]) == "1111111"


def test_energy_accounting_basics():
    assert energy_accounting([]) == 0.0
    ev = [EnergyEvent("sot", 50e-6, 1e4, 1e-9), EnergyEvent("cmp", fixed=10e-15)]
    assert energy_accounting(ev) == pytest.approx(50e-6 ** 2 * 1e4 * 1e-9 + 10e-15)
    doubled = [EnergyEvent(e.kind, e.current, e.resistance, 2 * e.duration) for e in ev[:1]]
    assert energy_accounting(doubled) == pytest.approx(2 * energy_accounting(ev[:1]), rel=1e-15)


def test_interleaved_power_within_bound(adc):
    ramp = list(np.linspace(0, 160e-6, 64))
    recs = run_interleaved(ramp, adc)
    power = sum(r.energy for r in recs) / sum(r.period for r in recs)
    assert 476e-6 / 3 <= power <= 476e-6 * 3


def test_conversion_log(tmp_path, adc):
    recs = run_conventional([0.0, 90e-6], adc)
    path = tmp_path / "log.csv"
    write_conversion_log(recs, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t_start_s,input_A,thermo,binary,bubble,energy_J"
    assert lines[2].split(",")[2:4] == ["0001111", "4"]


def test_noisy_pipeline_deterministic():
    from spinflash.llg import ThermalModel
    adc = FlashADC.designed(thermal=ThermalModel(enabled=True), seed=11)
    s = [30e-6, 90e-6, 130e-6, 10e-6]
    a = run_interleaved(s, adc)
    b = run_interleaved(s, adc)
    assert [(r.binary, r.energy, r.errors) for r in a] == [(r.binary, r.energy, r.errors) for r in b]
