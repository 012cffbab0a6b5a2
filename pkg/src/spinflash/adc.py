"""3-bit flash ADC: quantizer banks, behavioral sense stage and the two pipelines."""

from dataclasses import dataclass, field
import csv
import math

import numpy as np

from .device import DeviceConfig, critical_current, resistance
from .errors import InfeasibleWidth, InvalidConfig
from .llg import NO_THERMAL, IntegratorConfig
from .switching import (AP, P, ResetProtocol, SwitchProtocol, classify, equilibrium,
                        reset_batch, switch_batch)

N_LEVELS = 7
MIN_WIDTH = 10e-9
MAX_WIDTH = 500e-9

CONVENTIONAL = "conventional"
INTERLEAVED = "interleaved"
CONVERSION = "conversion"
DUMMY = "dummy"


def design_widths(i_min=20e-6, i_max=140e-6, n_levels=N_LEVELS, dev_template=None):
    """Heavy-metal widths whose zero-bias Ic form an evenly spaced ladder."""
    if not 0 < i_min < i_max:
        raise InvalidConfig("need 0 < i_min < i_max")
    dev = DeviceConfig() if dev_template is None else dev_template
    per_metre = critical_current(dev, 0.0, w_hm=1.0)
    targets = i_min + np.arange(n_levels) * (i_max - i_min) / (n_levels - 1)
    widths = [float(t / per_metre) for t in targets]
    for k, w in enumerate(widths):
        if not MIN_WIDTH <= w <= MAX_WIDTH:
            raise InfeasibleWidth(f"level {k}: width {w * 1e9:.2f} nm outside "
                                  f"[{MIN_WIDTH * 1e9:.0f}, {MAX_WIDTH * 1e9:.0f}] nm")
    return widths


def mismatched_widths(widths, sigma=0.01, seed=1):
    """Widths with independent Gaussian relative errors of std ``sigma``."""
    rng = np.random.default_rng(seed)
    w = np.asarray(widths, dtype=float)
    return [float(x) for x in w * (1.0 + sigma * rng.standard_normal(w.size))]


@dataclass
class QuantizerBank:
    """Seven devices, widths ascending, with their current magnetization."""

    devices: tuple
    role: str = CONVERSION
    m: np.ndarray = None

    def __post_init__(self):
        self.devices = tuple(self.devices)
        if len(self.devices) != N_LEVELS:
            raise InvalidConfig(f"a quantizer bank holds exactly {N_LEVELS} devices")
        widths = [d.w_hm for d in self.devices]
        if any(b <= a for a, b in zip(widths, widths[1:])):
            raise InvalidConfig("bank widths must be strictly increasing")
        if self.m is None:
            self.m = np.array([equilibrium(d) for d in self.devices])
        self.m = np.asarray(self.m, dtype=float).reshape(N_LEVELS, 3).copy()

    @classmethod
    def from_widths(cls, widths, template=None, role=CONVERSION):
        template = DeviceConfig() if template is None else template
        return cls(tuple(template.replace(w_hm=w) for w in widths), role)

    @property
    def states(self):
        return [classify(mz) for mz in self.m[:, 2]]

    def all_p(self):
        return all(s == P for s in self.states)

    def thresholds(self, v_b=0.0):
        return [critical_current(d, v_b) for d in self.devices]


@dataclass(frozen=True)
class PhaseSchedule:
    t_convert: float = 2.28e-9
    t_sense: float = 1.0e-9
    t_reset: float = 1.72e-9
    architecture: str = INTERLEAVED

    def __post_init__(self):
        if self.architecture not in (CONVENTIONAL, INTERLEAVED):
            raise InvalidConfig(f"unknown architecture {self.architecture!r}")
        if min(self.t_convert, self.t_sense, self.t_reset) <= 0:
            raise InvalidConfig("phase durations must be positive")
        if self.architecture == INTERLEAVED and self.t_reset > self.t_convert:
            raise InvalidConfig("interleaved reset must fit inside the conversion phase")

    @property
    def period(self):
        if self.architecture == CONVENTIONAL:
            return self.t_convert + self.t_sense + self.t_reset
        return self.t_convert + self.t_sense

    def as_(self, architecture):
        return PhaseSchedule(self.t_convert, self.t_sense, self.t_reset, architecture)


@dataclass(frozen=True)
class ThermometerCode:
    """Seven comparator outputs; index 0 is the lowest threshold.

    The string form prints index 6 first, so ``"0001111"`` means devices 0-3 are set.
    """

    bits: tuple

    def __post_init__(self):
        bits = tuple(bool(b) for b in self.bits)
        if len(bits) != N_LEVELS:
            raise InvalidConfig(f"thermometer code needs {N_LEVELS} bits")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s):
        if len(s) != N_LEVELS or set(s) - {"0", "1"}:
            raise InvalidConfig(f"bad thermometer string {s!r}")
        return cls(tuple(c == "1" for c in reversed(s)))

    def __str__(self):
        return "".join("1" if b else "0" for b in reversed(self.bits))

    @property
    def has_bubble(self):
        return any(b and not a for a, b in zip(self.bits, self.bits[1:]))

    @property
    def popcount(self):
        return sum(self.bits)


def thermometer_to_binary(code):
    """Priority-encoder output (highest set bit + 1) and a bubble flag."""
    set_bits = [k for k, b in enumerate(code.bits) if b]
    value = set_bits[-1] + 1 if set_bits else 0
    return value, code.has_bubble


@dataclass(frozen=True)
class ComparatorModel:
    """Behavioral latch comparing conversion and dummy read voltages.

    The decision reference sits halfway between the P/P and AP/P differentials,
    (R_AP - R_P) * i_read / 2, and a Gaussian input-referred offset+noise of
    ``sigma`` volts is added per decision.
    """

    sigma: float = 5e-3
    i_read: float = 20e-6
    t_sense: float = 1.0e-9
    energy_per_decision: float = 10e-15

    def __post_init__(self):
        if self.sigma < 0 or self.i_read <= 0 or self.t_sense <= 0 or self.energy_per_decision < 0:
            raise InvalidConfig("invalid comparator parameters")

    def reference(self, dev):
        return (dev.r_ap - dev.r_p) * self.i_read / 2

    def error_probability(self, dev):
        """Per-decision error probability for a settled P or AP input."""
        if self.sigma == 0:
            return 0.0
        return 0.5 * math.erfc(self.reference(dev) / (self.sigma * math.sqrt(2)))


@dataclass
class SenseResult:
    bit: bool
    delta_v: float
    metastable: bool
    energy: float


def sense(conv_dev, conv_m, dummy_dev, dummy_m, comparator=ComparatorModel(), rng=None):
    """One comparator decision: 1 iff V(conv) - V(dummy) exceeds the reference plus noise."""
    v_conv = comparator.i_read * resistance(conv_dev, conv_m)
    v_dummy = comparator.i_read * resistance(dummy_dev, dummy_m)
    signal = v_conv - v_dummy - comparator.reference(conv_dev)
    noise = comparator.sigma * rng.standard_normal() if (rng is not None and comparator.sigma > 0) else 0.0
    energy = (comparator.i_read * (v_conv + v_dummy) * comparator.t_sense
              + comparator.energy_per_decision)
    return SenseResult(bit=bool(signal + noise > 0), delta_v=signal,
                       metastable=bool(abs(signal) < 0.1 * comparator.sigma), energy=energy)


def quantize(bank, i_in, protocol=SwitchProtocol(), thermal=NO_THERMAL, rngs=None,
             cfg=IntegratorConfig(), v_bias=0.0, gains=None, jobs=1):
    """Drive every device of ``bank`` with ``i_in`` (times its gain).

    Updates ``bank.m`` and returns (per-device AP indicators, outcomes).
    """
    gains = (1.0,) * N_LEVELS if gains is None else gains
    outs = switch_batch(bank.devices, [g * i_in for g in gains], v_bias, protocol, thermal,
                        rngs, cfg, bank.m, jobs=jobs)
    bank.m = np.array([o.final_m for o in outs])
    return ThermometerCode(tuple(o.final_state == AP for o in outs)), outs


def _stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


@dataclass
class ConversionRecord:
    input: float
    thermo: ThermometerCode
    binary: int
    t_start: float
    period: float
    phase_times: dict
    energy: float
    errors: list = field(default_factory=list)

    def csv_row(self):
        return [f"{self.t_start:.6e}", f"{self.input:.9e}", str(self.thermo), self.binary,
                int(self.thermo.has_bubble), f"{self.energy:.6e}"]


CSV_HEADER = ["t_start_s", "input_A", "thermo", "binary", "bubble", "energy_J"]


def write_conversion_log(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow(r.csv_row())


@dataclass(frozen=True)
class EnergyEvent:
    """Ohmic dissipation I^2 R t plus a fixed per-event energy."""

    kind: str
    current: float = 0.0
    resistance: float = 0.0
    duration: float = 0.0
    fixed: float = 0.0

    @property
    def energy(self):
        return self.current ** 2 * self.resistance * self.duration + self.fixed


def energy_accounting(events):
    return float(sum(e.energy for e in events))


def _protocol_events(dev, waveform, prefix):
    r_mid = resistance(dev, np.array([1.0, 0.0, 0.0]))
    ev = []
    for seg in waveform.segments:
        if seg.i_sot:
            ev.append(EnergyEvent(prefix + "_sot", seg.i_sot, dev.r_hm, seg.duration))
        if seg.i_stt:
            ev.append(EnergyEvent(prefix + "_stt", seg.i_stt, r_mid, seg.duration))
        if seg.v_bias:
            ev.append(EnergyEvent(prefix + "_bias", seg.v_bias / r_mid, r_mid, seg.duration))
    return ev


@dataclass
class FlashADC:
    """Everything needed to convert: devices, protocols, sense stage, noise model.

    ``gains`` scales the input current seen by each device (ideal replication
    when all ones).  After a reset phase, devices that are in P start the next
    conversion from the P equilibrium unless ``carry_residual`` is set, in
    which case the residual ringing of the reset pulse is carried over.
    ``seed`` keys every random stream by (sample, bank, device, phase) so
    results do not depend on scheduling.
    """

    widths: tuple
    template: DeviceConfig = field(default_factory=DeviceConfig)
    protocol: SwitchProtocol = field(default_factory=SwitchProtocol)
    reset: ResetProtocol = field(default_factory=ResetProtocol)
    comparator: ComparatorModel = field(default_factory=ComparatorModel)
    thermal: object = NO_THERMAL
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    v_bias: float = 0.0
    gains: tuple = (1.0,) * N_LEVELS
    seed: int = 0
    jobs: int = 1
    carry_residual: bool = False

    def __post_init__(self):
        self.widths = tuple(float(w) for w in self.widths)
        self.gains = tuple(float(g) for g in self.gains)
        if len(self.gains) != N_LEVELS:
            raise InvalidConfig(f"gains needs {N_LEVELS} entries")
        self.devices = QuantizerBank.from_widths(self.widths, self.template).devices

    @classmethod
    def designed(cls, i_min=20e-6, i_max=140e-6, template=None, **kw):
        template = DeviceConfig() if template is None else template
        return cls(tuple(design_widths(i_min, i_max, N_LEVELS, template)), template, **kw)

    def new_bank(self, role=CONVERSION):
        return QuantizerBank(self.devices, role)

    @property
    def noisy(self):
        return self.thermal.active(self.template)

    def _rngs(self, *key):
        return [_stream(self.seed, *key, k) for k in range(N_LEVELS)]

    def quantize(self, bank, i_in, key=(0, 0)):
        """Apply the conversion pulse to every device; returns per-device outcomes."""
        rngs = self._rngs(*key, 0) if self.noisy else None
        return quantize(bank, i_in, self.protocol, self.thermal, rngs, self.integrator,
                        self.v_bias, self.gains, self.jobs)[1]

    def sense_bank(self, conv, dummy, sample=0):
        # the seven latches are shared by both banks, so their noise is keyed by sample only
        rng = _stream(self.seed, sample, N_LEVELS) if self.comparator.sigma > 0 else None
        results = [sense(conv.devices[k], conv.m[k], dummy.devices[k], dummy.m[k],
                         self.comparator, rng) for k in range(N_LEVELS)]
        return ThermometerCode(tuple(r.bit for r in results)), results

    def reset_bank(self, bank, key=(0, 0), strict=True):
        rngs = self._rngs(*key, 2) if self.noisy else None
        outs = reset_batch(bank.devices, bank.m, self.reset, self.thermal, rngs,
                           self.integrator, jobs=self.jobs, strict=strict)
        bank.m = np.array([o.final_m for o in outs])
        if not self.carry_residual:
            for k, o in enumerate(outs):
                if o.final_state == P:
                    bank.m[k] = equilibrium(bank.devices[k])
        return outs

    def convert_static(self, currents):
        """Noiseless-comparator codes for fresh all-P banks, one per input current.

        Used by transfer-curve measurement: each input sees devices in their
        P equilibrium, and the decision is the comparator's noiseless output.
        """
        currents = np.atleast_1d(np.asarray(currents, dtype=float))
        n = currents.size
        devs = list(self.devices) * n
        i_sots = np.outer(currents, self.gains).ravel()
        rngs = None
        if self.noisy:
            rngs = [_stream(self.seed, j, 0, 0, k) for j in range(n) for k in range(N_LEVELS)]
        outs = switch_batch(devs, i_sots, self.v_bias, self.protocol, self.thermal, rngs,
                            self.integrator, jobs=self.jobs)
        dummy = [equilibrium(d) for d in self.devices]
        quiet = ComparatorModel(0.0, self.comparator.i_read, self.comparator.t_sense,
                                self.comparator.energy_per_decision)
        codes = []
        for j in range(n):
            bits = [sense(self.devices[k], outs[j * N_LEVELS + k].final_m, self.devices[k],
                          dummy[k], quiet).bit for k in range(N_LEVELS)]
            codes.append(ThermometerCode(tuple(bits)))
        return codes

    def _conversion_energy(self, i_in):
        ev = []
        for d, g in zip(self.devices, self.gains):
            ev += _protocol_events(d, self.protocol.waveform(g * i_in, self.v_bias), "convert")
        return ev

    def _reset_energy(self, bank, before):
        ev = []
        for d, m in zip(bank.devices, before):
            if classify(m[2]) != P:
                ev += _protocol_events(d, self.reset.waveform(d), "reset")
        return ev


def _record(adc, i_in, code, sensed, t_start, period, phases, events, errors):
    binary, bubble = thermometer_to_binary(code)
    if bubble:
        errors.append(f"bubble code {code}")
    for k, r in enumerate(sensed):
        if r.metastable:
            errors.append(f"metastable decision on bit {k} (dV = {r.delta_v:+.2e} V)")
    energy = energy_accounting(events) + sum(r.energy for r in sensed)
    return ConversionRecord(input=float(i_in), thermo=code, binary=binary, t_start=t_start,
                            period=period, phase_times=phases, energy=energy, errors=errors)


def run_conventional(samples, adc, schedule=None):
    """Convert, sense against an always-P dummy bank, then reset, once per sample."""
    schedule = PhaseSchedule(architecture=CONVENTIONAL) if schedule is None else schedule
    if schedule.architecture != CONVENTIONAL:
        raise InvalidConfig("run_conventional needs a conventional schedule")
    conv = adc.new_bank(CONVERSION)
    dummy = adc.new_bank(DUMMY)
    period = schedule.period
    records = []
    for n, i_in in enumerate(samples):
        t0 = n * period
        t_sense = t0 + schedule.t_convert
        t_reset = t_sense + schedule.t_sense
        phases = {"convert": (t0, t_sense), "sense": (t_sense, t_reset),
                  "reset": (t_reset, t_reset + schedule.t_reset)}
        errors = []
        adc.quantize(conv, i_in, key=(n, 0))
        if not dummy.all_p():
            errors.append("role-violation: dummy bank not all P at sense")
        code, sensed = adc.sense_bank(conv, dummy, n)
        before = conv.m.copy()
        adc.reset_bank(conv, key=(n, 0))
        events = adc._conversion_energy(i_in) + adc._reset_energy(conv, before)
        records.append(_record(adc, i_in, code, sensed, t0, period, phases, events, errors))
    return records


def run_interleaved(samples, adc, schedule=None):
    """Two banks swap roles every sample; the bank that converted the previous
    sample is reset while the other converts, so no reset phase is exposed.

    A dummy bank that is not fully P at sense time is recorded as a
    role-violation on that sample.  A failed reset is reported the same way
    rather than raised: the sense that follows exposes it.
    """
    schedule = PhaseSchedule(architecture=INTERLEAVED) if schedule is None else schedule
    if schedule.architecture != INTERLEAVED:
        raise InvalidConfig("run_interleaved needs an interleaved schedule")
    banks = [adc.new_bank(CONVERSION), adc.new_bank(DUMMY)]
    period = schedule.period
    records = []
    for n, i_in in enumerate(samples):
        t0 = n * period
        conv, other = banks[n % 2], banks[(n + 1) % 2]
        conv.role, other.role = CONVERSION, DUMMY
        t_sense = t0 + schedule.t_convert
        phases = {"convert": (t0, t_sense), "sense": (t_sense, t_sense + schedule.t_sense)}
        errors = []
        events = adc._conversion_energy(i_in)
        adc.quantize(conv, i_in, key=(n, n % 2))
        if n > 0:
            phases["reset"] = (t0, t0 + schedule.t_reset)
            before = other.m.copy()
            adc.reset_bank(other, key=(n, (n + 1) % 2), strict=False)
            events += adc._reset_energy(other, before)
        if not other.all_p():
            bad = [k for k, s in enumerate(other.states) if s != P]
            errors.append(f"role-violation: dummy bank devices {bad} not P at sense")
        code, sensed = adc.sense_bank(conv, other, n)
        records.append(_record(adc, i_in, code, sensed, t0, period, phases, events, errors))
    return records


def run_pipeline(samples, adc, schedule):
    if schedule.architecture == CONVENTIONAL:
        return run_conventional(samples, adc, schedule)
    return run_interleaved(samples, adc, schedule)


def decision_thresholds(devices, protocol=SwitchProtocol(), comparator=ComparatorModel(),
                        v_bias=0.0, cfg=IntegratorConfig(), hi=None, rtol=1e-13):
    """Noiseless SOT current at which each device's comparator output turns to 1.

    Bisection on the decision of a device starting in P equilibrium, all
    devices advanced together.  ``hi`` defaults to 4x the analytic Ic.
    """
    devices = list(devices)
    lo = np.zeros(len(devices))
    hi = np.array([4 * critical_current(d, v_bias) for d in devices]) if hi is None \
        else np.broadcast_to(np.asarray(hi, dtype=float), lo.shape).copy()
    dummy = [equilibrium(d) for d in devices]
    quiet = ComparatorModel(0.0, comparator.i_read, comparator.t_sense)

    def decide(currents):
        outs = switch_batch(devices, currents, v_bias, protocol, NO_THERMAL, None, cfg)
        return np.array([sense(d, o.final_m, d, m, quiet).bit
                         for d, o, m in zip(devices, outs, dummy)])

    if not decide(hi).all():
        raise InvalidConfig("upper bracket does not switch every device")
    while np.any(hi - lo > rtol * hi):
        mid = 0.5 * (lo + hi)
        up = decide(mid)
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return hi


def calibrate_spin_hall_angle(dev=None, target=20e-6, protocol=SwitchProtocol(),
                              comparator=ComparatorModel(), cfg=IntegratorConfig()):
    """Spin Hall angle that puts the device's dynamic threshold at ``target``.

    The SOT amplitude depends on theta_SH * I only, so the threshold scales
    as 1/theta_SH and one measurement fixes the answer.
    """
    dev = DeviceConfig() if dev is None else dev
    i_star = decision_thresholds([dev], protocol, comparator, 0.0, cfg)[0]
    return dev.theta_sh * i_star / target
