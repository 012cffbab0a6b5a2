"""Figures of merit: transfer curve, DNL/INL, thermal error rate, throughput and power."""

from dataclasses import asdict, dataclass, field, fields
import json

import numpy as np
from scipy.stats import binomtest

from .adc import N_LEVELS, thermometer_to_binary
from .errors import InvalidConfig, NonMonotonicTransfer, TransferError
from .llg import NO_THERMAL, IntegratorConfig, ThermalModel
from .switching import SwitchProtocol, switch_attempt, switch_batch

MIN_STEPS_PER_CODE = 64
NOISELESS = "noiseless"
THERMAL = "thermal"


class _JsonReport:
    """JSON round-trip and an aligned two-column text form."""

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})

    def to_text(self):
        d = self.to_dict()
        width = max(len(k) for k in d)
        lines = []
        for k, v in d.items():
            if isinstance(v, float):
                v = f"{v:.6g}"
            elif isinstance(v, (list, tuple)):
                v = "  ".join(f"{x:+.4f}" if isinstance(x, float) else str(x) for x in v)
            lines.append(f"{k:<{width}}  {v}")
        return "\n".join(lines)

    @property
    def ok(self):
        return all(getattr(self, "checks", {}).values())


@dataclass
class TransferCurve(_JsonReport):
    thresholds: list
    lsb: float
    i_start: float = 0.0
    i_stop: float = 0.0
    steps: int = 0
    mode: str = NOISELESS


def _binary(codes):
    return np.array([thermometer_to_binary(c)[0] for c in codes])


def measure_transfer(adc, i_start, i_stop, steps, rtol=1e-13):
    """Ramp the static converter and locate the 7 code transitions.

    Noiseless: each transition is bracketed on the ramp and then bisected on
    ``binary >= k + 1`` to ``rtol``.  With thermal noise the code-density
    estimate is used instead (threshold k = start + step * #samples with code <= k).
    """
    if not i_stop > i_start:
        raise InvalidConfig("i_stop must exceed i_start")
    if steps < MIN_STEPS_PER_CODE * (N_LEVELS + 1):
        raise InvalidConfig(f"need at least {MIN_STEPS_PER_CODE} ramp steps per code bin "
                            f"({MIN_STEPS_PER_CODE * (N_LEVELS + 1)} total)")
    ramp = np.linspace(i_start, i_stop, steps)
    codes = _binary(adc.convert_static(ramp))
    lsb = (i_stop - i_start) / (N_LEVELS + 1)
    if adc.noisy:
        step = ramp[1] - ramp[0]
        thr = [float(i_start + step * np.count_nonzero(codes <= k)) for k in range(N_LEVELS)]
        return TransferCurve(thr, lsb, i_start, i_stop, steps, THERMAL)

    drops = np.nonzero(np.diff(codes) < 0)[0]
    if drops.size:
        j = drops[0]
        raise NonMonotonicTransfer(
            int(codes[j]), f"code fell from {codes[j]} to {codes[j + 1]} at {ramp[j + 1]:.6e} A")
    if codes[-1] == codes[0]:
        raise TransferError(f"no transitions found between {i_start:.3e} and {i_stop:.3e} A")
    missing = [k for k in range(N_LEVELS) if not (codes[0] <= k < codes[-1])]
    if missing:
        raise TransferError(f"transitions {missing} lie outside the ramp")

    lo = np.array([ramp[np.nonzero(codes <= k)[0][-1]] for k in range(N_LEVELS)])
    hi = np.array([ramp[np.nonzero(codes >= k + 1)[0][0]] for k in range(N_LEVELS)])
    levels = np.arange(N_LEVELS) + 1
    while np.any(hi - lo > rtol * np.abs(hi)):
        mid = 0.5 * (lo + hi)
        up = _binary(adc.convert_static(mid)) >= levels
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return TransferCurve([float(x) for x in hi], lsb, i_start, i_stop, steps, NOISELESS)


@dataclass
class DnlInlReport(_JsonReport):
    dnl: list
    inl: list
    dnl_range: list
    inl_range: list
    lsb: float
    mode: str = NOISELESS
    checks: dict = field(default_factory=dict)


def dnl_inl(curve):
    """DNL between adjacent thresholds and INL against the endpoint-fit line, in LSB."""
    t = np.asarray(curve.thresholds, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise TransferError("thresholds must be strictly increasing")
    lsb = curve.lsb
    dnl = np.diff(t) / lsb - 1.0
    ideal = t[0] + (t[-1] - t[0]) * np.arange(t.size) / (t.size - 1)
    inl = (t - ideal) / lsb
    telescope = abs(dnl.sum() - ((t[-1] - t[0]) / lsb - (t.size - 1)))
    return DnlInlReport(
        dnl=[float(x) for x in dnl], inl=[float(x) for x in inl],
        dnl_range=[float(dnl.min()), float(dnl.max())],
        inl_range=[float(inl.min()), float(inl.max())],
        lsb=float(lsb), mode=curve.mode,
        checks={"dnl_telescoping": bool(telescope <= 1e-9)})


@dataclass
class MonteCarloReport(_JsonReport):
    trials: int
    errors: int
    error_rate: float
    seed: int
    ci_low: float
    ci_high: float
    i_sot: float = 0.0
    v_bias: float = 0.0
    temperature: float = 0.0
    reference_switched: bool = False
    outcomes: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)


def wilson_interval(errors, trials, confidence=0.95):
    ci = binomtest(errors, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def trial_rngs(seed, trials):
    return [np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
            for i in range(trials)]


def monte_carlo_switching(dev, i_sot, v_bias=0.0, trials=100, seed=0, temperature=None,
                          protocol=SwitchProtocol(), cfg=IntegratorConfig(), jobs=1):
    """Seeded noisy switch attempts; an error is a ``switched`` flag that differs
    from the noiseless attempt under the same drive.

    ``temperature=None`` means the device's T0; 0 K disables the thermal field.
    """
    if trials < 1:
        raise InvalidConfig("trials must be >= 1")
    ref = switch_attempt(dev, i_sot, v_bias, protocol, NO_THERMAL, cfg=cfg)
    temp = dev.t0 if temperature is None else float(temperature)
    thermal = ThermalModel(enabled=temp > 0, temperature=temp)
    rngs = trial_rngs(seed, trials) if thermal.active(dev) else None
    outs = switch_batch([dev] * trials, i_sot, v_bias, protocol, thermal, rngs, cfg, jobs=jobs)
    errors = sum(o.switched != ref.switched for o in outs)
    lo, hi = wilson_interval(errors, trials)
    states = [o.final_state for o in outs]
    return MonteCarloReport(
        trials=trials, errors=int(errors), error_rate=errors / trials, seed=int(seed),
        ci_low=lo, ci_high=hi, i_sot=float(i_sot), v_bias=float(v_bias), temperature=temp,
        reference_switched=bool(ref.switched),
        outcomes={s: states.count(s) for s in sorted(set(states))},
        checks={"errors_le_trials": errors <= trials})


@dataclass
class ThroughputSummary(_JsonReport):
    samples: int
    throughput: float
    mean_period: float
    average_power: float
    total_energy: float
    energy_per_sample: float


def throughput_and_power(records):
    if len(records) < 2:
        raise InvalidConfig("throughput needs at least 2 records")
    span = records[-1].t_start - records[0].t_start
    energy = sum(r.energy for r in records)
    period = sum(r.period for r in records)
    return ThroughputSummary(
        samples=len(records), throughput=(len(records) - 1) / span,
        mean_period=period / len(records), average_power=energy / period,
        total_energy=energy, energy_per_sample=energy / len(records))
