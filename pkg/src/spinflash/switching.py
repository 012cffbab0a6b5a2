"""Switch and reset pulse protocols for one SOT-MTJ, built on the LLG engine."""

from dataclasses import dataclass, field
import math

import numpy as np

from .device import (REFERENCE_DIRECTION, critical_current, effective_anisotropy_field,
                     resistance)
from .errors import InvalidConfig, ResetFailed
from .llg import NO_THERMAL, IntegratorConfig, Trajectory, run_batch
from .waveform import DriveWaveform, Segment

P, AP, PRECESSIONAL = "P", "AP", "precessional"
SETTLED_MZ = 0.9


@dataclass(frozen=True)
class SwitchProtocol:
    """Conversion pulse: SOT on [0, sot_duration), MTJ bias over the whole
    window, STT assist (positive = towards AP) during the last ``stt_duration``."""

    window: float = 2.28e-9
    sot_duration: float = 1.3e-9
    stt_duration: float = 0.5e-9
    i_stt: float = 95e-6

    def __post_init__(self):
        if not self.window > 0:
            raise InvalidConfig("protocol window must be positive")
        if not 0 < self.sot_duration <= self.window:
            raise InvalidConfig("sot_duration must lie inside the window")
        if not 0 <= self.stt_duration <= self.window:
            raise InvalidConfig("stt_duration must lie inside the window")

    def waveform(self, i_sot, v_bias=0.0):
        return _pulse_waveform(self.window, self.sot_duration, i_sot,
                               self.stt_duration, self.i_stt, v_bias)


@dataclass(frozen=True)
class ResetProtocol:
    """Reverse SOT pulse of ``current_factor`` times Ic(0), plus a weak P-ward STT assist.

    ``settle`` extends the simulated window with zero drive, for studies of
    the relaxed end state; the pipeline uses ``settle = 0``.
    """

    window: float = 1.72e-9
    sot_duration: float = 1.1e-9
    current_factor: float = 1.5
    stt_duration: float = 0.5e-9
    i_stt: float = 95e-6
    settle: float = 0.0

    def __post_init__(self):
        if not 0 < self.sot_duration <= self.window:
            raise InvalidConfig("reset sot_duration must lie inside the window")
        if not 0 <= self.stt_duration <= self.window:
            raise InvalidConfig("reset stt_duration must lie inside the window")
        if self.current_factor < 0 or self.settle < 0:
            raise InvalidConfig("reset current_factor and settle must be non-negative")

    def current(self, dev):
        return -self.current_factor * critical_current(dev, 0.0)

    def waveform(self, dev):
        return _pulse_waveform(self.window, self.sot_duration, self.current(dev),
                               self.stt_duration, -self.i_stt, 0.0)

    @property
    def t_end(self):
        return self.window + self.settle


def _pulse_waveform(window, t_sot, i_sot, t_stt, i_stt, v_bias):
    t_stt_on = window - t_stt
    edges = sorted({0.0, t_sot, t_stt_on, window})
    segs = []
    for a, b in zip(edges, edges[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        segs.append(Segment(a, b,
                            i_sot=i_sot if mid < t_sot else 0.0,
                            v_bias=v_bias,
                            i_stt=i_stt if mid >= t_stt_on else 0.0))
    return DriveWaveform(tuple(segs))


def single_switch_waveform(i_sot=40e-6, v_bias=0.0, t_on=0.7e-9, sot_duration=1.3e-9,
                           stt_duration=0.5e-9, i_stt=95e-6, t_end=5e-9):
    """Single-switch timeline: idle, SOT pulse from ``t_on``, STT assist, then relaxation."""
    t_off = t_on + sot_duration
    segs = [Segment(t_on, t_off, i_sot=i_sot, v_bias=v_bias)]
    if stt_duration > 0:
        segs.append(Segment(t_off, t_off + stt_duration, v_bias=v_bias, i_stt=i_stt))
    t_last = segs[-1].t_end
    if t_end > t_last:
        segs.append(Segment(t_last, t_end))
    return DriveWaveform(tuple(segs))


def equilibrium(dev, state=P, v_b=0.0):
    """Relaxed direction in the given state under the constant in-plane field.

    Stoner-Wohlfarth with the field along the hard axis: m_x = H_x / H_k,eff.
    """
    hk = effective_anisotropy_field(dev, v_b)
    if hk <= abs(dev.h_inplane):
        raise InvalidConfig("no perpendicular equilibrium at this bias")
    mx = dev.h_inplane / hk
    mz = math.sqrt(1.0 - mx * mx)
    return np.array([mx, 0.0, -mz if state == P else mz])


def classify(mz):
    if mz <= -SETTLED_MZ:
        return P
    if mz >= SETTLED_MZ:
        return AP
    return PRECESSIONAL


@dataclass
class SwitchOutcome:
    switched: bool
    switch_time: float | None
    final_state: str
    final_m: np.ndarray
    energy: float = 0.0
    trajectory: Trajectory | None = None
    max_norm_drift: float = 0.0


def pulse_energy(dev, waveform, m_ref=None):
    """Conduction energy (J) of a drive waveform.

    SOT: I^2 R_HM t.  STT and bias: dissipated in the MTJ, evaluated at the
    resistance of ``m_ref`` (default: in-plane, the midpoint of a switch).
    """
    m_ref = np.array([1.0, 0.0, 0.0]) if m_ref is None else m_ref
    r_mtj = resistance(dev, m_ref)
    e = 0.0
    for seg in waveform.segments:
        t = seg.duration
        e += seg.i_sot ** 2 * dev.r_hm * t
        e += seg.i_stt ** 2 * r_mtj * t
        e += seg.v_bias ** 2 / r_mtj * t
    return e


def _outcomes(devices, m0, res, energies, record):
    out = []
    for j in range(len(devices)):
        mz0 = m0[j] @ -REFERENCE_DIRECTION
        mz = res.final[j] @ -REFERENCE_DIRECTION
        cross = res.last_crossing[j]
        traj = None
        if record:
            traj = Trajectory(t=res.t, m=res.traj[j],
                              last_crossing=None if np.isnan(cross) else float(cross),
                              max_norm_drift=float(res.max_norm_drift[j]))
        out.append(SwitchOutcome(
            switched=bool(np.sign(mz) != np.sign(mz0) and abs(mz) > SETTLED_MZ),
            switch_time=None if np.isnan(cross) else float(cross),
            final_state=classify(mz),
            final_m=res.final[j].copy(),
            energy=energies[j],
            trajectory=traj,
            max_norm_drift=float(res.max_norm_drift[j]),
        ))
    return out


def switch_batch(devices, i_sots, v_bias=0.0, protocol=SwitchProtocol(), thermal=NO_THERMAL,
                 rngs=None, cfg=IntegratorConfig(), m0=None, record=False, jobs=1):
    """Independent switch attempts, one per device, sharing the protocol timing."""
    n = len(devices)
    i_sots = np.broadcast_to(np.asarray(i_sots, dtype=float), (n,))
    if m0 is None:
        m0 = np.array([equilibrium(d) for d in devices])
    m0 = np.asarray(m0, dtype=float).reshape(n, 3)
    waves = [protocol.waveform(i, v_bias) for i in i_sots]
    res = run_batch(devices, waves, m0, cfg, t0=0.0, t_end=protocol.window,
                    thermal=thermal, rngs=rngs, record=record, jobs=jobs)
    energies = [pulse_energy(d, w) for d, w in zip(devices, waves)]
    return _outcomes(devices, m0, res, energies, record)


def switch_attempt(dev, i_sot, v_bias=0.0, protocol=SwitchProtocol(), thermal=NO_THERMAL,
                   rng=None, cfg=IntegratorConfig(), m0=None, record=False):
    """One conversion pulse on a device that starts in P (or at ``m0``)."""
    if not math.isfinite(i_sot):
        raise InvalidConfig("i_sot must be finite")
    if rng is None:
        rng = np.random.default_rng(0)
    return switch_batch([dev], [i_sot], v_bias, protocol, thermal, [rng], cfg,
                        None if m0 is None else [m0], record)[0]


def reset_batch(devices, m0, protocol=ResetProtocol(), thermal=NO_THERMAL, rngs=None,
                cfg=IntegratorConfig(), record=False, jobs=1, strict=True):
    """Reverse pulses on every device not already P; P devices are left untouched.

    With ``strict`` a device that does not end in P raises ResetFailed.
    """
    m0 = np.asarray(m0, dtype=float).reshape(len(devices), 3)
    outcomes = [None] * len(devices)
    pending = []
    for j, m in enumerate(m0):
        if classify(m @ -REFERENCE_DIRECTION) == P:
            outcomes[j] = SwitchOutcome(switched=False, switch_time=None, final_state=P,
                                        final_m=m.copy())
        else:
            pending.append(j)
    if pending:
        devs = [devices[j] for j in pending]
        waves = [protocol.waveform(d) for d in devs]
        sub_rngs = None if rngs is None else [rngs[j] for j in pending]
        res = run_batch(devs, waves, m0[pending], cfg, t0=0.0, t_end=protocol.t_end,
                        thermal=thermal, rngs=sub_rngs, record=record, jobs=jobs)
        energies = [pulse_energy(d, w) for d, w in zip(devs, waves)]
        for j, o in zip(pending, _outcomes(devs, m0[pending], res, energies, record)):
            o.switched = o.final_state == P
            outcomes[j] = o
    if strict:
        for j, o in enumerate(outcomes):
            if o.final_state != P:
                raise ResetFailed(f"device {j} ended {o.final_state} "
                                  f"(m_z = {o.final_m[2]:+.3f}) after the reset pulse")
    return outcomes


def reset_device(dev, protocol=ResetProtocol(), m0=None, thermal=NO_THERMAL, rng=None,
                 cfg=IntegratorConfig(), record=False):
    """Return an AP device to P; a device already in P is a no-op."""
    m0 = equilibrium(dev, AP) if m0 is None else m0
    rngs = None if rng is None else [rng]
    return reset_batch([dev], [m0], protocol, thermal, rngs, cfg, record)[0]
