"""Stochastic Landau-Lifshitz-Gilbert integration for a single macrospin.

Vectors are plain ``numpy`` arrays of shape ``(3,)``.  Fields and torques are
carried in A/m; with the table gyromagnetic ratio (m/(A*s)) the equation of
motion reads

    dm/dt = -gamma m x H_eff + alpha m x dm/dt - gamma tau

with the damping-like torques ``tau = a m x (m x s)``, which turn m towards
``s``.  :func:`llg_rhs` is the explicit form of the same equation; the
compiled kernel in :mod:`spinflash._kernel` evaluates identical arithmetic.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from . import _kernel
from .constants import GAMMA
from .device import (REFERENCE_DIRECTION, SOT_POLARIZATION, anisotropy_fields,
                     effective_temperature, ms_of_bias, sot_field, stt_field,
                     thermal_sigma)
from .errors import InstabilityDetected, InvalidConfig
from .waveform import DriveWaveform

MAX_DT = 2e-12
SCHEMES = ("rk4", "heun")


@dataclass
class EffectiveField:
    h_pma: np.ndarray
    h_vcma: np.ndarray
    h_demag: np.ndarray
    h_inplane: np.ndarray
    h_thermal: np.ndarray

    @property
    def total(self):
        return self.h_pma + self.h_vcma + self.h_demag + self.h_inplane + self.h_thermal


@dataclass
class TorqueTerms:
    tau_stt: np.ndarray
    tau_sot: np.ndarray

    @property
    def total(self):
        return self.tau_stt + self.tau_sot


@dataclass
class MagnetizationState:
    """Free-layer direction, clock and the trajectory's own random stream."""

    m: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -1.0]))
    t: float = 0.0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float).copy()


@dataclass(frozen=True)
class IntegratorConfig:
    """``scheme=None`` picks RK4 without thermal noise and Heun with it."""

    dt: float = 1e-12
    scheme: str | None = None
    renormalize: bool = True
    record_stride: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and self.dt <= MAX_DT):
            raise InvalidConfig(f"dt must be in (0, {MAX_DT}] s, got {self.dt}")
        if self.scheme is not None and self.scheme not in SCHEMES:
            raise InvalidConfig(f"scheme must be one of {SCHEMES} or None")
        if self.record_stride < 1:
            raise InvalidConfig("record_stride must be >= 1")


@dataclass(frozen=True)
class ThermalModel:
    """Thermal fluctuation field settings.

    ``temperature=None`` means the device's T0.  With ``bias_heating`` the
    noise temperature rises by k_heat * V_b^2, like the material parameters.
    """

    enabled: bool = False
    temperature: float | None = None
    bias_heating: bool = True

    def noise_temperature(self, dev, v_b):
        if not self.enabled:
            return 0.0
        base = dev.t0 if self.temperature is None else self.temperature
        if base <= 0:
            return 0.0
        if self.bias_heating:
            return base + (effective_temperature(dev, v_b) - dev.t0)
        return base

    def active(self, dev):
        return self.noise_temperature(dev, 0.0) > 0


NO_THERMAL = ThermalModel(enabled=False)


@dataclass
class Trajectory:
    t: np.ndarray
    m: np.ndarray
    last_crossing: float | None = None
    max_norm_drift: float = 0.0

    def to_csv(self, path):
        data = np.column_stack([self.t, self.m])
        np.savetxt(path, data, delimiter=",", header="t_s,mx,my,mz", comments="",
                   fmt="%.12e")


def _check_device(dev):
    for name in ("t_fl", "t_ox", "t_hm", "ms0"):
        if getattr(dev, name) <= 0:
            raise InvalidConfig(f"{name} must be positive")


def sample_thermal_field(dev, temperature, dt, rng, v_b=0.0):
    """Draw one thermal field vector (A/m), held constant over a step ``dt``."""
    if dt <= 0:
        raise InvalidConfig("dt must be positive")
    if temperature <= 0:
        return np.zeros(3)
    return thermal_sigma(dev, temperature, dt, v_b) * rng.standard_normal(3)


def assemble_effective_field(state, dev, drive, thermal=NO_THERMAL, dt=1e-12):
    """Five labelled contributions to H_eff at ``state.m`` under ``drive``.

    PMA and VCMA share one uniaxial term, 2*Ki_eff/(mu0*Ms*t_FL) m_z, split
    into its heating-only part and the linear VCMA reduction.
    """
    _check_device(dev)
    m = state.m
    z = np.array([0.0, 0.0, 1.0])
    h_pma, h_vcma = anisotropy_fields(dev, drive.v_bias)
    temperature = thermal.noise_temperature(dev, drive.v_bias)
    return EffectiveField(
        h_pma=h_pma * m[2] * z,
        h_vcma=h_vcma * m[2] * z,
        h_demag=-ms_of_bias(dev, drive.v_bias) * m[2] * z,
        h_inplane=np.array([dev.h_inplane, 0.0, 0.0]),
        h_thermal=sample_thermal_field(dev, temperature, dt, state.rng, drive.v_bias),
    )


def compute_torques(state, dev, drive):
    m = state.m
    a_sot = sot_field(dev, drive.i_sot, drive.v_bias)
    a_stt = stt_field(dev, drive.i_stt, drive.v_bias)
    # positive STT current drives m away from the reference layer
    return TorqueTerms(
        tau_stt=a_stt * np.cross(m, np.cross(m, -REFERENCE_DIRECTION)),
        tau_sot=a_sot * np.cross(m, np.cross(m, SOT_POLARIZATION)),
    )


def llg_rhs(m, h_eff, tau, alpha, gamma=GAMMA):
    """dm/dt from the implicit Gilbert form solved for dm/dt.

    ``h_eff`` and ``tau`` may be arrays or the dataclasses above.
    """
    h = h_eff.total if isinstance(h_eff, EffectiveField) else np.asarray(h_eff)
    t = tau.total if isinstance(tau, TorqueTerms) else np.asarray(tau)
    a = -gamma * np.cross(m, h) - gamma * t
    return (a + alpha * np.cross(m, a)) / (1 + alpha * alpha)


def segment_coefficients(dev, drive, thermal, dt, gain=1.0):
    """Kernel coefficient row for a constant drive (see ``_kernel.C_*``)."""
    h_pma, h_vcma = anisotropy_fields(dev, drive.v_bias)
    row = np.zeros(_kernel.N_COEF)
    row[_kernel.C_HK] = h_pma + h_vcma
    row[_kernel.C_MS] = ms_of_bias(dev, drive.v_bias)
    row[_kernel.C_HX] = dev.h_inplane
    row[_kernel.C_ASOT] = sot_field(dev, gain * drive.i_sot, drive.v_bias)
    row[_kernel.C_ASTT] = stt_field(dev, drive.i_stt, drive.v_bias)
    temperature = thermal.noise_temperature(dev, drive.v_bias)
    row[_kernel.C_SIGMA] = thermal_sigma(dev, temperature, dt, drive.v_bias)
    return row


def _coefficient_table(dev, waveform, thermal, dt, gain):
    rows = [segment_coefficients(dev, seg.sample, thermal, dt, gain) for seg in waveform.segments]
    rows.append(segment_coefficients(dev, waveform.at(math.inf), thermal, dt, gain))
    return np.array(rows)


@dataclass
class BatchResult:
    final: np.ndarray
    last_crossing: np.ndarray
    max_norm_drift: np.ndarray
    t: np.ndarray | None = None
    traj: np.ndarray | None = None


def _n_steps(t0, t_end, dt):
    span = t_end - t0
    if not span > 0:
        raise InvalidConfig(f"t_end ({t_end}) must be after the start time ({t0})")
    return max(1, int(round(span / dt)))


def run_batch(devices, waveforms, m0, cfg, t0=0.0, t_end=None, thermal=NO_THERMAL,
              rngs=None, gains=None, record=False, jobs=1):
    """Integrate N independent macrospins that share one time grid.

    ``waveforms`` must all have identical segment timing.  ``rngs`` supplies
    one generator per trajectory when thermal noise is active; each stream is
    consumed in step order, so results do not depend on ``jobs``.
    """
    n = len(devices)
    if len(waveforms) != n:
        raise InvalidConfig("one waveform per device is required")
    m0 = np.array(m0, dtype=float).reshape(n, 3)
    gains = np.ones(n) if gains is None else np.asarray(gains, dtype=float)
    ref = waveforms[0]
    for w in waveforms[1:]:
        if not ref.same_timing(w):
            raise InvalidConfig("batched waveforms must share segment timing")
    t_end = ref.t_end if t_end is None else t_end
    n_steps = _n_steps(t0, t_end, cfg.dt)

    noisy = any(thermal.active(d) for d in devices)
    scheme = cfg.scheme or ("heun" if noisy else "rk4")
    if noisy and rngs is None:
        raise InvalidConfig("thermal noise needs one random generator per trajectory")

    coef = np.stack([_coefficient_table(d, w, thermal, cfg.dt, g)
                     for d, w, g in zip(devices, waveforms, gains)])
    t_mid = t0 + (np.arange(n_steps) + 0.5) * cfg.dt
    seg_of_step = ref.segment_index(t_mid)
    alpha = np.array([d.alpha for d in devices], dtype=float)
    stride = cfg.record_stride if record else 0
    n_rec = n_steps // stride + 1 if record else 0

    final = np.empty((n, 3))
    cross = np.empty(n)
    drift = np.empty(n)
    status = np.empty((n, 2), dtype=np.int64)
    traj = np.empty((n, n_rec, 3))
    scheme_id = _kernel.SCHEME_HEUN if scheme == "heun" else _kernel.SCHEME_RK4

    def work(lo, hi):
        if noisy:
            noise = np.stack([rngs[j].standard_normal((n_steps, 3)) for j in range(lo, hi)])
        else:
            noise = np.empty((hi - lo, 0, 3))
        _kernel.integrate_batch(
            m0[lo:hi], coef[lo:hi], seg_of_step, t0, cfg.dt, noise, scheme_id,
            SOT_POLARIZATION, REFERENCE_DIRECTION, alpha[lo:hi], GAMMA,
            cfg.renormalize, stride, traj[lo:hi], final[lo:hi], cross[lo:hi],
            drift[lo:hi], status[lo:hi])

    chunk = 64
    bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    if jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda b: work(*b), bounds))
    else:
        for b in bounds:
            work(*b)

    bad = np.nonzero(status[:, 0] != _kernel.STATUS_OK)[0]
    if bad.size:
        j = bad[0]
        raise InstabilityDetected(
            f"trajectory {j}: |m| drifted by more than {_kernel.MAX_NORM_DRIFT} "
            f"at step {status[j, 1]} (dt={cfg.dt})")
    result = BatchResult(final=final, last_crossing=cross, max_norm_drift=drift)
    if record:
        result.t = t0 + cfg.dt * stride * np.arange(n_rec)
        result.traj = traj
    return result


def integrate(state, dev, waveform, cfg=IntegratorConfig(), t_end=None, thermal=NO_THERMAL):
    """Integrate one trajectory from ``state`` to ``t_end``; ``state`` is advanced in place."""
    t_end = waveform.t_end if t_end is None else t_end
    if not t_end > state.t:
        raise InvalidConfig("t_end must be after state.t")
    if not isinstance(waveform, DriveWaveform):
        raise InvalidConfig("waveform must be a DriveWaveform")
    res = run_batch([dev], [waveform], state.m[None, :], cfg, t0=state.t, t_end=t_end,
                    thermal=thermal, rngs=[state.rng], record=True)
    state.m = res.final[0].copy()
    state.t = state.t + _n_steps(state.t, t_end, cfg.dt) * cfg.dt
    cross = res.last_crossing[0]
    return Trajectory(t=res.t, m=res.traj[0], last_crossing=None if np.isnan(cross) else float(cross),
                      max_norm_drift=float(res.max_norm_drift[0]))
