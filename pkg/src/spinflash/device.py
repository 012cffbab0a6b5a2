"""Compact model of a perpendicular SOT-MTJ.

Bias dependent material parameters, critical current, barrier height and
resistance.  Switching dynamics live in :mod:`spinflash.switching`.

State convention: the reference layer points along -z, so the parallel (P)
state is m_z = -1 and the antiparallel (AP) state is m_z = +1.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import GAMMA, HBAR, KB, MU0, Q, oe_to_a_per_m
from .errors import AboveCurie, InvalidConfig

REFERENCE_DIRECTION = np.array([0.0, 0.0, -1.0])
# spin polarization injected by a positive heavy-metal current along +x
SOT_POLARIZATION = np.array([0.0, -1.0, 0.0])

# Frozen calibrations, reproduced by the calibrate_* functions (see tests).
DEFAULT_ETA_FIT = 20628.52321842668
DEFAULT_K_HEAT = 215.16790926669825
DEFAULT_THETA_SH = 0.30643548422650024


@dataclass(frozen=True)
class DeviceConfig:
    """Geometry and material parameters of one SOT-MTJ, SI units throughout.

    ``eta_fit`` is the fitting factor of the analytic critical current,
    ``xi_bloch``/``eta_bloch`` the exponents of the bias-heating laws for Ms
    and Ki, ``k_heat`` the Joule heating coefficient (K/V^2).  ``rho_hm`` and
    ``l_hm`` (heavy-metal resistivity and strip length) only feed the energy
    accounting.
    """

    t_fl: float = 1.1e-9
    t_ox: float = 1.4e-9
    t_hm: float = 3e-9
    w_hm: float = 50e-9
    diameter: float = 50e-9
    ms0: float = 6.25e5
    ki0: float = 3.2e-4
    alpha: float = 0.05
    xi_vcma: float = 60e-15
    t0: float = 300.0
    tc: float = 750.0
    k_heat: float = DEFAULT_K_HEAT
    eta_fit: float = DEFAULT_ETA_FIT
    xi_bloch: float = 1.5
    eta_bloch: float = 2.2
    theta_sh: float = DEFAULT_THETA_SH
    eta_stt: float = 0.6
    tmr0: float = 1.75
    r_p: float = 2e3
    h_inplane: float = oe_to_a_per_m(-40.0)
    rho_hm: float = 2.0e-6
    l_hm: float = 1.0e-6

    def __post_init__(self):
        positive = ("t_fl", "t_ox", "t_hm", "w_hm", "diameter", "ms0", "ki0",
                    "tc", "xi_vcma", "eta_fit", "xi_bloch", "eta_bloch",
                    "r_p", "rho_hm", "l_hm")
        for name in positive:
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidConfig(f"{name} must be a positive number, got {value!r}")
        for name in ("alpha", "t0", "k_heat", "theta_sh", "eta_stt", "tmr0"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
                raise InvalidConfig(f"{name} must be a non-negative number, got {value!r}")
        if not math.isfinite(self.h_inplane):
            raise InvalidConfig("h_inplane must be finite")
        if self.t0 >= self.tc:
            raise InvalidConfig(f"t0 ({self.t0} K) must be below tc ({self.tc} K)")

    @property
    def area(self):
        return math.pi * self.diameter ** 2 / 4

    @property
    def volume(self):
        return self.area * self.t_fl

    @property
    def r_ap(self):
        return self.r_p * (1 + self.tmr0)

    @property
    def r_hm(self):
        """Heavy-metal strip resistance seen by the SOT current."""
        return self.rho_hm * self.l_hm / (self.w_hm * self.t_hm)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def effective_temperature(dev, v_b):
    """Device temperature under bias, T0 + k_heat * V_b^2."""
    return dev.t0 + dev.k_heat * v_b * v_b


def _bloch_factor(dev, v_b):
    t_eff = effective_temperature(dev, v_b)
    if t_eff >= dev.tc:
        raise AboveCurie(f"bias {v_b} V heats the free layer to {t_eff:.1f} K >= Tc = {dev.tc} K")
    return 1.0 - (t_eff / dev.tc) ** dev.xi_bloch


def ms_of_bias(dev, v_b):
    """Saturation magnetization (A/m) at MTJ bias ``v_b``."""
    return dev.ms0 * _bloch_factor(dev, v_b)


def ki_of_bias(dev, v_b):
    """Interfacial anisotropy (J/m^2) at bias, heating only (no VCMA term)."""
    return dev.ki0 * _bloch_factor(dev, v_b) ** dev.eta_bloch


def ki_effective(dev, v_b):
    """Interfacial anisotropy including the linear VCMA reduction."""
    return ki_of_bias(dev, v_b) - dev.xi_vcma * v_b / dev.t_ox


def anisotropy_fields(dev, v_b):
    """Split the uniaxial coefficient into (PMA, VCMA) parts, both in A/m per unit m_z."""
    ms = ms_of_bias(dev, v_b)
    scale = 2.0 / (MU0 * ms * dev.t_fl)
    return scale * ki_of_bias(dev, v_b), -scale * dev.xi_vcma * v_b / dev.t_ox


def effective_anisotropy_field(dev, v_b):
    """H_k,eff = uniaxial coefficient minus thin-film demag; negative means in-plane."""
    h_pma, h_vcma = anisotropy_fields(dev, v_b)
    return h_pma + h_vcma - ms_of_bias(dev, v_b)


def barrier_of_bias(dev, v_b, temperature=None):
    """Energy barrier in units of k_B*T.

    E_b(0) is taken as Ki0 * A (the demagnetizing correction is left out),
    and the VCMA term lowers it linearly: E_b(V) = E_b(0) - xi*A*V/t_ox.
    """
    if dev.t_ox <= 0:
        raise InvalidConfig("t_ox must be positive")
    temperature = dev.t0 if temperature is None else temperature
    e_b = dev.ki0 * dev.area - dev.xi_vcma * dev.area * v_b / dev.t_ox
    return e_b / (KB * temperature)


def critical_current(dev, v_b=0.0, w_hm=None):
    """Analytic SOT critical current (A); linear in heavy-metal width."""
    w = dev.w_hm if w_hm is None else w_hm
    ms = ms_of_bias(dev, v_b)
    ki = ki_of_bias(dev, v_b)
    return Q * MU0 * dev.t_fl * ms * ki * dev.t_hm * w / (HBAR * dev.xi_vcma * dev.eta_fit)


def resistance(dev, m, v_b=0.0):
    """MTJ resistance from the conductance interpolation between P and AP.

    ``v_b`` is accepted for interface symmetry; the junction is ohmic here.
    """
    m = np.asarray(m, dtype=float)
    cos_theta = m @ REFERENCE_DIRECTION
    g_p = 1.0 / dev.r_p
    g_ap = 1.0 / dev.r_ap
    return 1.0 / (g_p * (1 + cos_theta) / 2 + g_ap * (1 - cos_theta) / 2)


def sot_field(dev, i_sot, v_b=0.0):
    """Damping-like SOT amplitude (A/m) for heavy-metal current ``i_sot``."""
    j_hm = i_sot / (dev.w_hm * dev.t_hm)
    return HBAR * dev.theta_sh * j_hm / (2 * Q * MU0 * ms_of_bias(dev, v_b) * dev.t_fl)


def stt_field(dev, i_stt, v_b=0.0):
    """Damping-like STT amplitude (A/m) for MTJ current ``i_stt``."""
    j_mtj = i_stt / dev.area
    return HBAR * dev.eta_stt * j_mtj / (2 * Q * MU0 * ms_of_bias(dev, v_b) * dev.t_fl)


def thermal_sigma(dev, temperature, dt, v_b=0.0):
    """Per-component std of the thermal field (A/m) held over a step ``dt``.

    Fluctuation-dissipation: sigma^2 = 2*alpha*k_B*T / (gamma*mu0*Ms*V*dt),
    with gamma the table value in m/(A*s) (mu0 already folded in).
    """
    if temperature <= 0:
        return 0.0
    ms = ms_of_bias(dev, v_b)
    return math.sqrt(2 * dev.alpha * KB * temperature / (GAMMA * MU0 * ms * dev.volume * dt))


def peak_thermal_field(dev, v_b, dt=1e-12):
    """3-sigma per-component thermal field (A/m) at bias-heated temperature."""
    return 3.0 * thermal_sigma(dev, effective_temperature(dev, v_b), dt, v_b)


def calibrate_eta_fit(dev, i_target=20e-6, w_hm=None):
    """Fitting factor that makes critical_current(dev, 0, w_hm) equal ``i_target``."""
    w = dev.w_hm if w_hm is None else w_hm
    scaled = critical_current(dev.replace(eta_fit=1.0), 0.0, w)
    return scaled / i_target


def calibrate_k_heat(dev, h_peak=oe_to_a_per_m(2500.0), v_b=1.0, dt=1e-12):
    """Heating coefficient giving a 3-sigma thermal field of ``h_peak`` at ``v_b``."""

    def excess(k):
        return peak_thermal_field(dev.replace(k_heat=k), v_b, dt) - h_peak

    k_max = (dev.tc - dev.t0) / (v_b * v_b) * (1 - 1e-9)
    if excess(0.0) > 0:
        raise InvalidConfig("target peak field is below the unheated value")
    return brentq(excess, 0.0, k_max, xtol=1e-12, rtol=1e-15)
