"""Physical constants, using the rounded values of the device parameter table."""

import math

GAMMA = 2.2127e5  # gyromagnetic ratio times mu0, m/(A*s)
MU0 = 1.2566e-6  # H/m
KB = 1.38e-23  # J/K
Q = 1.6e-19  # C
HBAR = 1.054e-34  # J*s

OE_TO_A_PER_M = 1e3 / (4 * math.pi)


def oe_to_a_per_m(oe):
    return oe * OE_TO_A_PER_M


def a_per_m_to_oe(h):
    return h / OE_TO_A_PER_M
