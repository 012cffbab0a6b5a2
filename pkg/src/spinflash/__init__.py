"""Macrospin simulator of a 3-bit spintronic flash ADC built from SOT-MTJ quantizers."""

from .adc import (ComparatorModel, ConversionRecord, FlashADC, PhaseSchedule, QuantizerBank,
                  ThermometerCode, design_widths, quantize, run_conventional, run_interleaved,
                  sense, thermometer_to_binary)
from .device import DeviceConfig, barrier_of_bias, critical_current, ki_of_bias, ms_of_bias, resistance
from .llg import IntegratorConfig, MagnetizationState, ThermalModel, integrate
from .metrics import dnl_inl, measure_transfer, monte_carlo_switching, throughput_and_power
from .switching import SwitchOutcome, SwitchProtocol, ResetProtocol, reset_device, switch_attempt

__version__ = "0.1.0"
