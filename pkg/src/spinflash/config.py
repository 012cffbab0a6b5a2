"""Run configuration: devices, bank design, timing, integrator and noise, from JSON or TOML."""

from dataclasses import asdict, dataclass, field, fields
import json
import os
from pathlib import Path

import tomli

from .adc import ComparatorModel, FlashADC, PhaseSchedule, design_widths, mismatched_widths
from .device import DeviceConfig
from .errors import ConfigError, SpinAdcError
from .llg import IntegratorConfig, ThermalModel
from .switching import ResetProtocol, SwitchProtocol

SEED_ENV = "SPINADC_SEED"


@dataclass
class BankDesign:
    i_min: float = 20e-6
    i_max: float = 140e-6
    mismatch_sigma: float = 0.0
    mismatch_seed: int = 1


@dataclass
class ScheduleConfig:
    t_convert: float = 2.28e-9
    t_sense: float = 1.0e-9
    t_reset: float = 1.72e-9


@dataclass
class ThermalConfig:
    enabled: bool = False
    temperature: float | None = None
    bias_heating: bool = True


@dataclass
class IntegratorSettings:
    dt: float = 1e-12
    scheme: str | None = None
    renormalize: bool = True
    record_stride: int = 1


@dataclass
class RunConfig:
    device: dict = field(default_factory=dict)
    bank: BankDesign = field(default_factory=BankDesign)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    protocol: dict = field(default_factory=dict)
    reset: dict = field(default_factory=dict)
    comparator: dict = field(default_factory=dict)
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    thermal: ThermalConfig = field(default_factory=ThermalConfig)
    v_bias: float = 0.0
    seed: int = 0
    out_dir: str = "runs"

    def to_dict(self):
        return _drop_none(asdict(self))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    # builders for the simulation objects
    def device_config(self):
        return _build(DeviceConfig, self.device, "device")

    def switch_protocol(self):
        return _build(SwitchProtocol, self.protocol, "protocol")

    def reset_protocol(self):
        return _build(ResetProtocol, self.reset, "reset")

    def comparator_model(self):
        return _build(ComparatorModel, self.comparator, "comparator")

    def integrator_config(self):
        return _build(IntegratorConfig, asdict(self.integrator), "integrator")

    def thermal_model(self):
        return ThermalModel(**asdict(self.thermal))

    def phase_schedule(self, architecture):
        return _build(PhaseSchedule, dict(asdict(self.schedule), architecture=architecture),
                      "schedule")

    def widths(self):
        template = self.device_config()
        w = design_widths(self.bank.i_min, self.bank.i_max, 7, template)
        if self.bank.mismatch_sigma > 0:
            w = mismatched_widths(w, self.bank.mismatch_sigma, self.bank.mismatch_seed)
        return w

    def flash_adc(self, jobs=1, thermal=True):
        return FlashADC(
            widths=tuple(self.widths()), template=self.device_config(),
            protocol=self.switch_protocol(), reset=self.reset_protocol(),
            comparator=self.comparator_model(),
            thermal=self.thermal_model() if thermal else ThermalModel(enabled=False),
            integrator=self.integrator_config(), v_bias=self.v_bias, seed=self.seed, jobs=jobs)


def _drop_none(d):
    if isinstance(d, dict):
        return {k: _drop_none(v) for k, v in d.items() if v is not None}
    return d


def _build(cls, values, section):
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise ConfigError(f"[{section}] unknown field(s): {', '.join(unknown)}")
    try:
        return cls(**values)
    except SpinAdcError as exc:
        raise ConfigError(f"[{section}] {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


_SECTIONS = {"bank": BankDesign, "schedule": ScheduleConfig, "thermal": ThermalConfig,
             "integrator": IntegratorSettings}
_FREE_SECTIONS = {"device": DeviceConfig, "protocol": SwitchProtocol, "reset": ResetProtocol,
                  "comparator": ComparatorModel}
_SCALARS = {"v_bias": float, "seed": int, "out_dir": str}


def _check_type(value, expected, where):
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if expected is float and not isinstance(value, float):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if expected is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if expected is bool and not isinstance(value, bool):
        raise ConfigError(f"{where}: expected true/false, got {value!r}")
    if expected is str and not isinstance(value, str):
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    return value


_FIELD_TYPES = {
    BankDesign: {"i_min": float, "i_max": float, "mismatch_sigma": float, "mismatch_seed": int},
    ScheduleConfig: {"t_convert": float, "t_sense": float, "t_reset": float},
    ThermalConfig: {"enabled": bool, "temperature": float, "bias_heating": bool},
    IntegratorSettings: {"dt": float, "scheme": str, "renormalize": bool, "record_stride": int},
}


def from_mapping(data):
    """Validate a parsed mapping; diagnostics name the offending ``section.field``."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a table/object")
    cfg = RunConfig()
    for key, value in data.items():
        if key in _SECTIONS:
            cls = _SECTIONS[key]
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected a table")
            types = _FIELD_TYPES[cls]
            kw = {}
            for k, v in value.items():
                if k not in types:
                    raise ConfigError(f"{key}.{k}: unknown field")
                kw[k] = _check_type(v, types[k], f"{key}.{k}")
            setattr(cfg, key, cls(**kw))
        elif key in _FREE_SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected a table")
            names = {f.name for f in fields(_FREE_SECTIONS[key])}
            kw = {}
            for k, v in value.items():
                if k not in names:
                    raise ConfigError(f"{key}.{k}: unknown field")
                kw[k] = _check_type(v, float, f"{key}.{k}")
            setattr(cfg, key, kw)
        elif key in _SCALARS:
            setattr(cfg, key, _check_type(value, _SCALARS[key], key))
        else:
            raise ConfigError(f"{key}: unknown section")
    # build once so physical validation errors surface at load time
    cfg.device_config()
    cfg.switch_protocol()
    cfg.reset_protocol()
    cfg.comparator_model()
    cfg.integrator_config()
    cfg.phase_schedule("conventional")
    return cfg


def parse_text(text, fmt):
    if fmt == "toml":
        try:
            data = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"TOML syntax error: {exc}") from exc
    elif fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"JSON syntax error at line {exc.lineno}, column {exc.colno}: "
                              f"{exc.msg}") from exc
    else:
        raise ConfigError(f"unknown config format {fmt!r}")
    return from_mapping(data)


def load_config(path=None, env=None):
    """Read a config file (format from the suffix) and apply the seed override."""
    env = os.environ if env is None else env
    if path is None:
        cfg = RunConfig()
    else:
        path = Path(path)
        fmt = "toml" if path.suffix.lower() == ".toml" else "json"
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        try:
            cfg = parse_text(text, fmt)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if env.get(SEED_ENV):
        try:
            cfg.seed = int(env[SEED_ENV])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from exc
    return cfg
