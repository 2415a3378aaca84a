"""
Run configuration: constants defaults < YAML file < command-line flags.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import yaml

from constants import CON_CALIB, CON_ROBUST, CON_RUN
from errors import ConfigError, ParameterError
from machine.cloner import MachineTriple, check_t
from machine.detection import EfficiencyPair


@dataclass(frozen=True)
class RunConfig:
    t_values: tuple[float, ...] = CON_RUN["t_values"]
    eta_a: float = CON_RUN["eta_a"]
    eta_b: float = CON_RUN["eta_b"]
    counts_per_setting: float = CON_RUN["counts_per_setting"]
    seed: int = CON_RUN["seed"]
    noiseless: bool = CON_RUN["noiseless"]
    calibration_objective: str = CON_RUN["calibration_objective"]
    calibration_mode: str = CON_RUN["calibration_mode"]
    output_path: str = CON_RUN["output_path"]
    output_format: str = CON_RUN["output_format"]
    strict: bool = CON_RUN["strict"]
    machine: tuple[float, float, float] | None = CON_RUN["machine"]
    eps_max: float = CON_RUN["eps_max"]
    eps_points: int = CON_RUN["eps_points"]
    curve_points: int = CON_RUN["curve_points"]

    @property
    def eta_true(self) -> EfficiencyPair:
        return EfficiencyPair(self.eta_a, self.eta_b)

    def machine_triple(self) -> MachineTriple | None:
        return None if self.machine is None else MachineTriple(*self.machine)

    def to_yaml(self) -> str:
        data = asdict(self)
        data["t_values"] = [float(t) for t in self.t_values]
        if self.machine is not None:
            data["machine"] = list(self.machine)
        return yaml.safe_dump(data, sort_keys=False)


_FIELDS = {f.name for f in fields(RunConfig)}


def _as_float(name, value) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}", field=name)
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {value!r}", field=name) from None
    if not math.isfinite(number):
        raise ConfigError(f"expected a finite number, got {value!r}", field=name)
    return number


def _as_int(name, value) -> int:
    number = _as_float(name, value)
    if number != int(number):
        raise ConfigError(f"expected an integer, got {value!r}", field=name)
    return int(number)


def _as_bool(name, value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "false", "yes", "no", "1", "0"):
        return value.lower() in ("true", "yes", "1")
    raise ConfigError(f"expected true/false, got {value!r}", field=name)


def _as_floats(name, value) -> tuple[float, ...]:
    if isinstance(value, str):
        value = [part for part in value.split(",") if part.strip()]
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"expected a non-empty list of numbers, got {value!r}", field=name)
    return tuple(_as_float(name, v) for v in value)


def _coerce(name: str, value):
    if name in ("t_values",):
        return _as_floats(name, value)
    if name == "machine":
        if value is None:
            return None
        triple = _as_floats(name, value)
        if len(triple) != 3:
            raise ConfigError("machine needs three numbers F_A, F_B, P", field=name)
        return triple
    if name in ("eta_a", "eta_b", "counts_per_setting", "eps_max"):
        return _as_float(name, value)
    if name in ("seed", "eps_points", "curve_points"):
        return _as_int(name, value)
    if name in ("noiseless", "strict"):
        return _as_bool(name, value)
    return str(value).lower() if name in ("calibration_objective", "calibration_mode", "output_format") else str(value)


def validate(config: RunConfig) -> RunConfig:
    """Check ranges; raise ConfigError naming the offending field."""
    try:
        for t in config.t_values:
            check_t(t)
    except ParameterError as error:
        raise ConfigError(str(error), field="t_values") from None
    for name in ("eta_a", "eta_b"):
        try:
            EfficiencyPair(getattr(config, name), 1.0)
        except ParameterError as error:
            raise ConfigError(str(error), field=name) from None
    if config.seed < 0:
        raise ConfigError(f"must be a non-negative integer, got {config.seed}", field="seed")
    if not config.counts_per_setting > 0:
        raise ConfigError("must be positive", field="counts_per_setting")
    if config.calibration_objective not in CON_CALIB["objectives"]:
        raise ConfigError(f"must be one of {CON_CALIB['objectives']}", field="calibration_objective")
    if config.calibration_mode not in CON_CALIB["modes"]:
        raise ConfigError(f"must be one of {CON_CALIB['modes']}", field="calibration_mode")
    if config.output_format not in ("csv", "json"):
        raise ConfigError("must be csv or json", field="output_format")
    if config.machine is not None:
        try:
            config.machine_triple()
        except ParameterError as error:
            raise ConfigError(str(error), field="machine") from None
    if not 0.0 < config.eps_max < CON_ROBUST["eps_limit"]:
        raise ConfigError(f"must lie in (0, {CON_ROBUST['eps_limit']:g})", field="eps_max")
    if config.eps_points < 2 or config.curve_points < 2:
        raise ConfigError("grids need at least two points", field="eps_points" if config.eps_points < 2 else "curve_points")
    return config


def load_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as error:
        raise ConfigError(f"cannot read config {path}: {error.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as error:
        line = error.problem_mark.line + 1 if error.problem_mark else None
        raise ConfigError(f"{path}: {error.problem}", line=line) from None
    except yaml.YAMLError as error:
        raise ConfigError(f"{path}: {error}") from None

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a flat key: value mapping")

    lines = {key: n for n, raw in enumerate(text.splitlines(), start=1)
             for key in [raw.split(":", 1)[0].strip()] if ":" in raw}
    values = {}
    for key, value in data.items():
        if key not in _FIELDS:
            raise ConfigError(f"{path}: unknown key", field=str(key), line=lines.get(str(key)))
        try:
            values[key] = _coerce(key, value)
        except ConfigError as error:
            raise ConfigError(f"{path}: {error}", line=lines.get(key)) from None
    return values


def resolve(config_path=None, overrides: dict | None = None) -> RunConfig:
    """Build a validated RunConfig. Flags (overrides) win over the file, the file over defaults."""
    config = RunConfig()
    if config_path is not None:
        config = replace(config, **load_file(config_path))
    flags = {k: _coerce(k, v) for k, v in (overrides or {}).items() if v is not None}
    unknown = set(flags) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown override {sorted(unknown)}")
    return validate(replace(config, **flags))
