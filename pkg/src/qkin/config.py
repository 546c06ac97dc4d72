"""Flat ``key=value`` run configuration.

Blank lines and ``#`` comments are ignored. Every key has a default and
unknown keys are rejected. Vector values are comma-separated.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .discretize import NoiseSpec, TransitionMethod
from .eskf import ErrorFrame, FilterConfig, GravityMode, ResetMode
from .rate_int import IntegratorMethod
from .sim import Family, TrajectorySpec


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        super().__init__(message)
        self.key = key


@dataclass
class RunConfig:
    # trajectory
    family: str = "circle"
    duration: float = 120.0
    imu_rate: float = 100.0
    fix_rate: float = 1.0
    amplitude: float = 0.5
    frequency: float = 0.2
    axis: tuple = (0.0, 0.0, 1.0)
    rate: tuple = (0.0, 0.0, 0.1)
    radius: float = 10.0
    angular_speed: float = 0.5
    # sensors
    sigma_acc: float = 0.05
    sigma_gyro: float = 0.005
    sigma_acc_walk: float = 1e-3
    sigma_gyro_walk: float = 1e-4
    acc_bias0: tuple = (0.03, -0.02, 0.04)
    gyro_bias0: tuple = (0.003, -0.002, 0.004)
    sigma_fix: float = 0.5
    # filter
    frame: str = "local"
    transition: str = "blockwise"
    integrator: str = "midward"
    reset: str = "full"
    covariance_update: str = "joseph"
    gravity: str = "estimated"
    init_sigma_p: float = 0.5
    init_sigma_v: float = 0.1
    init_sigma_theta: float = 1e-3
    init_sigma_acc_bias: float = 0.05
    init_sigma_gyro_bias: float = 0.005
    init_sigma_gravity: float = 0.05
    # run
    seed: int = 0
    perturb_initial: bool = True
    out_dir: str = "out"
    truth_file: str = "truth.csv"
    imu_file: str = "imu.csv"
    fix_file: str = "fixes.csv"
    trace_file: str = "trace.csv"

    def __post_init__(self):
        choices = {
            "family": Family,
            "frame": ErrorFrame,
            "transition": TransitionMethod,
            "integrator": IntegratorMethod,
            "reset": ResetMode,
            "gravity": GravityMode,
        }
        for key, enum_cls in choices.items():
            value = getattr(self, key)
            allowed = [m.value for m in enum_cls]
            if str(value) not in allowed:
                raise ConfigError(key, f"{key}: '{value}' is not one of {allowed}")
            setattr(self, key, str(value))
        if self.covariance_update not in ("joseph", "simple"):
            raise ConfigError("covariance_update", "covariance_update must be 'joseph' or 'simple'")
        for key in ("axis", "rate", "acc_bias0", "gyro_bias0"):
            if len(getattr(self, key)) != 3:
                raise ConfigError(key, f"{key} needs three comma-separated values")

    # ------------------------------------------------------------ builders

    def trajectory(self) -> TrajectorySpec:
        try:
            return TrajectorySpec(
                family=self.family,
                duration=self.duration,
                imu_rate=self.imu_rate,
                fix_rate=self.fix_rate,
                amplitude=self.amplitude,
                frequency=self.frequency,
                axis=self.axis,
                rate=self.rate,
                radius=self.radius,
                angular_speed=self.angular_speed,
            )
        except ValueError as exc:
            raise ConfigError(None, str(exc)) from exc

    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.sigma_acc, self.sigma_gyro, self.sigma_acc_walk, self.sigma_gyro_walk)

    def bias0(self):
        return (tuple(self.acc_bias0), tuple(self.gyro_bias0))

    def filter_config(self) -> FilterConfig:
        return FilterConfig(
            frame=self.frame,
            transition=self.transition,
            integrator=self.integrator,
            reset=self.reset,
            joseph=self.covariance_update == "joseph",
            gravity=self.gravity,
            noise=self.noise(),
            initial_sigmas=(
                self.init_sigma_p,
                self.init_sigma_v,
                self.init_sigma_theta,
                self.init_sigma_acc_bias,
                self.init_sigma_gyro_bias,
                self.init_sigma_gravity,
            ),
        )

    def as_header(self) -> dict:
        """Config echoed as ``key -> text`` in file headers; parses back with :func:`parse_config`."""
        out = {}
        for k, v in asdict(self).items():
            out[k] = ",".join(repr(float(x)) for x in v) if isinstance(v, tuple) else _text(v)
        return out


def _text(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _convert(key: str, default, text: str):
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(key, f"bad value for '{key}': {text!r}") from exc
    return text


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    defaults = {f.name: f.default for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(key or None, f"line {lineno}: expected key=value, got {raw.strip()!r}")
        if key not in defaults:
            raise ConfigError(key, f"line {lineno}: unknown key '{key}'")
        values[key] = _convert(key, defaults[key], value)
    values.update(overrides or {})
    return RunConfig(**values)


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    text = Path(path).read_text() if path is not None else ""
    return parse_config(text, overrides)
