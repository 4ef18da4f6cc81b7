"""Strict TOML experiment configuration.

Every knob of an experiment lives in one file made of the tables below.
Missing keys take the defaults shown in ``data/default.toml``; unknown
tables or keys are rejected with their dotted path. :func:`dumps` writes the
effective configuration back out so that ``loads(dumps(cfg)) == cfg``.
"""
from __future__ import annotations

import math
import re
import sys
import typing
from dataclasses import dataclass, field, fields, is_dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .analytics import AdaptiveModulation, CoxParams, FixedModulation, ModulationScheme
from .channel import LinkBudget, NakagamiFading, db_to_linear, dbm_to_watts, noise_power_from_density
from .constellation import EARTH_ROTATION_RATE, MotionParams
from .errors import ConfigError, DomainError
from .geometry import OrbitGeometry
from .quadrature import QuadratureSpec
from .simulator import SimConfig

KM = 1000.0


def _key(name: str) -> dict:
    return {"key": name}


@dataclass(frozen=True)
class GeometrySection:
    earth_radius_km: float = 6371.0
    altitude_km: float = 600.0
    gamma_km: float = 900.0


@dataclass(frozen=True)
class CoxSection:
    lam: float = field(default=40.0, metadata=_key("lambda"))
    mu: float = 40.0


@dataclass(frozen=True)
class PolarSection:
    n_orbits: int = 20
    n_sats_per_orbit: int = 30
    spacing: str = "poisson"


@dataclass(frozen=True)
class LinkSection:
    p_dbm: float = 30.0
    g_db: float = 20.0
    alpha: float = 2.0
    noise_density_dbm_hz: float = -174.0
    bandwidth_hz: float = 20e6
    nakagami_m: int = 1


@dataclass(frozen=True)
class MotionSection:
    omega_s: Union[float, str] = "kepler"
    omega_e: float = EARTH_ROTATION_RATE
    include_earth_rotation: bool = False


@dataclass(frozen=True)
class SchemeSection:
    kind: str = "fixed"
    rate_bits: int = 1
    tau_db: float = 0.0


@dataclass(frozen=True)
class PassSection:
    phi: Union[float, str] = "90deg"


@dataclass(frozen=True)
class DelaySection:
    d: float = 0.0
    # seconds; empty means 20 points evenly spaced below the wraparound limit
    d_grid: tuple[float, ...] = ()


@dataclass(frozen=True)
class QuadratureSection:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000
    tail_cutoff: float = 1e-12


@dataclass(frozen=True)
class SimSection:
    trials: int = 100_000
    seed: int = 0
    # seconds per pass-simulation step; absent means 1000 steps per pass
    time_step: Optional[float] = None
    confidence_level: float = 0.95


@dataclass(frozen=True)
class SweepSection:
    parameter: str = ""
    values: tuple[float, ...] = ()


@dataclass(frozen=True)
class OutputSection:
    path: str = ""
    format: str = "csv"


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: GeometrySection = GeometrySection()
    cox: CoxSection = CoxSection()
    polar: PolarSection = PolarSection()
    link: LinkSection = LinkSection()
    motion: MotionSection = MotionSection()
    scheme: SchemeSection = SchemeSection()
    pass_: PassSection = field(default=PassSection(), metadata=_key("pass"))
    delay: DelaySection = DelaySection()
    quadrature: QuadratureSection = QuadratureSection()
    sim: SimSection = SimSection()
    sweep: SweepSection = SweepSection()
    output: OutputSection = OutputSection()

    # --- module-level objects ---------------------------------------------

    def orbit_geometry(self) -> OrbitGeometry:
        g = self.geometry
        return OrbitGeometry.from_altitude(g.earth_radius_km * KM, g.altitude_km * KM, g.gamma_km * KM)

    def cox_params(self) -> CoxParams:
        return CoxParams(self.cox.lam, self.cox.mu)

    def link_budget(self) -> LinkBudget:
        k = self.link
        return LinkBudget(p=dbm_to_watts(k.p_dbm), g=db_to_linear(k.g_db), alpha=k.alpha,
                          noise_power=noise_power_from_density(k.noise_density_dbm_hz, k.bandwidth_hz),
                          bandwidth=k.bandwidth_hz)

    def fading(self) -> NakagamiFading:
        return NakagamiFading(self.link.nakagami_m)

    def motion_params(self) -> MotionParams:
        m = self.motion
        if isinstance(m.omega_s, str):
            return MotionParams.kepler(self.orbit_geometry(), omega_e=m.omega_e)
        return MotionParams(omega_s=m.omega_s, omega_e=m.omega_e)

    def modulation(self) -> ModulationScheme:
        s = self.scheme
        if s.kind == "adaptive":
            return AdaptiveModulation()
        return FixedModulation(s.rate_bits, db_to_linear(s.tau_db))

    def pass_inclination(self) -> float:
        return parse_angle(self.pass_.phi, "pass.phi")

    def quad_spec(self) -> QuadratureSpec:
        q = self.quadrature
        return QuadratureSpec(q.abs_tol, q.rel_tol, q.max_subdivisions, q.tail_cutoff)

    def sim_config(self) -> SimConfig:
        s = self.sim
        return SimConfig(trials=s.trials, base_seed=s.seed, time_step=s.time_step,
                         include_earth_rotation=self.motion.include_earth_rotation,
                         confidence_level=s.confidence_level)


_ANGLE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*deg\s*$")


def parse_angle(value: Union[float, str], path: str = "angle") -> float:
    """Radians from a number, or from a string such as ``"90deg"``."""
    if isinstance(value, str):
        m = _ANGLE.match(value)
        if not m:
            raise ConfigError(f"{path}: expected radians or a string like '90deg', got {value!r}")
        return math.radians(float(m.group(1)))
    return float(value)


# --- strict parsing -------------------------------------------------------------


def _toml_key(f) -> str:
    return f.metadata.get("key", f.name)


def _coerce(value: Any, tp, path: str):
    origin = typing.get_origin(tp)
    if origin is Union:
        errors = []
        for member in typing.get_args(tp):
            if member is type(None):
                continue
            try:
                return _coerce(value, member, path)
            except ConfigError as e:
                errors.append(str(e))
        raise ConfigError(errors[-1] if len(errors) == 1 else f"{path}: unsupported value {value!r}")
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected an array, got {type(value).__name__}")
        item = typing.get_args(tp)[0]
        return tuple(_coerce(v, item, f"{path}[{i}]") for i, v in enumerate(value))
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    raise TypeError(f"unsupported config type {tp!r}")  # pragma: no cover


def _build(cls, table: Any, path: str):
    if not isinstance(table, dict):
        raise ConfigError(f"{path or 'config'}: expected a table")
    hints = typing.get_type_hints(cls)
    known = {_toml_key(f): f for f in fields(cls)}
    for k in table:
        if k not in known:
            where = f"{path}.{k}" if path else k
            raise ConfigError(f"unknown key '{where}'; expected one of: {', '.join(known)}")
    kwargs = {}
    for key, f in known.items():
        if key not in table:
            continue
        where = f"{path}.{key}" if path else key
        tp = hints[f.name]
        kwargs[f.name] = _build(tp, table[key], where) if is_dataclass(tp) else _coerce(table[key], tp, where)
    return cls(**kwargs)


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Construct every module-level object once so bad values fail at load time."""
    checks = [
        ("geometry", cfg.orbit_geometry), ("cox", cfg.cox_params), ("link", cfg.link_budget),
        ("link.nakagami_m", cfg.fading), ("motion", cfg.motion_params), ("scheme", cfg.modulation),
        ("pass.phi", cfg.pass_inclination), ("quadrature", cfg.quad_spec), ("sim", cfg.sim_config),
    ]
    for where, make in checks:
        try:
            make()
        except (DomainError, ValueError) as e:
            raise ConfigError(f"{where}: {e}") from None
    if cfg.scheme.kind not in ("fixed", "adaptive"):
        raise ConfigError(f"scheme.kind: expected 'fixed' or 'adaptive', got {cfg.scheme.kind!r}")
    if isinstance(cfg.motion.omega_s, str) and cfg.motion.omega_s != "kepler":
        raise ConfigError(f"motion.omega_s: expected a number or 'kepler', got {cfg.motion.omega_s!r}")
    if cfg.polar.spacing not in ("even", "poisson"):
        raise ConfigError(f"polar.spacing: expected 'even' or 'poisson', got {cfg.polar.spacing!r}")
    if cfg.polar.n_orbits < 1 or cfg.polar.n_sats_per_orbit < 1:
        raise ConfigError("polar: n_orbits and n_sats_per_orbit must be >= 1")
    if cfg.sim.seed < 0:
        raise ConfigError("sim.seed: must be non-negative")
    if cfg.delay.d < 0 or any(d < 0 for d in cfg.delay.d_grid):
        raise ConfigError("delay: delays must be non-negative")
    if cfg.output.format != "csv":
        raise ConfigError(f"output.format: only 'csv' is supported, got {cfg.output.format!r}")
    if cfg.sweep.parameter:
        sweep_target(cfg.sweep.parameter)
        if not cfg.sweep.values:
            raise ConfigError("sweep.values: a sweep needs at least one value")
    elif cfg.sweep.values:
        raise ConfigError("sweep.parameter: values given without a parameter")
    return cfg


def from_dict(data: dict) -> ExperimentConfig:
    return _validate(_build(ExperimentConfig, data, ""))


def loads(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        # the decoder message carries "(at line L, column C)"
        raise ConfigError(f"TOML syntax error: {e}") from None
    return from_dict(data)


def load(path: Union[str, Path]) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    try:
        return loads(text)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from None


def default_text() -> str:
    return resources.files("leoharvest").joinpath("data/default.toml").read_text(encoding="utf-8")


def to_dict(cfg) -> dict:
    out = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue  # TOML has no null; absence means the default
        if is_dataclass(v):
            v = to_dict(v)
        elif isinstance(v, tuple):
            v = list(v)
        out[_toml_key(f)] = v
    return out


def dumps(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


# --- sweeps and overrides -----------------------------------------------------------


def _sections() -> dict[str, Any]:
    hints = typing.get_type_hints(ExperimentConfig)
    return {_toml_key(f): (f.name, hints[f.name]) for f in fields(ExperimentConfig)}


def sweep_target(name: str) -> tuple[str, str, Any]:
    """Resolve ``"table.key"`` to (section attribute, field attribute, field type)."""
    table, _, key = name.partition(".")
    sections = _sections()
    if table not in sections or not key:
        raise ConfigError(f"sweep.parameter: expected 'table.key', got {name!r}")
    attr, cls = sections[table]
    hints = typing.get_type_hints(cls)
    for f in fields(cls):
        if _toml_key(f) == key:
            tp = hints[f.name]
            numeric = tp in (int, float) or (typing.get_origin(tp) is Union and float in typing.get_args(tp))
            if not numeric:
                raise ConfigError(f"sweep.parameter: {name} is not numeric")
            return attr, f.name, tp
    raise ConfigError(f"sweep.parameter: unknown key {name!r}")


def with_override(cfg: ExperimentConfig, name: str, value) -> ExperimentConfig:
    """Copy of ``cfg`` with the numeric setting ``table.key`` replaced (validated)."""
    attr, fname, tp = sweep_target(name)
    if tp is int:
        if float(value) != int(value):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        value = int(value)
    else:
        value = float(value)
    section = replace(getattr(cfg, attr), **{fname: value})
    return _validate(replace(cfg, **{attr: section}))


def with_sim(cfg: ExperimentConfig, trials: int | None = None, seed: int | None = None) -> ExperimentConfig:
    sim = cfg.sim
    if trials is not None:
        sim = replace(sim, trials=trials)
    if seed is not None:
        sim = replace(sim, seed=seed)
    return _validate(replace(cfg, sim=sim))
