"""Scenario configuration: strict TOML parsing, defaults and overrides.

A scenario is a TOML document with the sections ``black_hole``, ``atom``,
``beam``, ``modes``, ``quadrature``, ``evolution``, ``entropy``,
``trajectory``, ``checks`` and ``outputs`` (plus a top-level ``workers``).
Unknown keys are rejected with their dotted path; duplicate keys are a
syntax error. In ``units = "si"`` mode masses are in kg, frequencies in
rad/s, rates in 1/s and times in s; otherwise everything is in units of
r_g and c.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .constants import CODATA2018
from .errors import ConfigError
from .excitation import QuadratureConfig
from .geometry import UnitMode, UnitSystem, gravitational_radius


@dataclass(frozen=True)
class BlackHoleConfig:
    mass: float | None = 1.0
    r_g: float | None = None
    units: str = "dimensionless"


@dataclass(frozen=True)
class AtomConfig:
    omega: tuple = (100.0,)
    g: float = 1.0


@dataclass(frozen=True)
class BeamConfig:
    injection_rate: float = 1.0


@dataclass(frozen=True)
class GridConfig:
    nu_min: float
    nu_max: float
    count: int
    spacing: str = "linear"

    def values(self):
        if self.spacing == "log":
            return tuple(np.geomspace(self.nu_min, self.nu_max, self.count).tolist())
        return tuple(np.linspace(self.nu_min, self.nu_max, self.count).tolist())


@dataclass(frozen=True)
class ModesConfig:
    nu: tuple = ()
    xi: tuple = ()
    grid: GridConfig | None = None
    ell: int = 0


@dataclass(frozen=True)
class EvolutionConfig:
    enabled: bool = True
    t_final: float | None = None
    relaxation_times: float = 25.0
    rtol: float = 1e-10
    atol: float = 1e-14
    samples: int = 101
    kappa_leak: float = 0.0
    kappa_ratio: float = 0.0
    tail_tol: float = 1e-10
    steady_tail_tol: float = 1e-12


@dataclass(frozen=True)
class EntropyConfig:
    flux_kappa_ratio: float = 1e-3
    n_dot: tuple | None = None
    m_dot_atom: float = 0.0


@dataclass(frozen=True)
class TrajectoryConfig:
    r_start: float = 50.0
    r_end: float = 1.01
    tol: float = 1e-10
    samples: int = 200


@dataclass(frozen=True)
class ChecksConfig:
    max_rel_diff: float = 0.02
    steady_linf: float = 1e-8
    detailed_balance: float = 1e-8
    area_law_rtol: float = 1e-10
    geodesic_residual: float = 1e-8


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "hbar-out"
    formats: tuple = ("csv", "json")
    precision: int = 17


@dataclass(frozen=True)
class ScenarioConfig:
    black_hole: BlackHoleConfig = BlackHoleConfig()
    atom: AtomConfig = AtomConfig()
    beam: BeamConfig = BeamConfig()
    modes: ModesConfig = ModesConfig(nu=(0.5,))
    quadrature: QuadratureConfig = QuadratureConfig()
    evolution: EvolutionConfig = EvolutionConfig()
    entropy: EntropyConfig = EntropyConfig()
    trajectory: TrajectoryConfig = TrajectoryConfig()
    checks: ChecksConfig = ChecksConfig()
    outputs: OutputConfig = OutputConfig()
    workers: int = 4

    @property
    def si(self) -> bool:
        return self.black_hole.units == UnitMode.SI.value

    @property
    def mass_kg(self) -> float | None:
        if not self.si:
            return None
        if self.black_hole.r_g is not None:
            return self.black_hole.r_g * CODATA2018.c**2 / (2.0 * CODATA2018.G)
        return self.black_hole.mass

    @property
    def units(self) -> UnitSystem:
        """Conversion for user-facing values (identity in dimensionless mode)."""
        if self.si:
            return UnitSystem(gravitational_radius(self.mass_kg), UnitMode.SI)
        return UnitSystem(1.0, UnitMode.DIMENSIONLESS)

    def omegas(self):
        """Sorted dimensionless atomic frequencies."""
        u = self.units
        return sorted({u.to_internal(w, "frequency") for w in self.atom.omega})

    def nus(self):
        """Sorted dimensionless mode frequencies from nu, xi and grid entries."""
        u = self.units
        vals = [u.to_internal(v, "frequency") for v in self.modes.nu]
        vals += [x / (2.0 * math.pi) for x in self.modes.xi]
        if self.modes.grid is not None:
            vals += [u.to_internal(v, "frequency") for v in self.modes.grid.values()]
        return sorted(set(vals))

    def coupling(self) -> float:
        return self.units.to_internal(self.atom.g, "rate")

    def injection_rate(self) -> float:
        return self.units.to_internal(self.beam.injection_rate, "rate")

    def as_dict(self) -> dict:
        return _jsonable(asdict(self))

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


# -- validation ------------------------------------------------------------


def _number(value, path, *, positive=False, nonneg=False, integer=False, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    if integer and int(value) != value:
        raise ConfigError(f"expected an integer, got {value!r}", path)
    value = int(value) if integer else float(value)
    if not math.isfinite(value):
        raise ConfigError("must be finite", path)
    if positive and not value > 0:
        raise ConfigError(f"must be positive, got {value!r}", path)
    if nonneg and value < 0:
        raise ConfigError(f"must be non-negative, got {value!r}", path)
    return value


def _numbers(value, path, **kw):
    if not isinstance(value, list):
        value = [value]
    return tuple(_number(v, f"{path}[{i}]", **kw) for i, v in enumerate(value))


def _choice(value, path, options):
    if value not in options:
        raise ConfigError(f"must be one of {sorted(options)}, got {value!r}", path)
    return value


def _section(raw, name, allowed):
    data = raw.get(name, {})
    if not isinstance(data, dict):
        raise ConfigError("expected a table", name)
    for key in data:
        if key not in allowed:
            raise ConfigError("unknown key", f"{name}.{key}")
    return data


def _validate(raw: dict) -> ScenarioConfig:
    sections = {"black_hole", "atom", "beam", "modes", "quadrature", "evolution",
                "entropy", "trajectory", "checks", "outputs", "workers"}
    for key in raw:
        if key not in sections:
            raise ConfigError("unknown key", key)

    d = _section(raw, "black_hole", {"mass", "r_g", "units"})
    units = _choice(d.get("units", "dimensionless"), "black_hole.units",
                    {m.value for m in UnitMode})
    mass = _number(d.get("mass"), "black_hole.mass", positive=True, allow_none=True)
    r_g = _number(d.get("r_g"), "black_hole.r_g", positive=True, allow_none=True)
    if mass is not None and r_g is not None:
        raise ConfigError("give either mass or r_g, not both", "black_hole")
    if mass is None and r_g is None:
        if units == "si":
            raise ConfigError("SI scenarios need a mass (kg) or r_g (m)", "black_hole.mass")
        mass = 1.0
    black_hole = BlackHoleConfig(mass, r_g, units)

    d = _section(raw, "atom", {"omega", "g"})
    if "omega" not in d:
        raise ConfigError("required", "atom.omega")
    atom = AtomConfig(_numbers(d["omega"], "atom.omega", positive=True),
                      _number(d.get("g", 1.0), "atom.g", positive=True))
    if not atom.omega:
        raise ConfigError("at least one value required", "atom.omega")

    d = _section(raw, "beam", {"injection_rate"})
    beam = BeamConfig(_number(d.get("injection_rate", 1.0), "beam.injection_rate",
                              positive=True))

    d = _section(raw, "modes", {"nu", "xi", "grid", "ell"})
    grid = None
    if "grid" in d:
        gd = d["grid"]
        if not isinstance(gd, dict):
            raise ConfigError("expected a table", "modes.grid")
        for key in gd:
            if key not in {"nu_min", "nu_max", "count", "spacing"}:
                raise ConfigError("unknown key", f"modes.grid.{key}")
        for key in ("nu_min", "nu_max", "count"):
            if key not in gd:
                raise ConfigError("required", f"modes.grid.{key}")
        grid = GridConfig(
            _number(gd["nu_min"], "modes.grid.nu_min", positive=True),
            _number(gd["nu_max"], "modes.grid.nu_max", positive=True),
            _number(gd["count"], "modes.grid.count", positive=True, integer=True),
            _choice(gd.get("spacing", "linear"), "modes.grid.spacing", {"linear", "log"}),
        )
        if grid.nu_max < grid.nu_min:
            raise ConfigError("nu_max must be >= nu_min", "modes.grid")
    modes = ModesConfig(
        _numbers(d.get("nu", []), "modes.nu", positive=True),
        _numbers(d.get("xi", []), "modes.xi", positive=True),
        grid,
        _number(d.get("ell", 0), "modes.ell", nonneg=True, integer=True),
    )
    if not (modes.nu or modes.xi or grid):
        raise ConfigError("mode grid is empty; give nu, xi or grid", "modes")

    d = _section(raw, "quadrature", {"eps_ladder", "abs_tol", "rel_tol", "x_max",
                                     "log_split", "nodes"})
    qkw = {}
    if "eps_ladder" in d:
        qkw["eps_ladder"] = _numbers(d["eps_ladder"], "quadrature.eps_ladder", positive=True)
    for key in ("abs_tol", "rel_tol", "log_split"):
        if key in d:
            qkw[key] = _number(d[key], f"quadrature.{key}", positive=True)
    if "x_max" in d:
        qkw["x_max"] = _number(d["x_max"], "quadrature.x_max", positive=True)
    if "nodes" in d:
        qkw["nodes"] = _number(d["nodes"], "quadrature.nodes", positive=True, integer=True)
    try:
        quadrature = QuadratureConfig(**qkw)
    except ValueError as exc:
        raise ConfigError(str(exc), "quadrature") from None

    d = _section(raw, "evolution", set(EvolutionConfig.__dataclass_fields__))
    enabled = d.get("enabled", True)
    if not isinstance(enabled, bool):
        raise ConfigError("expected true or false", "evolution.enabled")
    evolution = EvolutionConfig(
        enabled=enabled,
        t_final=_number(d.get("t_final"), "evolution.t_final", nonneg=True, allow_none=True),
        relaxation_times=_number(d.get("relaxation_times", 25.0),
                                 "evolution.relaxation_times", positive=True),
        rtol=_number(d.get("rtol", 1e-10), "evolution.rtol", positive=True),
        atol=_number(d.get("atol", 1e-14), "evolution.atol", positive=True),
        samples=_number(d.get("samples", 101), "evolution.samples", positive=True,
                        integer=True),
        kappa_leak=_number(d.get("kappa_leak", 0.0), "evolution.kappa_leak", nonneg=True),
        kappa_ratio=_number(d.get("kappa_ratio", 0.0), "evolution.kappa_ratio", nonneg=True),
        tail_tol=_number(d.get("tail_tol", 1e-10), "evolution.tail_tol", positive=True),
        steady_tail_tol=_number(d.get("steady_tail_tol", 1e-12),
                                "evolution.steady_tail_tol", positive=True),
    )
    if evolution.kappa_leak > 0 and evolution.kappa_ratio > 0:
        raise ConfigError("give kappa_leak or kappa_ratio, not both", "evolution")
    if evolution.samples < 2:
        raise ConfigError("need at least 2 samples", "evolution.samples")

    d = _section(raw, "entropy", {"flux_kappa_ratio", "n_dot", "m_dot_atom"})
    n_dot = d.get("n_dot")
    entropy = EntropyConfig(
        _number(d.get("flux_kappa_ratio", 1e-3), "entropy.flux_kappa_ratio", positive=True),
        None if n_dot is None else _numbers(n_dot, "entropy.n_dot", nonneg=True),
        _number(d.get("m_dot_atom", 0.0), "entropy.m_dot_atom"),
    )

    d = _section(raw, "trajectory", set(TrajectoryConfig.__dataclass_fields__))
    trajectory = TrajectoryConfig(
        _number(d.get("r_start", 50.0), "trajectory.r_start", positive=True),
        _number(d.get("r_end", 1.01), "trajectory.r_end", positive=True),
        _number(d.get("tol", 1e-10), "trajectory.tol", positive=True),
        _number(d.get("samples", 200), "trajectory.samples", positive=True, integer=True),
    )
    if not 1.0 < trajectory.r_end <= trajectory.r_start:
        raise ConfigError("need 1 < r_end <= r_start", "trajectory")

    d = _section(raw, "checks", set(ChecksConfig.__dataclass_fields__))
    checks = ChecksConfig(**{
        key: _number(d.get(key, default), f"checks.{key}", positive=True)
        for key, default in asdict(ChecksConfig()).items()
    })

    d = _section(raw, "outputs", {"directory", "formats", "precision"})
    directory = d.get("directory", "hbar-out")
    if not isinstance(directory, str) or not directory:
        raise ConfigError("expected a non-empty string", "outputs.directory")
    formats = d.get("formats", ["csv", "json"])
    if not isinstance(formats, list):
        formats = [formats]
    for i, f in enumerate(formats):
        _choice(f, f"outputs.formats[{i}]", {"csv", "json"})
    outputs = OutputConfig(directory, tuple(dict.fromkeys(formats)),
                           _number(d.get("precision", 17), "outputs.precision",
                                   positive=True, integer=True))

    workers = _number(raw.get("workers", 4), "workers", positive=True, integer=True)

    cfg = ScenarioConfig(black_hole, atom, beam, modes, quadrature, evolution, entropy,
                         trajectory, checks, outputs, workers)
    if entropy.n_dot is not None and len(entropy.n_dot) != len(cfg.nus()):
        raise ConfigError(f"need one value per mode ({len(cfg.nus())})", "entropy.n_dot")
    return cfg


# -- entry points ----------------------------------------------------------


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply ``key.path=value`` strings; values are parsed as TOML literals."""
    raw = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        if not all(parts):
            raise ConfigError(f"bad override key {key!r}")
        node = raw
        for i, part in enumerate(parts[:-1]):
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError("cannot override inside a non-table", ".".join(parts[:i + 1]))
        node[parts[-1]] = _parse_value(text.strip())
    return raw


def parse_config(text: str, overrides=()) -> ScenarioConfig:
    """Parse and validate a TOML scenario document."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"syntax error: {exc}") from None
    return _validate(apply_overrides(raw, overrides))


def load_config(path, overrides=()) -> ScenarioConfig:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: not valid UTF-8 ({exc})") from None
    return parse_config(text, overrides)


def default_scenario_text() -> str:
    from importlib.resources import files

    return files("hbar_sim").joinpath("data/default_scenario.toml").read_text("utf-8")
