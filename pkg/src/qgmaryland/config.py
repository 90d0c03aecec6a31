"""Run configuration: TOML loading and validation for the CLI.

A run is described by one TOML file with four sections::

    [model]      d1, d2, g, omega (array), phi        # angles in turns
    [potential]  kind = "zero" | "constant" | "piecewise_constant" (+ parameters)
    [numerics]   ode_tol, quad_points_per_axis, bisect_tol, box_sizes,
                 M_max, M_check, beta                  # all optional
    [output]     directory, formats (subset of ["csv", "json"])

Unknown sections or keys are rejected; every model-level invariant is
re-validated on load.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .hill import Potential
from .spectrum import Numerics
from .surface import ModelParams


class ConfigError(Exception):
    """Configuration file is missing, malformed, or violates an invariant."""


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    potential: Potential
    numerics: Numerics
    output: OutputSection


def _require_keys(section: str, data: dict, required: set[str], optional: set[str]) -> None:
    unknown = set(data) - required - optional
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    missing = required - set(data)
    if missing:
        raise ConfigError(f"missing keys in [{section}]: {sorted(missing)}")


def _as_float(section: str, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number, got {value!r}")
    return float(value)


def _as_int(section: str, key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"[{section}] {key} must be an integer, got {value!r}")
    return value


def _build_model(data: dict, phase_check_range: int) -> ModelParams:
    _require_keys("model", data, {"d1", "d2", "g", "omega", "phi"}, set())
    omega = data["omega"]
    if not isinstance(omega, list) or not omega:
        raise ConfigError("[model] omega must be a nonempty array")
    try:
        return ModelParams(
            d1=_as_int("model", "d1", data["d1"]),
            d2=_as_int("model", "d2", data["d2"]),
            g=_as_float("model", "g", data["g"]),
            omega=tuple(_as_float("model", "omega", w) for w in omega),
            phi=_as_float("model", "phi", data["phi"]),
            phase_check_range=phase_check_range,
        )
    except ValueError as exc:
        raise ConfigError(f"[model] invalid parameters: {exc}") from exc


def _build_potential(data: dict) -> Potential:
    kind = data.get("kind")
    if kind == "zero":
        _require_keys("potential", data, {"kind"}, set())
        return Potential.zero()
    if kind == "constant":
        _require_keys("potential", data, {"kind", "v0"}, set())
        return Potential.constant(_as_float("potential", "v0", data["v0"]))
    if kind == "piecewise_constant":
        _require_keys("potential", data, {"kind", "breakpoints", "values"}, set())
        try:
            return Potential.piecewise_constant(data["breakpoints"], data["values"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[potential] invalid pieces: {exc}") from exc
    raise ConfigError(f"[potential] kind must be zero|constant|piecewise_constant, got {kind!r}")


def _build_numerics(data: dict) -> Numerics:
    defaults = Numerics()
    _require_keys("numerics", data, set(),
                  {"ode_tol", "quad_points_per_axis", "bisect_tol", "box_sizes",
                   "M_max", "M_check", "beta"})
    box_sizes = data.get("box_sizes", list(defaults.box_sizes))
    if not isinstance(box_sizes, list) or not all(isinstance(b, int) and b >= 0 for b in box_sizes):
        raise ConfigError("[numerics] box_sizes must be an array of nonnegative integers")
    quad = data.get("quad_points_per_axis", defaults.quad_points_per_axis)
    if quad is not None:
        quad = _as_int("numerics", "quad_points_per_axis", quad)
        if quad < 4:
            raise ConfigError("[numerics] quad_points_per_axis must be >= 4")
    numerics = Numerics(
        ode_tol=_as_float("numerics", "ode_tol", data.get("ode_tol", defaults.ode_tol)),
        quad_points_per_axis=quad,
        bisect_tol=_as_float("numerics", "bisect_tol", data.get("bisect_tol", defaults.bisect_tol)),
        box_sizes=tuple(box_sizes),
        M_max=_as_int("numerics", "M_max", data.get("M_max", defaults.M_max)),
        M_check=_as_int("numerics", "M_check", data.get("M_check", defaults.M_check)),
        beta=_as_float("numerics", "beta", data.get("beta", defaults.beta)),
    )
    if numerics.ode_tol <= 0 or numerics.bisect_tol <= 0 or numerics.beta <= 0:
        raise ConfigError("[numerics] tolerances and beta must be positive")
    if numerics.M_max < 0 or numerics.M_check < 0:
        raise ConfigError("[numerics] M_max and M_check must be nonnegative")
    return numerics


def _build_output(data: dict) -> OutputSection:
    _require_keys("output", data, set(), {"directory", "formats"})
    formats = data.get("formats", ["csv", "json"])
    if (not isinstance(formats, list) or not formats
            or not set(formats) <= {"csv", "json"}):
        raise ConfigError('[output] formats must be a nonempty subset of ["csv", "json"]')
    directory = data.get("directory", "out")
    if not isinstance(directory, str):
        raise ConfigError("[output] directory must be a string")
    return OutputSection(directory=directory, formats=tuple(formats))


def validate_config(data: dict) -> RunConfig:
    """Build a RunConfig from a parsed TOML tree, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a table")
    unknown = set(data) - {"model", "potential", "numerics", "output"}
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    for section in ("model", "potential"):
        if section not in data:
            raise ConfigError(f"missing [{section}] section")
    numerics = _build_numerics(data.get("numerics", {}))
    return RunConfig(
        model=_build_model(data["model"], numerics.M_check),
        potential=_build_potential(data["potential"]),
        numerics=numerics,
        output=_build_output(data.get("output", {})),
    )


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a TOML run configuration file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return validate_config(data)


def config_to_dict(config: RunConfig) -> dict:
    """Round-trippable plain-dict form of a RunConfig (for the report echo)."""
    model = config.model
    potential = config.potential
    numerics = config.numerics
    out: dict = {
        "model": {
            "d1": model.d1, "d2": model.d2, "g": model.g,
            "omega": list(model.omega), "phi": model.phi,
        },
        "potential": {"kind": potential.kind},
        "numerics": {
            "ode_tol": numerics.ode_tol,
            "bisect_tol": numerics.bisect_tol,
            "box_sizes": list(numerics.box_sizes),
            "M_max": numerics.M_max,
            "M_check": numerics.M_check,
            "beta": numerics.beta,
        },
        "output": {
            "directory": config.output.directory,
            "formats": list(config.output.formats),
        },
    }
    if numerics.quad_points_per_axis is not None:
        out["numerics"]["quad_points_per_axis"] = numerics.quad_points_per_axis
    if potential.kind == "constant":
        out["potential"]["v0"] = potential.values[0]
    elif potential.kind == "piecewise_constant":
        out["potential"]["breakpoints"] = list(potential.breakpoints)
        out["potential"]["values"] = list(potential.values)
    return out
