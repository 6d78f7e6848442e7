"""Config file schema: parsing, defaults, validation, and overrides.

Configs are strict JSON mappings; unknown keys anywhere are errors so typos
cannot silently fall back to defaults. parse_config returns a RunConfig
whose echo field holds the fully defaulted mapping that reproduces the run.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigurationError
from .sampler import HSchedule, InitSpec, RunConfig
from .state import FluidParams
from .targets import target_from_config

__all__ = ["load_config", "parse_config", "apply_overrides"]

_TOP_KEYS = {
    "mode",
    "M",
    "d",
    "T",
    "h",
    "init",
    "target",
    "dt",
    "seed",
    "snapshot_stride",
    "integrator",
    "density_mode",
    "kernel",
    "viscosity_kernel",
    "pressure_variant",
    "force_variant",
    "particle_mass",
    "fluid",
}
_REQUIRED = {"mode", "M", "T", "target"}

# Documented fallbacks for the optional structural keys: d is taken from the
# target, h is a constant schedule, init is a standard gaussian proposal.
_DEFAULT_H = 0.3

_FLUID_KEYS = {
    "c0",
    "rho0",
    "gamma",
    "viscosity_mode",
    "mu",
    "visc_alpha",
    "a_d",
    "alpha_scale",
    "eps_p",
    "eps_sing",
    "gravity",
    "regularization",
    "rho_min",
    "internal_pressure_weight",
}


def _check_keys(mapping: dict, allowed: set, where: str):
    if not isinstance(mapping, dict):
        raise ConfigurationError(f"{where} must be a mapping, got {type(mapping).__name__}")
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigurationError(f"unknown {where} keys: {sorted(unknown)}")


def _int(raw: dict, key: str, where: str = "config") -> int:
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{where} key {key!r} must be an integer, got {value!r}")
    return value


def _number(value, key: str, where: str = "config") -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{where} key {key!r} must be a number, got {value!r}")
    return float(value)


def _parse_h(raw) -> HSchedule:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return HSchedule(kind="constant", start=float(raw))
    _check_keys(raw, {"schedule", "start", "end"}, "h")
    if "start" not in raw:
        raise ConfigurationError("h mapping requires 'start'")
    kind = raw.get("schedule", "constant")
    end = raw.get("end")
    return HSchedule(
        kind=kind,
        start=_number(raw["start"], "start", "h"),
        end=None if end is None else _number(end, "end", "h"),
    )


def _parse_init(raw) -> InitSpec:
    _check_keys(raw, {"type", "low", "high", "mean", "sd", "symmetrize"}, "init")
    kind = raw.get("type")
    symmetrize = raw.get("symmetrize", False)
    if not isinstance(symmetrize, bool):
        raise ConfigurationError("init key 'symmetrize' must be a boolean")
    if kind == "uniform":
        if "low" not in raw or "high" not in raw:
            raise ConfigurationError("uniform init requires 'low' and 'high'")
        if "mean" in raw or "sd" in raw:
            raise ConfigurationError("uniform init takes only 'low', 'high', 'symmetrize'")
        return InitSpec.uniform(raw["low"], raw["high"], symmetrize=symmetrize)
    if kind == "gaussian":
        if "mean" not in raw or "sd" not in raw:
            raise ConfigurationError("gaussian init requires 'mean' and 'sd'")
        if "low" in raw or "high" in raw:
            raise ConfigurationError("gaussian init takes only 'mean', 'sd', 'symmetrize'")
        return InitSpec.gaussian(raw["mean"], raw["sd"], symmetrize=symmetrize)
    raise ConfigurationError(f"unknown init type {kind!r} (expected 'uniform' or 'gaussian')")


def _parse_fluid(raw: dict) -> FluidParams:
    _check_keys(raw, _FLUID_KEYS, "fluid")
    kwargs = dict(raw)
    if "regularization" in kwargs and not isinstance(kwargs["regularization"], bool):
        raise ConfigurationError("fluid key 'regularization' must be a boolean")
    for key, value in kwargs.items():
        if key in ("viscosity_mode", "regularization", "gravity", "rho_min"):
            continue
        kwargs[key] = _number(value, key, "fluid")
    if kwargs.get("gravity") is not None:
        kwargs["gravity"] = tuple(_number(v, "gravity", "fluid") for v in kwargs["gravity"])
    if kwargs.get("rho_min") is not None:
        kwargs["rho_min"] = _number(kwargs["rho_min"], "rho_min", "fluid")
    return FluidParams(**kwargs)


def parse_config(raw: dict) -> RunConfig:
    """Validate a config mapping, fill defaults, and build the RunConfig."""
    _check_keys(raw, _TOP_KEYS, "config")
    missing = _REQUIRED - set(raw)
    if missing:
        raise ConfigurationError(f"missing required config keys: {sorted(missing)}")

    target = target_from_config(raw["target"])
    d = _int(raw, "d") if "d" in raw else target.dim
    h_schedule = _parse_h(raw["h"]) if "h" in raw else HSchedule(kind="constant", start=_DEFAULT_H)
    if "init" in raw:
        init = _parse_init(raw["init"])
    else:
        init = InitSpec.gaussian([0.0] * d, [1.0] * d)
    fluid = _parse_fluid(raw.get("fluid", {}))

    dt = raw.get("dt", "auto")
    if dt != "auto":
        dt = _number(dt, "dt")
    particle_mass = raw.get("particle_mass")
    if particle_mass is not None:
        particle_mass = _number(particle_mass, "particle_mass")

    config = RunConfig(
        mode=raw["mode"],
        M=_int(raw, "M"),
        d=d,
        T=_int(raw, "T"),
        h_schedule=h_schedule,
        init=init,
        target=target,
        fluid=fluid,
        dt=dt,
        integrator=raw.get("integrator", "semi_implicit"),
        density_mode=raw.get("density_mode", "summation"),
        kernel=raw.get("kernel", "cubic_spline"),
        viscosity_kernel=raw.get("viscosity_kernel"),
        pressure_variant=raw.get("pressure_variant", "neg_log"),
        force_variant=raw.get("force_variant", "score"),
        seed=_int(raw, "seed") if "seed" in raw else 0,
        snapshot_stride=_int(raw, "snapshot_stride") if "snapshot_stride" in raw else None,
        particle_mass=particle_mass,
    )
    object.__setattr__(config, "echo", _echo(config, raw))
    return config


def _echo(config: RunConfig, raw: dict) -> dict:
    """The normalized config: every default materialized, enums as strings."""
    fluid = config.fluid
    return {
        "mode": config.mode.value,
        "M": config.M,
        "d": config.d,
        "T": config.T,
        "dt": config.dt,
        "seed": config.seed,
        "snapshot_stride": config.snapshot_stride,
        "integrator": config.integrator.value,
        "density_mode": config.density_mode.value,
        "kernel": config.kernel.value,
        "viscosity_kernel": None if config.viscosity_kernel is None else config.viscosity_kernel.value,
        "pressure_variant": config.pressure_variant.value,
        "force_variant": config.force_variant.value,
        "particle_mass": config.particle_mass,
        "h": {"schedule": config.h_schedule.kind, "start": config.h_schedule.start, "end": config.h_schedule.end},
        "init": _init_echo(config.init),
        "target": raw["target"],
        "fluid": {
            "c0": fluid.c0,
            "rho0": fluid.rho0,
            "gamma": fluid.gamma,
            "viscosity_mode": fluid.viscosity_mode.value,
            "mu": fluid.mu,
            "visc_alpha": fluid.visc_alpha,
            "a_d": fluid.a_d,
            "alpha_scale": fluid.alpha_scale,
            "eps_p": fluid.eps_p,
            "eps_sing": fluid.eps_sing,
            "gravity": None if fluid.gravity is None else list(fluid.gravity),
            "regularization": fluid.regularization,
            "rho_min": fluid.rho_min,
            "internal_pressure_weight": fluid.internal_pressure_weight,
        },
    }


def _init_echo(init: InitSpec) -> dict:
    if init.kind == "uniform":
        return {"type": "uniform", "low": list(init.low), "high": list(init.high), "symmetrize": init.symmetrize}
    return {"type": "gaussian", "mean": list(init.mean), "sd": list(init.sd), "symmetrize": init.symmetrize}


def apply_overrides(raw: dict, assignments: list[str]) -> dict:
    """Apply --set overrides like fluid.c0=2.0 to a raw config mapping.

    Values parse as JSON when possible, else as strings. Intermediate
    mappings are created on demand; validation happens afterwards in
    parse_config.
    """
    out = json.loads(json.dumps(raw))
    for item in assignments:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form key=value")
        path, _, literal = item.partition("=")
        keys = [k for k in path.strip().split(".") if k]
        if not keys:
            raise ConfigurationError(f"override {item!r} has an empty key path")
        try:
            value = json.loads(literal)
        except json.JSONDecodeError:
            value = literal
        node = out
        for key in keys[:-1]:
            nxt = node.get(key)
            if nxt is None:
                nxt = node[key] = {}
            elif not isinstance(nxt, dict):
                raise ConfigurationError(f"override {item!r} descends through non-mapping key {key!r}")
            node = nxt
        node[keys[-1]] = value
    return out


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigurationError("config file must contain a JSON object")
    return raw
