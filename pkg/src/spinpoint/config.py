"""Run configuration: YAML loading, validation, defaults, and hashing.

A run configuration is a single YAML mapping with the sections below; any
omitted field falls back to the stock setup (the gain set, inertia, and
1000 rad/s spin used throughout the analyses). Unknown keys are rejected
with their full path so typos cannot silently revert to defaults.

The resolved configuration serializes canonically (sorted keys, 17
significant digits) and its SHA-256 prefix stamps every trace file, so
identical configurations produce byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .dynamics import DEFAULT_INERTIA, GainSet, PlantParams
from .flows import SeedSpec
from .integrator import IntegratorConfig
from .trajectory import ManeuverSegment, TrajectoryConfig, default_pointing_maneuver

__all__ = ["RunConfig", "ConfigError", "load_config", "config_hash", "OUTPUT_DIR_ENV"]

OUTPUT_DIR_ENV = "SPINPOINT_OUT_DIR"


class ConfigError(ValueError):
    """Configuration parse or validation failure, with the field path."""


@dataclass
class RunConfig:
    plant: PlantParams
    gains: GainSet
    trajectory: TrajectoryConfig
    integrator: IntegratorConfig
    seeds: SeedSpec
    output_dir: Path
    resolved: dict

    @property
    def hash(self) -> str:
        return config_hash(self.resolved)


def _require_mapping(node, path):
    if not isinstance(node, dict):
        raise ConfigError(f"{path or '<root>'}: expected a mapping")


def _reject_unknown(node: dict, allowed, path):
    for key in node:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            raise ConfigError(f"unknown key: {where}")


def _number(node, key, default, path, minimum=None, strict_min=False):
    val = node.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    val = float(val)
    if minimum is not None:
        if strict_min and not val > minimum:
            raise ConfigError(f"{path}.{key}: must be > {minimum}")
        if not strict_min and not val >= minimum:
            raise ConfigError(f"{path}.{key}: must be >= {minimum}")
    return val


def _integer(node, key, default, path, minimum=1):
    val = node.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{path}.{key}: expected an integer")
    if val < minimum:
        raise ConfigError(f"{path}.{key}: must be >= {minimum}")
    return val


def _default_tree() -> dict:
    traj = default_pointing_maneuver()
    return {
        "plant": {
            "J": DEFAULT_INERTIA.tolist(),
            "m": 0.1, "d": 0.0, "g": 9.81, "c_drag": 0.0, "c_thrust": 0.0,
        },
        "gains": {"lam": 25e6, "eta": 12e3, "gamma": 500.0, "spin_rate": 1000.0},
        "trajectory": {
            "spin": traj.spin,
            "duration": traj.duration,
            "segments": [
                {"axis": seg.axis.tolist(), "angle": float(seg.angle),
                 "t_start": seg.t_start, "t_end": seg.t_end}
                for seg in traj.segments
            ],
        },
        "integrator": {"h": 1e-5, "reorthonormalize_every": 100, "record_decimation": 1},
        "seeds": {
            "equilibrium": "antipodal", "eps": 1e-6, "spin_eps": 1e-6,
            "mix": [1.0, 1.0], "count": 10, "spin_vector_mode": "structural-zero",
        },
        "output_dir": ".",
    }


def _merge(defaults: dict, user: dict, path=""):
    """Defaults overlaid with user values; unknown user keys rejected."""
    _reject_unknown(user, defaults.keys(), path)
    out = {}
    for key, dval in defaults.items():
        here = f"{path}.{key}" if path else str(key)
        if key not in user:
            out[key] = dval
        elif isinstance(dval, dict):
            _require_mapping(user[key], here)
            out[key] = _merge(dval, user[key], here)
        else:
            out[key] = user[key]
    return out


def _build(resolved: dict) -> RunConfig:
    p = resolved["plant"]
    J = np.asarray(p["J"], dtype=float)
    if J.shape != (3, 3):
        raise ConfigError("plant.J: expected a 3x3 matrix")
    try:
        plant = PlantParams(J=J, m=_number(p, "m", 0.1, "plant", 0.0),
                            d=_number(p, "d", 0.0, "plant", 0.0),
                            g=_number(p, "g", 9.81, "plant", 0.0),
                            c_drag=_number(p, "c_drag", 0.0, "plant", 0.0),
                            c_thrust=_number(p, "c_thrust", 0.0, "plant", 0.0))
    except ValueError as exc:
        raise ConfigError(f"plant: {exc}") from exc

    g = resolved["gains"]
    try:
        gains = GainSet(lam=_number(g, "lam", 25e6, "gains", 0.0, True),
                        eta=_number(g, "eta", 12e3, "gains", 0.0, True),
                        gamma=_number(g, "gamma", 500.0, "gains", 0.0, True),
                        spin_rate=_number(g, "spin_rate", 1000.0, "gains"))
    except ValueError as exc:
        raise ConfigError(f"gains: {exc}") from exc

    t = resolved["trajectory"]
    if not isinstance(t["segments"], list):
        raise ConfigError("trajectory.segments: expected a list")
    segs = []
    for i, s in enumerate(t["segments"]):
        _require_mapping(s, f"trajectory.segments[{i}]")
        _reject_unknown(s, {"axis", "angle", "t_start", "t_end"}, f"trajectory.segments[{i}]")
        try:
            segs.append(ManeuverSegment(
                axis=np.asarray(s["axis"], dtype=float),
                angle=float(s["angle"]),
                t_start=float(s["t_start"]), t_end=float(s["t_end"])))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"trajectory.segments[{i}]: {exc}") from exc
    try:
        traj = TrajectoryConfig(segments=segs,
                                spin=_number(t, "spin", 1000.0, "trajectory"),
                                duration=_number(t, "duration", 1.7, "trajectory", 0.0, True))
    except ValueError as exc:
        raise ConfigError(f"trajectory: {exc}") from exc

    i = resolved["integrator"]
    try:
        integ = IntegratorConfig(
            h=_number(i, "h", 1e-5, "integrator", 0.0, True),
            reorthonormalize_every=_integer(i, "reorthonormalize_every", 100, "integrator"),
            record_decimation=_integer(i, "record_decimation", 1, "integrator"))
    except ValueError as exc:
        raise ConfigError(f"integrator: {exc}") from exc

    s = resolved["seeds"]
    mix = s["mix"]
    if not (isinstance(mix, list) and len(mix) == 2):
        raise ConfigError("seeds.mix: expected [real, imag]")
    count = _integer(s, "count", 10, "seeds")
    try:
        seeds = SeedSpec(equilibrium=s["equilibrium"],
                         eps=_number(s, "eps", 1e-6, "seeds", 0.0, True),
                         spin_eps=_number(s, "spin_eps", 1e-6, "seeds", 0.0, True),
                         mix=complex(float(mix[0]), float(mix[1])),
                         angles=2.0 * np.pi * np.arange(count) / count,
                         spin_vector_mode=s["spin_vector_mode"])
    except ValueError as exc:
        raise ConfigError(f"seeds: {exc}") from exc

    out_dir = Path(os.environ.get(OUTPUT_DIR_ENV, resolved["output_dir"]))
    return RunConfig(plant=plant, gains=gains, trajectory=traj, integrator=integ,
                     seeds=seeds, output_dir=out_dir, resolved=resolved)


def load_config(path: str | Path | None = None) -> RunConfig:
    """Load and validate a configuration file; None gives the stock setup."""
    if path is None:
        user = {}
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            user = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed YAML: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("<root>: expected a mapping")
    resolved = _merge(_default_tree(), user)
    return _build(resolved)


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, float):
        return format(obj, ".17g")
    return obj


def config_hash(resolved: dict) -> str:
    """Short SHA-256 of the canonical serialization of a resolved config."""
    payload = json.dumps(_canonical(resolved), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
