"""Experiment configuration: presets, JSON ingestion, dotted overrides, validation."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .geometry import FrontEndOptics, ScenarioGeometry
from .modulation import LinkBudget, LowPassChain, ModulationConfig, thermal_noise_n0
from .montecarlo import RoomLayout
from .network_stats import ApField, Scenario
from .pathloss_stats import POSES, OrientationModel


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


# Angles are stored in radians; a key "<name>_deg" is accepted wherever "<name>" is an angle.
ANGLE_KEYS = {
    ("optics", "half_power_semiangle"),
    ("optics", "fov"),
    ("orientation", "mu_L"),
    ("orientation", "sigma_L"),
}

DEFAULTS = {
    "geometry": {"z_a": 3.0, "z_u": 0.75, "z_b": 1.7, "l_b": 0.15, "r_ub": 0.3},
    "optics": {
        "half_power_semiangle": math.radians(60.0),
        "pd_area": 7.1e-6,
        "refractive_index": 1.5,
        "fov": math.radians(50.0),
    },
    "orientation": {"pose": "sitting", "mu_L": None, "sigma_L": None},
    "blockers": {"lambda_b": 0.1},
    "network": {"lambda_a": 0.1, "layout": "infinite-ppp", "side": 10.0, "shared_blockers": False},
    "link_budget": {"delta_p_o": 0.44, "f_lambda": 6.0, "temperature": 290.0, "load_resistance": 50.0},
    "modulation": {
        "fft_size": 512,
        "cp_length": 16,
        "m_max": 32,
        "target_ber": 3.8e-3,
        "fixed_bandwidth": 100e6,
        "f_c_led": 35e6,
        "f_c_pd": 230e6,
    },
    "run": {
        "seed": 42,
        "trials": 100_000,
        "workers": 1,
        "r": 0.7,
        "t_points": 200,
        "xi_db": "40:120:400",
        "lambda_a_sweep": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
    },
}

PRESETS = {
    "table1": {},
    "table3-sitting": {},
    "table3-standing": {"geometry": {"z_u": 1.25}, "orientation": {"pose": "standing"}},
    "fig4-default": {"blockers": {"lambda_b": 0.5}, "run": {"r": 0.7}},
}


def _merge(base: dict, update: dict, path: str = "") -> None:
    for key, value in update.items():
        where = f"{path}.{key}" if path else key
        section = path.split(".")[0] if path else None
        if key.endswith("_deg") and section and (section, key[:-4]) in ANGLE_KEYS:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{where}: expected a number of degrees, got {value!r}")
            base[key[:-4]] = math.radians(value)
            continue
        if key not in base:
            raise ConfigError(f"{where}: unknown key")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}: expected an object")
            _merge(base[key], value, where)
        else:
            base[key] = value


def _parse_scalar(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(doc: dict, assignment: str) -> None:
    """Apply one ``section.key=value`` override; the value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ConfigError(f"{assignment}: override must look like section.key=value")
    dotted, raw = assignment.split("=", 1)
    parts = dotted.strip().split(".")
    if len(parts) < 2:
        raise ConfigError(f"{dotted}: override path needs a section and a key")
    nested = _parse_scalar(raw.strip())
    for part in reversed(parts):
        nested = {part: nested}
    _merge(doc, nested)


@dataclass(frozen=True)
class ExperimentConfig:
    geom: ScenarioGeometry
    optics: FrontEndOptics
    orient: OrientationModel
    lambda_b: float
    lambda_a: float
    layout: RoomLayout
    shared_blockers: bool
    budget: LinkBudget
    modulation: ModulationConfig
    chain: LowPassChain
    run: dict
    raw: dict

    def scenario(self, lambda_a: float | None = None, fov: float | None = None) -> Scenario:
        optics = self.optics
        if fov is not None:
            optics = FrontEndOptics(optics.half_power_semiangle, optics.pd_area, optics.refractive_index, fov)
        la = self.lambda_a if lambda_a is None else lambda_a
        return Scenario(self.geom, optics, self.orient, self.lambda_b,
                        ApField.for_optics(la, self.geom, optics), self.budget)


def _number(doc, section, key, positive=False, integer=False):
    value = doc[section][key]
    where = f"{section}.{key}"
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{where}: must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _build(section: str, fn):
    try:
        return fn()
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


def build_config(doc: dict) -> ExperimentConfig:
    """Validate a fully merged document and construct the model objects."""
    g = doc["geometry"]
    geom = _build("geometry", lambda: ScenarioGeometry(**{k: _number(doc, "geometry", k) for k in g}))
    optics = _build("optics", lambda: FrontEndOptics(
        half_power_semiangle=_number(doc, "optics", "half_power_semiangle"),
        pd_area=_number(doc, "optics", "pd_area"),
        refractive_index=_number(doc, "optics", "refractive_index"),
        fov=_number(doc, "optics", "fov"),
    ))

    o = doc["orientation"]
    pose = o["pose"]
    if pose == "custom":
        if o["mu_L"] is None or o["sigma_L"] is None:
            raise ConfigError("orientation: custom pose needs mu_L and sigma_L")
        orient = _build("orientation", lambda: OrientationModel(
            _number(doc, "orientation", "mu_L"), _number(doc, "orientation", "sigma_L"), "custom"))
    elif pose in POSES:
        if o["mu_L"] is not None or o["sigma_L"] is not None:
            raise ConfigError("orientation: mu_L/sigma_L require pose 'custom'")
        orient = OrientationModel.for_pose(pose)
    else:
        raise ConfigError(f"orientation.pose: unknown pose {pose!r}")

    lambda_b = _number(doc, "blockers", "lambda_b")
    if lambda_b < 0:
        raise ConfigError("blockers.lambda_b: must be non-negative")
    lambda_a = _number(doc, "network", "lambda_a", positive=True)
    n = doc["network"]
    layout = _build("network.layout", lambda: RoomLayout(n["layout"], _number(doc, "network", "side", positive=True)))
    if not isinstance(n["shared_blockers"], bool):
        raise ConfigError("network.shared_blockers: expected true or false")

    budget = _build("link_budget", lambda: LinkBudget(
        delta_p_o=_number(doc, "link_budget", "delta_p_o", positive=True),
        f_lambda=_number(doc, "link_budget", "f_lambda", positive=True),
        n0=thermal_noise_n0(_number(doc, "link_budget", "temperature", positive=True),
                            _number(doc, "link_budget", "load_resistance", positive=True)),
    ))

    m_max = _number(doc, "modulation", "m_max", integer=True)
    if m_max < 2 or m_max & (m_max - 1):
        raise ConfigError(f"modulation.m_max: must be a power of two >= 2, got {m_max}")
    modulation = _build("modulation", lambda: ModulationConfig.up_to(
        m_max,
        target_ber=_number(doc, "modulation", "target_ber"),
        cp_length=_number(doc, "modulation", "cp_length", integer=True),
        fixed_bandwidth=_number(doc, "modulation", "fixed_bandwidth", positive=True),
    ))
    chain = _build("modulation", lambda: LowPassChain(
        _number(doc, "modulation", "f_c_led", positive=True),
        _number(doc, "modulation", "f_c_pd", positive=True),
        _number(doc, "modulation", "fft_size", integer=True),
    ))

    run = dict(doc["run"])
    for key in ("seed", "trials", "workers", "t_points"):
        run[key] = _number(doc, "run", key, integer=True)
    if run["seed"] < 0 or run["seed"] >= 2**64:
        raise ConfigError("run.seed: must be an unsigned 64-bit integer")
    if run["trials"] < 1:
        raise ConfigError("run.trials: must be >= 1")
    if run["workers"] < 1:
        raise ConfigError("run.workers: must be >= 1")
    run["r"] = _number(doc, "run", "r")
    if run["r"] < 0:
        raise ConfigError("run.r: must be non-negative")
    run["xi_db"] = parse_range(run["xi_db"], "run.xi_db")
    sweep = run["lambda_a_sweep"]
    if not isinstance(sweep, list) or not sweep or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in sweep):
        raise ConfigError("run.lambda_a_sweep: expected a non-empty list of positive numbers")

    return ExperimentConfig(geom, optics, orient, lambda_b, lambda_a, layout, n["shared_blockers"],
                            budget, modulation, chain, run, doc)


def parse_range(spec, where: str = "range"):
    """Parse ``lo:hi:n`` into (lo, hi, n)."""
    if isinstance(spec, (list, tuple)) and len(spec) == 3:
        parts = list(spec)
    elif isinstance(spec, str):
        parts = spec.split(":")
    else:
        raise ConfigError(f"{where}: expected 'lo:hi:n'")
    if len(parts) != 3:
        raise ConfigError(f"{where}: expected 'lo:hi:n', got {spec!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected 'lo:hi:n', got {spec!r}") from None
    if n < 1 or hi < lo:
        raise ConfigError(f"{where}: need n >= 1 and hi >= lo, got {spec!r}")
    return lo, hi, n


def load_document(path: str | None = None, preset: str | None = None, overrides=()) -> dict:
    """Defaults, then preset, then the JSON file, then dotted overrides."""
    doc = copy.deepcopy(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"preset: unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
        _merge(doc, copy.deepcopy(PRESETS[preset]))
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config: file not found: {path}")
        try:
            user = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config: top level must be an object")
        _merge(doc, user)
    for item in overrides:
        apply_override(doc, item)
    return doc


def parse_config(path: str | None = None, preset: str | None = None, overrides=()) -> ExperimentConfig:
    return build_config(load_document(path, preset, overrides))
