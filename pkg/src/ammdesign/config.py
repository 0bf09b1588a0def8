"""JSON run configuration shared by every CLI command."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import jsonschema

from . import dist as dist_mod
from . import update as update_mod
from .mechanism import DemandCurve, demand_from_dict


class ConfigError(ValueError):
    pass


_OBJ = {"type": "object", "required": ["kind"], "properties": {"kind": {"type": "string"}}}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["distribution", "update_rule", "p0"],
    "properties": {
        "distribution": _OBJ,
        "update_rule": _OBJ,
        "p0": {"type": "number", "exclusiveMinimum": 0},
        "demand_curve": _OBJ,
        "sweep": {
            "type": "object", "additionalProperties": False,
            "properties": {"lambdas": {"type": "array", "minItems": 1,
                                       "items": {"type": "number", "minimum": 0, "maximum": 1}}},
        },
        "sim": {
            "type": "object", "additionalProperties": False,
            "properties": {"rounds": {"type": "integer", "minimum": 1},
                           "seed": {"type": "integer"},
                           "resolve_each_round": {"type": "boolean"}},
        },
        "oracle": {
            "type": "object", "additionalProperties": False,
            "properties": {"grid_n": {"type": "integer", "minimum": 64}},
        },
    },
}

DEFAULT_LAMBDAS = [round(0.1 * k, 1) for k in range(11)]


@dataclass
class RunConfig:
    distribution: dist_mod.PriceDistribution
    update_rule: update_mod.UpdateRule
    p0: float
    demand_curve: Optional[DemandCurve] = None
    lambdas: list = field(default_factory=lambda: list(DEFAULT_LAMBDAS))
    rounds: int = 1000
    seed: int = 0
    resolve_each_round: bool = True
    grid_n: int = 512


def _path(err):
    return "$" + "".join(f"[{p!r}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def parse_config(obj) -> RunConfig:
    """Validate a decoded JSON document and build the run objects."""
    try:
        jsonschema.validate(obj, SCHEMA)
    except jsonschema.ValidationError as err:
        raise ConfigError(f"{_path(err)}: {err.message}") from None
    try:
        d = dist_mod.from_dict(obj["distribution"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"$.distribution: {exc}") from None
    try:
        u = update_mod.from_dict(obj["update_rule"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"$.update_rule: {exc}") from None
    g = None
    if "demand_curve" in obj:
        try:
            g = demand_from_dict(obj["demand_curve"])
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"$.demand_curve: {exc}") from None
    cfg = RunConfig(d, u, float(obj["p0"]), g)
    cfg.lambdas = list(obj.get("sweep", {}).get("lambdas", DEFAULT_LAMBDAS))
    sim = obj.get("sim", {})
    cfg.rounds = sim.get("rounds", cfg.rounds)
    cfg.seed = sim.get("seed", cfg.seed)
    cfg.resolve_each_round = sim.get("resolve_each_round", cfg.resolve_each_round)
    cfg.grid_n = obj.get("oracle", {}).get("grid_n", cfg.grid_n)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
                          f"{exc.msg}") from None
    return parse_config(obj)
