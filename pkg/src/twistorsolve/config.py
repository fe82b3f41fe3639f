"""Run configuration: schema validation, defaults and hashing."""
from __future__ import annotations

import copy
import hashlib
import json
from importlib import resources

import jsonschema

from . import constants

DEFAULTS = {
    "lambdas": [0.1, 0.2, 10.0],
    "grid": {"radius": 0.02, "n": 9, "center": [0.0, 0.0, 0.0]},
    "solver": {
        "N": constants.DEFAULT_N,
        "tol": constants.NEWTON_TOL,
        "max_iters": constants.NEWTON_MAX_ITERS,
        "method": "newton",
        "homotopy_steps": constants.HOMOTOPY_STEPS,
    },
    "gluing": {"kind": "linear"},
    "builder": {"t_max": "auto", "degree": constants.CHEB_DEGREE, "eps1": constants.EPS1,
                "curve": "canonical"},
    "fixture": {"name": "exp", "params": {}},
    "backlund": {"target_lambdas": [0.15, 0.3, 5.0], "order": "zy"},
    "roundtrip": {"N_list": [24, 32, 48]},
    "verify": {"seed": 0, "samples": 20},
}


class ConfigError(ValueError):
    pass


def schema() -> dict:
    text = resources.files("twistorsolve").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


def validate(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from exc


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve(cfg: dict, command: str | None = None) -> dict:
    """Validate and fill in every default so the echoed config is complete."""
    validate(cfg)
    out = _merge(DEFAULTS, cfg)
    if command is not None:
        if "command" in cfg and cfg["command"] != command:
            raise ConfigError(f"config is for {cfg['command']!r}, invoked as {command!r}")
        out["command"] = command
    validate(out)
    return out


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def to_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def lambdas(v) -> tuple:
    return tuple(to_complex(x) for x in v)
