"""Run configuration: JSON files checked against per-subcommand schemas.

Every subcommand reads one JSON object. Defaults are filled in before the
run, and the completed object is stored in the run manifest, so a manifest
can be passed back as a config to repeat the run.
"""

from __future__ import annotations

import copy
import json

import jsonschema

from .estimators import ESTIMATORS
from .stats import DEFAULT_LEVEL, DEFAULT_RESAMPLES
from .wanglandau import DEFAULT_ALPHA, DEFAULT_LN_F_STOP, DEFAULT_SWEEPS


class ConfigError(ValueError):
    pass


_prob = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5}
_nonneg = {"type": "number", "minimum": 0}
_posint = {"type": "integer", "minimum": 1}
_temp = {"oneOf": [{"enum": ["nishimori", "zero"]}, {"type": "number", "exclusiveMinimum": 0}]}

_common = {
    "seed": {"type": "integer", "minimum": 0},
    "output_dir": {"type": "string"},
    "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
    "svg": {"type": "boolean"},
    "workers": _posint,
}

_wl = {
    "type": "object",
    "properties": {"alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                   "ln_f_stop": {"type": "number", "exclusiveMinimum": 0},
                   "sweeps": _posint},
    "additionalProperties": False,
}

_ci = {
    "n_resamples": _posint,
    "level": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
}

SCHEMAS = {
    "sweep": {
        "properties": {
            **_common, **_ci,
            "code": {"const": "torus"},
            "distances": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
            "p": {"type": "array", "items": _prob, "minItems": 1},
            "sigma_p": _nonneg,
            "temperatures": {"type": "array", "items": _temp, "minItems": 1},
            "n_samples": _posint,
            "estimators": {"type": "array", "items": {"enum": list(ESTIMATORS)}, "minItems": 1},
            "ci_methods": {"type": "array", "items": {"enum": ["bootstrap", "jeffreys"]}, "minItems": 1},
            "precision": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 64}},
            "wl": _wl,
        },
        "required": ["seed", "distances", "p"],
    },
    "decode": {
        "properties": {
            **_common, **_ci,
            "code": {"enum": ["torus", "planar", "rotated"]},
            "distances": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
            "p": {"type": "array", "items": _prob, "minItems": 1},
            "sigma_p": _nonneg,
            "n_samples": _posint,
            "ensemble_sigma": {"type": "array", "items": _nonneg},
            "n_ensemble": _posint,
            "mode": {"enum": ["weights", "permutation"]},
            "ci_methods": {"type": "array", "items": {"enum": ["bootstrap", "jeffreys"]}, "minItems": 1},
        },
        "required": ["seed", "distances", "p"],
    },
    "ensemble-opt": {
        "properties": {
            **_common, **_ci,
            "code": {"enum": ["torus", "planar", "rotated"]},
            "distances": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
            "p": {"type": "array", "items": _prob, "minItems": 1},
            "sigma_p": _nonneg,
            "n_samples": _posint,
            "sigmas": {"type": "array", "items": _nonneg, "minItems": 1},
            "n_ensemble": _posint,
        },
        "required": ["seed", "distances", "p", "sigmas"],
    },
    "ci-analysis": {
        "properties": {
            **_common, **_ci,
            "code": {"const": "torus"},
            "distance": {"type": "integer", "minimum": 2},
            "p": _prob,
            "sigma_p": _nonneg,
            "temperature": _temp,
            "n_samples": _posint,
            "fractions": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0,
                                                     "maximum": 1}, "minItems": 2},
            "reference_method": {"enum": ["bootstrap", "jeffreys"]},
            "precision": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 64}},
        },
        "required": ["seed", "distance", "p"],
    },
    "wl": {
        "properties": {
            **_common,
            "code": {"const": "torus"},
            "distance": {"type": "integer", "minimum": 2},
            "p": _prob,
            "sigma_p": _nonneg,
            "sample": {"type": "integer", "minimum": 0},
            "wl": _wl,
        },
        "required": ["seed", "distance", "p"],
    },
}

DEFAULTS = {
    "sweep": {"code": "torus", "sigma_p": 0.0, "temperatures": ["nishimori"], "n_samples": 1000,
              "estimators": list(ESTIMATORS), "ci_methods": ["bootstrap"], "precision": {},
              "wl": {}, "n_resamples": DEFAULT_RESAMPLES, "level": DEFAULT_LEVEL},
    "decode": {"code": "torus", "sigma_p": 0.0, "n_samples": 1000, "ensemble_sigma": [],
               "n_ensemble": 50, "mode": "weights", "ci_methods": ["jeffreys"],
               "n_resamples": DEFAULT_RESAMPLES, "level": DEFAULT_LEVEL},
    "ensemble-opt": {"code": "torus", "sigma_p": 0.0, "n_samples": 1000, "n_ensemble": 50,
                     "n_resamples": DEFAULT_RESAMPLES, "level": DEFAULT_LEVEL},
    "ci-analysis": {"code": "torus", "sigma_p": 0.0, "temperature": "nishimori", "n_samples": 10000,
                    "fractions": [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0],
                    "reference_method": "bootstrap", "precision": {},
                    "n_resamples": DEFAULT_RESAMPLES, "level": DEFAULT_LEVEL},
    "wl": {"code": "torus", "sigma_p": 0.0, "sample": 0, "wl": {}},
}

_COMMON_DEFAULTS = {"output_dir": ".", "svg": False}
WL_DEFAULTS = {"alpha": DEFAULT_ALPHA, "ln_f_stop": DEFAULT_LN_F_STOP, "sweeps": DEFAULT_SWEEPS}


def _set_path(d: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    for k in keys[:-1]:
        d = d.setdefault(k, {})
        if not isinstance(d, dict):
            raise ConfigError(f"{dotted}: {k} is not an object")
    d[keys[-1]] = value


def parse_override(text: str) -> tuple:
    """``key.path=value``; the value is read as JSON, falling back to a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def resolve(command: str, raw: dict, overrides=()) -> dict:
    """Apply overrides, validate, and fill in defaults."""
    if command not in SCHEMAS:
        raise ConfigError(f"no schema for {command!r}")
    cfg = copy.deepcopy(raw)
    if "config" in cfg and "subcommand" in cfg:
        if cfg["subcommand"] != command:
            raise ConfigError(f"manifest is for {cfg['subcommand']!r}, not {command!r}")
        cfg = cfg["config"]
    for key, value in overrides:
        _set_path(cfg, key, value)
    schema = {"type": "object", "additionalProperties": False, **SCHEMAS[command]}
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(cfg), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = e.json_path.replace("$", "config", 1)
        raise ConfigError(f"{where}: {e.message}")
    out = {**_COMMON_DEFAULTS, **copy.deepcopy(DEFAULTS[command]), **cfg}
    out.setdefault("name", command)
    if "wl" in out:
        out["wl"] = {**WL_DEFAULTS, **out["wl"]}
    return out


def load(path: str) -> dict:
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data
