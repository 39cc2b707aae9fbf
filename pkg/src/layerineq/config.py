"""Run configuration: strict JSON schema, defaults and field-suite expansion."""

from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema

from .domain import DEFAULT_EXTREMA, LayerDomain
from .quadrature import DEFAULT_SURFACE, DEFAULT_VOLUME
from .surface import RadialSurface

_INT = {"type": "integer"}
_NUM = {"type": "number"}
_VEC3 = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}

_SURFACE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "r0"],
    "properties": {
        "kind": {"enum": ["sphere", "harmonic"]},
        "r0": {"type": "number", "exclusiveMinimum": 0},
        "terms": {
            "type": "array",
            "items": {"type": "array", "prefixItems": [_INT, _INT, _NUM], "minItems": 3, "maxItems": 3},
        },
    },
}

_SCALAR = {
    "oneOf": [
        _NUM,
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["constant", "t_power", "random", "polynomial"]},
                "value": _NUM,
                "k": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "degree": {"type": "integer", "minimum": 0, "maximum": 3},
                "terms": {"type": "array", "items": {"type": "array", "minItems": 4, "maxItems": 4}},
            },
        },
    ]
}

_FIELD_KINDS = [
    "zero",
    "constant",
    "identity",
    "rotation",
    "radial",
    "polynomial",
    "random",
    "blend",
    "random_blend",
    "random_suite",
    "random_blend_suite",
]

_BASE_FIELD_PROPS = {
    "kind": {"enum": _FIELD_KINDS},
    "name": {"type": "string"},
    "value": _VEC3,
    "coeffs": {"type": "array", "items": _NUM, "minItems": 1},
    "degree": {"type": "integer", "minimum": 0, "maximum": 3},
    "terms": {"type": "array", "items": {"type": "array", "minItems": 5, "maxItems": 5}},
    "seed": {"type": "integer", "minimum": 0},
    "count": {"type": "integer", "minimum": 1},
    "p": {"type": "integer", "minimum": 1},
    "g": _SCALAR,
}

_FIELD = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        **_BASE_FIELD_PROPS,
        "V": {"type": "object", "additionalProperties": False, "required": ["kind"], "properties": _BASE_FIELD_PROPS},
    },
}


def _int_list(n):
    return {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": n, "maxItems": n}


SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["domain"],
    "properties": {
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "required": ["inner", "outer"],
            "properties": {"inner": _SURFACE, "outer": _SURFACE},
        },
        "resolution": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"extrema": _int_list(2), "volume": _int_list(3), "surface": _int_list(2)},
        },
        "fields": {"type": "array", "items": _FIELD},
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rtol": _NUM,
                "bc_residual": _NUM,
                "identity_residual": _NUM,
                "identity_drop": _NUM,
                "residual_floor": _NUM,
                "sharpness_eps": _NUM,
                "deflation": _NUM,
                "convergence_floor": _NUM,
                "descriptor_change": _NUM,
            },
        },
        "sharpness": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"basis": {"enum": ["radial", "blend"]}, "n_max": {"type": "integer", "minimum": 1}},
        },
        "convergence": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"levels": {"type": "integer", "minimum": 2}, "max_fields": {"type": "integer", "minimum": 0}},
        },
        "seed": {"type": "integer", "minimum": 0},
    },
}

DEFAULT_THRESHOLDS = {
    "rtol": 1e-9,
    "bc_residual": 1e-8,
    "identity_residual": 1e-6,
    "identity_drop": 10.0,
    "residual_floor": 1e-12,
    "sharpness_eps": 1e-6,
    "deflation": 1e-10,
    "convergence_floor": 1e-10,
    "descriptor_change": 1e-6,
}


class ConfigError(ValueError):
    pass


def validate(raw: dict) -> None:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from None


def resolve(raw: dict, seed: int | None = None) -> dict:
    """Validate and fill in defaults; the result is what reports echo back."""
    validate(raw)
    cfg = copy.deepcopy(raw)
    res = cfg.setdefault("resolution", {})
    res.setdefault("extrema", list(DEFAULT_EXTREMA))
    res.setdefault("volume", list(DEFAULT_VOLUME))
    res.setdefault("surface", list(DEFAULT_SURFACE))
    cfg["thresholds"] = {**DEFAULT_THRESHOLDS, **cfg.get("thresholds", {})}
    cfg["sharpness"] = {"basis": "radial", "n_max": 6, **cfg.get("sharpness", {})}
    cfg["convergence"] = {"levels": 3, "max_fields": 2, **cfg.get("convergence", {})}
    if seed is not None:
        cfg["seed"] = int(seed)
    cfg.setdefault("seed", 0)
    for key in ("inner", "outer"):
        surface_from_config(cfg["domain"][key])
    return cfg


def load(path, seed: int | None = None) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return resolve(raw, seed)


def surface_from_config(d: dict) -> RadialSurface:
    terms = d.get("terms", [])
    if d["kind"] == "sphere" and terms:
        raise ConfigError("sphere surfaces take no harmonic terms")
    try:
        return RadialSurface(float(d["r0"]), tuple(tuple(t) for t in terms))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def domain_from_config(cfg: dict) -> LayerDomain:
    return LayerDomain(surface_from_config(cfg["domain"]["inner"]), surface_from_config(cfg["domain"]["outer"]))


def default_fields(cfg: dict, workflow: str) -> list:
    if workflow == "identity":
        return [{"kind": "random_suite", "count": 20, "degree": 3}]
    r_out = float(cfg["domain"]["outer"]["r0"])
    return [
        {"kind": "radial", "coeffs": [r_out, -1.0], "name": "radial(R_out - r)"},
        {"kind": "random_blend_suite", "count": 20, "p": 2},
    ]


def expand_fields(cfg: dict, workflow: str) -> list:
    """Expand suite entries into individual field specs with explicit seeds."""
    entries = cfg.get("fields") or default_fields(cfg, workflow)
    base = int(cfg.get("seed", 0))
    out = []
    for entry in entries:
        kind = entry["kind"]
        if kind == "random_suite":
            start = entry.get("seed", base)
            out += [
                {"kind": "random", "seed": start + k, "degree": entry.get("degree", 3)}
                for k in range(entry.get("count", 20))
            ]
        elif kind == "random_blend_suite":
            start = entry.get("seed", base)
            out += [
                {"kind": "random_blend", "seed": start + k, "p": entry.get("p", 2)}
                for k in range(entry.get("count", 20))
            ]
        elif kind in ("random", "random_blend") and "seed" not in entry:
            out.append({**entry, "seed": base})
        else:
            out.append(dict(entry))
    return out
