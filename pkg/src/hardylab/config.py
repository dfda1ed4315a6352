"""Run configuration: JSON schemas, defaults and conversion to library objects."""

from __future__ import annotations

import copy
import json
import math

import jsonschema
import numpy as np

from .correcting import PsiValidationError, make_psi
from .disk_core import PolyVecField, ScalarPoly


class ConfigError(ValueError):
    pass


COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "string"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
COEFFS = {"type": "array", "items": COMPLEX, "minItems": 1}
FIELD = {
    "oneOf": [
        {"type": "array", "items": COEFFS, "minItems": 1},
        {
            "type": "object",
            "properties": {
                "coeffs": {"type": "array", "items": COEFFS, "minItems": 1},
                "scale": {"oneOf": [{"type": "number"}, {"const": "sup"}]},
            },
            "required": ["coeffs"],
            "additionalProperties": False,
        },
    ]
}
POS = {"type": "number", "exclusiveMinimum": 0}
POS_INT = {"type": "integer", "minimum": 1}
COUNT = {"type": "integer", "minimum": 0}


def _psi_variant(kind, **props):
    return {
        "type": "object",
        "properties": {"kind": {"const": kind}, **props},
        "required": ["kind"],
        "additionalProperties": False,
    }


PSI = {
    "oneOf": [
        _psi_variant("exp", rate=POS),
        _psi_variant("power", power=POS),
        _psi_variant("step", width=POS, height=POS),
        _psi_variant("iterated_log", depth={"type": "integer", "minimum": 1, "maximum": 3}, alpha=POS),
        {
            **_psi_variant("table", xs={"type": "array", "items": {"type": "number"}},
                           values={"type": "array", "items": {"type": "number"}}),
            "required": ["kind", "xs", "values"],
        },
    ]
}
QUADRATURE = {
    "type": "object",
    "properties": {
        "N_r": {"type": "integer", "minimum": 4},
        "N_theta": {"type": "integer", "minimum": 8},
        "N_b": {"type": "integer", "minimum": 8},
    },
    "additionalProperties": False,
}


def _schema(props):
    base = {"seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}, "quadrature": QUADRATURE}
    return {"type": "object", "properties": {**base, **props}, "additionalProperties": False}


SCHEMAS = {
    "identities": _schema({
        "fields": COUNT,
        "points": COUNT,
        "max_dim": {"type": "integer", "minimum": 2},
        "max_degree": POS_INT,
        "radius": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "min_norm": POS,
        "h": POS,
        "order_steps": {"type": "array", "items": POS, "minItems": 2, "maxItems": 2},
        "closed_form_points": POS_INT,
        "green_degree": {"type": "integer", "minimum": 0},
        "inject_fault": {"type": "boolean"},
    }),
    "correcting-factor": _schema({
        "psi": PSI,
        "rmax": {"oneOf": [POS, {"type": "null"}]},
        "grid_nodes": {"oneOf": [POS_INT, {"type": "null"}]},
        "ratio": {"type": "number", "exclusiveMinimum": 1},
        "tail_tol": POS,
        "moment_weighted": {"type": "boolean"},
        "sample_nodes": COUNT,
        "x_min": {"type": "number", "exclusiveMaximum": 0},
        "domination": {
            "type": "object",
            "properties": {"x_max": POS, "nodes": POS_INT},
            "additionalProperties": False,
        },
    }),
    "embeddings": _schema({
        "f": FIELD,
        "tau": COEFFS,
        "psi": PSI,
        "sections": {
            "type": "object",
            "properties": {
                "count": COUNT,
                "max_degree": {"type": "integer", "minimum": 0},
                "explicit": {"type": "array", "items": FIELD},
            },
            "additionalProperties": False,
        },
        "corpus": {"type": "boolean"},
        "tolerance": POS,
    }),
    "form": _schema({
        "f": FIELD,
        "tau": COEFFS,
        "psi": {"oneOf": [PSI, {"type": "null"}]},
        "h1": FIELD,
        "p2": FIELD,
        "degrees": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 12}},
        "corpus": {"type": "boolean"},
        "pairs": POS_INT,
    }),
    "bezout": _schema({
        "f": FIELD,
        "tau": COEFFS,
        "psi": {"oneOf": [PSI, {"type": "null"}]},
        "degree": {"oneOf": [{"type": "integer", "minimum": 0}, {"type": "null"}]},
        "iterations": POS_INT,
        "g_sup_limit": {"oneOf": [POS, {"type": "null"}]},
        "sweep": {"type": "array", "items": POS},
        "roundtrip": COUNT,
    }),
}

DEMO_FIELD = {"coeffs": [[0, 1], [1, 0]], "scale": "sup"}
DEMO_TAU = [0, 0, 1]

DEFAULTS = {
    "identities": {
        "seed": 0, "fields": 100, "points": 100, "max_dim": 4, "max_degree": 5, "radius": 0.9,
        "min_norm": 0.2, "h": 1e-4, "order_steps": [4e-3, 2e-3], "closed_form_points": 1000,
        "green_degree": 6, "inject_fault": False,
    },
    "correcting-factor": {
        "seed": 0, "psi": {"kind": "exp"}, "rmax": None, "grid_nodes": None, "ratio": 1.05,
        "tail_tol": 1e-8, "moment_weighted": False, "sample_nodes": 4000, "x_min": -1e4,
        "domination": {"x_max": 100.0, "nodes": 10000},
    },
    "embeddings": {
        "seed": 0, "f": DEMO_FIELD, "tau": DEMO_TAU, "psi": {"kind": "exp"},
        "sections": {"count": 20, "max_degree": 4, "explicit": []}, "corpus": False,
        "tolerance": 1e-8,
    },
    "form": {
        "seed": 0, "f": DEMO_FIELD, "tau": DEMO_TAU, "psi": {"kind": "exp"},
        "h1": [[1], [0]], "p2": [[0, 1], [0]], "degrees": [1, 2, 3, 4, 5, 6, 7, 8],
        "corpus": False, "pairs": 10,
    },
    "bezout": {
        "seed": 0, "f": DEMO_FIELD, "tau": DEMO_TAU, "psi": None, "degree": None,
        "iterations": 200, "g_sup_limit": None, "sweep": [], "roundtrip": 0,
    },
}

# the demo Bezout instance has a known bound on the minimal sup norm
DEMO_G_SUP_LIMIT = math.sqrt(2.0) + 1e-9
QUADRATURE_DEFAULT = {"N_r": 64, "N_theta": 256, "N_b": 2048}


def parse_complex(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ConfigError(f"cannot read {v!r} as a complex number") from exc
    return complex(v[0], v[1])


def parse_coeffs(seq):
    return np.array([parse_complex(v) for v in seq], dtype=complex)


def parse_field(params):
    """Coefficient table (one ascending row per component), optionally rescaled."""
    if isinstance(params, dict):
        rows, scale = params["coeffs"], params.get("scale", 1.0)
    else:
        rows, scale = params, 1.0
    f = PolyVecField.from_components(*[parse_coeffs(r) for r in rows])
    if scale == "sup":
        s = f.sup_norm()
        if s == 0:
            raise ConfigError("cannot normalize the zero field")
        return f.scaled(1.0 / s)
    return f.scaled(scale) if scale != 1.0 else f


def parse_tau(seq):
    return ScalarPoly(parse_coeffs(seq))


def parse_psi(params):
    if params is None:
        return None
    try:
        return make_psi(params)
    except (PsiValidationError, TypeError) as exc:
        raise ConfigError(f"invalid psi: {exc}") from exc


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("f", "psi", "h1", "p2"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(command, path=None, text=None):
    """Validated config for ``command`` with defaults filled in."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    raw = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    if text is not None:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc
    cfg = _merge(DEFAULTS[command], raw)
    cfg["quadrature"] = {**QUADRATURE_DEFAULT, **raw.get("quadrature", {})}
    if command == "bezout" and "g_sup_limit" not in raw and "f" not in raw and "tau" not in raw:
        cfg["g_sup_limit"] = DEMO_G_SUP_LIMIT
    return cfg


def parse_quadrature_flag(text):
    """``"Nr,Ntheta,Nb"`` -> quadrature block."""
    try:
        nr, nt, nb = (int(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--quadrature expects Nr,Ntheta,Nb, got {text!r}") from exc
    block = {"N_r": nr, "N_theta": nt, "N_b": nb}
    try:
        jsonschema.validate(block, QUADRATURE)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"--quadrature: {exc.message}") from exc
    return block

