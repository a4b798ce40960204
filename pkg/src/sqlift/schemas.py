"""JSON schemas for the input files, checked with jsonschema before any module sees the data."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import jsonschema

SCHEMA_VERSION = "1"


class InputError(ValueError):
    """Input file is missing, unreadable or violates its schema."""


_rational = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}
_coeff = {"oneOf": [
    _rational,
    {"type": "object", "required": ["order", "coeffs"],
     "properties": {"order": {"type": "integer", "minimum": 1},
                    "coeffs": {"type": "object", "additionalProperties": _rational}}},
    {"type": "object", "required": ["a", "b", "D1"],
     "properties": {"a": _rational, "b": _rational, "D1": {"type": "integer"}}},
]}
_series = {
    "type": "object",
    "required": ["terms"],
    "properties": {
        "denom_lattice": {"type": "integer", "minimum": 1},
        "truncation": {"oneOf": [{"type": "null"}, _rational]},
        "terms": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2,
                                             "prefixItems": [_rational, _coeff]}},
    },
}
_int_key = {"pattern": r"^-?\d+$"}

W_MODULE = {
    "$id": "sqlift/w-module/" + SCHEMA_VERSION,
    "type": "object",
    "required": ["index", "classes"],
    "properties": {
        "index": {"type": "integer", "minimum": 1},
        "classes": {
            "type": "array", "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "order"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "order": {"type": "integer", "minimum": 1},
                    "level": {"type": "integer", "minimum": 1},
                    "powers": {"type": "object", "propertyNames": _int_key, "additionalProperties": {"type": "string"}},
                    "plus_space": {"type": "object", "propertyNames": _int_key, "additionalProperties": _rational},
                    "series": {"type": "object", "propertyNames": _int_key, "additionalProperties": _series},
                    "components": {"type": "object", "propertyNames": _int_key,
                                   "additionalProperties": {"type": "array", "items": {
                                       "type": "array", "minItems": 2, "maxItems": 2}}},
                    "truncation": _rational,
                },
                "oneOf": [{"required": ["plus_space"]}, {"required": ["series"]}, {"required": ["components"]}],
            },
        },
    },
}

FAMILY = {
    "$id": "sqlift/family/" + SCHEMA_VERSION,
    "type": "object",
    "required": ["m", "N", "members"],
    "properties": {
        "m": {"type": "integer"},
        "N": {"type": "integer", "minimum": 1},
        "members": {"type": "object", "propertyNames": _int_key, "additionalProperties": {
            "type": "object", "required": ["components"],
            "properties": {"level": {"type": "integer", "minimum": 1},
                           "components": {"type": "object", "propertyNames": _int_key,
                                          "additionalProperties": _series}}}},
    },
}

_eta_term = {"type": "object", "required": ["eta"],
             "properties": {"coeff": _rational,
                            "eta": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2,
                                                               "prefixItems": [_rational, {"type": "integer"}]}}}}
ENGINE = {
    "$id": "sqlift/engine/" + SCHEMA_VERSION,
    "type": "object",
    "required": ["m", "members"],
    "properties": {
        "m": {"type": "integer", "minimum": 1},
        "members": {"type": "object", "propertyNames": _int_key, "additionalProperties": {
            "type": "object",
            "properties": {"theta": _rational,
                           "components": {"type": "object", "propertyNames": _int_key,
                                          "additionalProperties": {"type": "array", "items": _eta_term}}}}},
    },
}

TRACES = {
    "$id": "sqlift/traces/" + SCHEMA_VERSION,
    "type": "object",
    "required": ["order", "traces"],
    "properties": {
        "order": {"type": "integer", "minimum": 1},
        "traces": {"type": "object", "propertyNames": _int_key, "additionalProperties": {"type": "integer"}},
        "virtual": {"type": "boolean"},
    },
}

CHARACTER_TABLE = {
    "$id": "sqlift/character-table/" + SCHEMA_VERSION,
    "type": "object",
    "required": ["classes", "irreducibles"],
}

SCHEMAS = {"w-module": W_MODULE, "family": FAMILY, "engine": ENGINE, "traces": TRACES,
           "character-table": CHARACTER_TABLE}


def detect_kind(data: Any) -> str:
    if not isinstance(data, dict):
        raise InputError("$: top level must be an object")
    if "classes" in data and "index" in data:
        return "w-module"
    if "members" in data and "N" in data:
        return "family"
    if "members" in data:
        return "engine"
    if "traces" in data:
        return "traces"
    if "irreducibles" in data:
        return "character-table"
    raise InputError("$: cannot tell what kind of input this is (w-module, family, engine, traces, character-table)")


def _path(err: jsonschema.ValidationError) -> str:
    out = "$"
    for p in err.absolute_path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def check(data: Any, kind: str) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMAS[kind])
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        raise InputError(f"{_path(e)}: {e.message}")


def load(path: str | Path, kind: str | None = None) -> tuple[str, Any]:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    kind = kind or detect_kind(data)
    check(data, kind)
    return kind, data
