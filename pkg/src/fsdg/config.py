"""Run configuration: JSON schema validation and canonical hashing."""

import hashlib
import json

import jsonschema


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "system": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["adr-smooth", "adr-two-regime-x",
                                  "adr-two-regime-y"]},
            },
        },
        "mesh": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "nx": {"type": "integer", "minimum": 1},
                "ny": {"type": "integer", "minimum": 1},
            },
        },
        "degree": {"type": "integer", "minimum": 1},
        "partition": {
            "type": "object",
            "additionalProperties": False,
            "required": ["K"],
            "properties": {"K": {"type": "integer", "minimum": 1}},
        },
        "rom": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "r": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "r_list": {"type": "array", "minItems": 1,
                           "items": {"type": "integer", "minimum": 1}},
            },
        },
        "samples": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "list": {"type": "array", "minItems": 1,
                         "items": {"type": "array",
                                   "items": {"type": "number"}}},
            },
        },
        "snapshots_file": {"type": "string"},
        "repartition": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "indicator": {"enum": ["variance", "grassmannian"]},
                "p_low": {"type": "number", "exclusiveMinimum": 0,
                          "exclusiveMaximum": 100},
                "k": {"const": 2},
                "n_neigh": {"type": "integer", "minimum": 0},
                "r_T": {"type": "integer", "minimum": 1},
                "p_grid": {"type": "array", "minItems": 1,
                           "items": {"type": "number"}},
                "r_list": {"type": "array", "minItems": 2, "maxItems": 2,
                           "items": {"type": "integer", "minimum": 1}},
            },
        },
        "convergence": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "degrees", "sizes"],
            "properties": {
                "kind": {"enum": ["smooth", "polynomial"]},
                "degrees": {"type": "array", "minItems": 1,
                            "items": {"type": "integer", "minimum": 1}},
                "sizes": {"type": "array", "minItems": 1,
                          "items": {"type": "integer", "minimum": 2}},
            },
        },
    },
}


def validate_config(cfg):
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"config schema violation: {e.message}") from e
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    return validate_config(cfg)


def config_hash(cfg, seed=None):
    """SHA-256 of the canonical JSON serialization (plus the effective seed)."""
    payload = {"config": cfg, "seed": seed}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def require(cfg, *keys):
    """Assert that the named top-level sections are present."""
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"config is missing required sections: {missing}")
    return cfg
