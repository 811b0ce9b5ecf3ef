"""Model configuration: JSON schema, loading, and canonical hashing.

A configuration names the agent polynomial, the coupling polynomial, the
pattern graph, and default certification options. The coupling gain c is a
convenience scalar multiplied into the coupling coefficients at load time,
so the assembled matrices carry it implicitly.
"""

import hashlib
import json

import jsonschema
import numpy as np

from .dynamics import FormationModel, field_from_terms
from .pattern import check_assumption1, cycle_laplacian, eigendecompose, from_edge_list

SCHEMA_VERSION = 1

_TERM_SCHEMA = {
    "type": "object",
    "required": ["row", "coeff", "powers"],
    "properties": {
        "row": {"type": "integer", "minimum": 1},
        "coeff": {"type": "number"},
        "powers": {
            "type": "array",
            "items": {"type": "integer", "minimum": 0},
            "minItems": 1,
        },
    },
    "additionalProperties": False,
}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "n", "N", "agent_terms", "pattern"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "n": {"type": "integer", "minimum": 1},
        "N": {"type": "integer", "minimum": 2},
        "l": {"type": "integer", "minimum": 1},
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "c": {"type": "number"},
        "agent_terms": {"type": "array", "items": _TERM_SCHEMA},
        "coupling_terms": {"type": "array", "items": _TERM_SCHEMA},
        "pattern": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["cycle"],
                    "properties": {"cycle": {"type": "integer", "minimum": 3}},
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "required": ["edges"],
                    "properties": {
                        "edges": {
                            "type": "array",
                            "items": {
                                "type": "array",
                                "minItems": 3,
                                "maxItems": 3,
                                "items": {"type": "number"},
                            },
                        }
                    },
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "required": ["matrix"],
                    "properties": {
                        "matrix": {
                            "type": "array",
                            "items": {"type": "array",
                                      "items": {"type": "number"}},
                        }
                    },
                    "additionalProperties": False,
                },
            ]
        },
        "seed": {"type": "integer"},
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Invalid model configuration (schema, dimensions, or pattern)."""


def canonical_hash(obj):
    """sha256 of the canonical (sorted, compact) JSON encoding."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _build_pattern(data):
    N = data["N"]
    spec = data["pattern"]
    if "cycle" in spec:
        if spec["cycle"] != N:
            raise ConfigError(f"pattern cycle size {spec['cycle']} != N = {N}")
        return cycle_laplacian(N)
    if "edges" in spec:
        return from_edge_list(N, spec["edges"])
    M = np.asarray(spec["matrix"], dtype=float)
    if M.shape != (N, N):
        raise ConfigError(f"pattern matrix shape {M.shape} != ({N}, {N})")
    return M


def parse_model_config(data):
    """(FormationModel, options) from a configuration dict."""
    try:
        jsonschema.validate(data, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc.message}") from exc
    n = data["n"]
    agent_terms = data["agent_terms"]
    c = float(data.get("c", 1.0))
    coupling_terms = [dict(t, coeff=c * float(t["coeff"]))
                      for t in data.get("coupling_terms", [])]
    for t in agent_terms + coupling_terms:
        if len(t["powers"]) != n:
            raise ConfigError(f"term powers {t['powers']} must have length n={n}")
        if t["row"] > n:
            raise ConfigError(f"term row {t['row']} exceeds n={n}")
    degrees = [sum(t["powers"]) for t in agent_terms + coupling_terms]
    d = max([1] + degrees)
    try:
        field_a = field_from_terms(n, agent_terms, d=d)
        field_b = field_from_terms(n, coupling_terms, d=d)
        P = _build_pattern(data)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    violations = check_assumption1(P)
    if violations:
        raise ConfigError("pattern is not admissible: " + ", ".join(violations))
    spectral = eigendecompose(P)
    model = FormationModel(
        name=data.get("name", "model"),
        basis=field_a.basis,
        field_a=field_a,
        field_b=field_b,
        pattern=P,
        spectral=spectral,
        model_hash=canonical_hash(data),
        pattern_hash=canonical_hash(np.asarray(P).tolist()),
    )
    options = {
        "l": int(data.get("l", 6)),
        "epsilon": float(data.get("epsilon", 1.0)),
        "seed": int(data.get("seed", 0)),
        "name": model.name,
    }
    return model, options


def load_model_config(path):
    """Parse a configuration file; raises ConfigError on any input problem."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_model_config(data)
