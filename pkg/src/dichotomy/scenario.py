"""Scenario documents: JSON schema, parsing, and round-trip serialization.

Complex payloads (matrices, vectors, tensors) are nested arrays whose
innermost entries are [re, im] pairs, row-major.  Parsing fills every
default so a serialized scenario re-parses to an identical document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ScenarioError

SCHEMA_VERSION = 1

_COMPLEX_PAIR = {"type": "array", "items": {"type": "number"},
                 "minItems": 2, "maxItems": 2}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["generator"],
    "additionalProperties": False,
    "properties": {
        "generator": {
            "type": "array", "minItems": 1,
            "items": {"type": "array", "minItems": 1, "items": _COMPLEX_PAIR},
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "m": {"type": "integer", "minimum": 1},
                "n": {"type": "integer", "minimum": 2},
            },
        },
        "rhs": {
            "type": "array",
            "items": {
                "type": "array", "minItems": 2, "maxItems": 2,
                "prefixItems": [
                    {"type": "number"},
                    {"type": "array", "minItems": 1, "items": _COMPLEX_PAIR},
                ],
            },
        },
        "nonlinearity": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "properties": {
                "tensors": {"type": "array", "items": {"type": "array"}},
                "beta": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "q_nodes": {"type": "integer", "minimum": 64},
                "oversample": {"type": "integer", "minimum": 8},
                "eps_tail": {"type": "number", "exclusiveMinimum": 0},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "maxit": {"type": "integer", "minimum": 1},
                "band_range": {"type": ["array", "null"], "minItems": 2,
                               "maxItems": 2, "items": {"type": "integer"}},
                "dlambda": {"type": "number", "exclusiveMinimum": 0},
                "mode": {"type": "string", "enum": ["green", "band"]},
                "residual_pairs": {"type": "integer", "minimum": 1},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
    },
}

_SOLVER_DEFAULTS = {
    "q_nodes": 256,
    "oversample": 8,
    "eps_tail": 1e-12,
    "tol": 1e-10,
    "maxit": 200,
    "band_range": None,
    "dlambda": 1.0 / 64,
    "mode": "green",
    "residual_pairs": 16,
}


@dataclass
class Scenario:
    """Fully-defaulted scenario; `to_document` round-trips through parse."""

    generator: list
    grid: dict = field(default_factory=lambda: {"m": 16, "n": 4096})
    rhs: list = field(default_factory=list)
    nonlinearity: dict | None = None
    solver: dict = field(default_factory=lambda: dict(_SOLVER_DEFAULTS))
    seed: int = 0

    def to_document(self) -> dict:
        return {
            "generator": self.generator,
            "grid": dict(self.grid),
            "rhs": [[f, [list(pair) for pair in vec]] for f, vec in self.rhs],
            "nonlinearity": None if self.nonlinearity is None
            else {"tensors": self.nonlinearity["tensors"],
                  "beta": self.nonlinearity["beta"]},
            "solver": dict(self.solver),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True)

    # -- numeric views -------------------------------------------------
    def generator_matrix(self) -> np.ndarray:
        return _complex_array(self.generator)

    def rhs_terms(self):
        return [(float(f), _complex_array(vec)) for f, vec in self.rhs]

    def nonlinearity_tensors(self):
        if self.nonlinearity is None:
            return []
        return [_complex_array(t) for t in self.nonlinearity["tensors"]]


def _complex_array(nested) -> np.ndarray:
    arr = np.asarray(nested, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ScenarioError("complex payloads need innermost [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_complex(arr) -> list:
    """Inverse of _complex_array: nested lists with [re, im] leaves."""
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def parse_scenario(source) -> Scenario:
    """Parse a scenario from a path, JSON text, or mapping.

    Validates against the schema (errors carry the offending field path)
    and fills every default explicitly.
    """
    if isinstance(source, dict):
        document = source
    else:
        text = None
        if isinstance(source, Path):
            text = source.read_text()
        elif isinstance(source, str):
            stripped = source.lstrip()
            if stripped.startswith("{"):
                text = source
            else:
                path = Path(source)
                if not path.exists():
                    raise ScenarioError(f"scenario file not found: {source}")
                text = path.read_text()
        else:
            raise ScenarioError(f"cannot parse scenario from {type(source)!r}")
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}") from exc

    try:
        jsonschema.validate(document, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "$" + "".join(f".{p}" if isinstance(p, str) else f"[{p}]"
                             for p in exc.absolute_path)
        raise ScenarioError(f"scenario invalid at {path}: {exc.message}") from exc

    grid = {"m": 16, "n": 4096}
    grid.update(document.get("grid", {}))
    solver = dict(_SOLVER_DEFAULTS)
    solver.update(document.get("solver", {}))
    if solver["band_range"] is not None:
        solver["band_range"] = list(solver["band_range"])
    nonlinearity = document.get("nonlinearity")
    if nonlinearity is not None:
        nonlinearity = {"tensors": nonlinearity.get("tensors", []),
                        "beta": nonlinearity.get("beta", 1.0)}
    scenario = Scenario(
        generator=document["generator"],
        grid=grid,
        rhs=[[float(f), [list(map(float, pair)) for pair in vec]]
             for f, vec in document.get("rhs", [])],
        nonlinearity=nonlinearity,
        solver=solver,
        seed=int(document.get("seed", 0)),
    )
    # reject malformed complex payloads early, with a field name
    try:
        scenario.generator_matrix()
    except ScenarioError as exc:
        raise ScenarioError(f"generator: {exc}") from exc
    if scenario.generator_matrix().shape[0] != scenario.generator_matrix().shape[1]:
        raise ScenarioError("generator: matrix must be square")
    return scenario
