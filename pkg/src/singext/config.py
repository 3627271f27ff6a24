"""Run configuration: JSON schema, parsing into model objects, canonical hash."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema
import numpy as np

from .amodel import ThetaRelation
from .errors import ConfigurationError
from .gram import GramSpec, antitriangular_gram
from .model_space import SingularFamily
from .spectral import SpectralOperator

SCHEMA_ID = "singular-ext/1"

_NUM = {"type": "number"}
_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _COMPLEX}}

CONFIG_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema", "operator", "family", "gram"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "operator": {
            "type": "object",
            "required": ["law", "z1"],
            "additionalProperties": False,
            "properties": {
                "law": {"enum": ["power", "explicit"]},
                "a": _NUM,
                "p": _NUM,
                "b": _NUM,
                "N": {"type": "integer", "minimum": 2},
                "z1": _NUM,
                "eigenvalues": {"type": "array", "items": _NUM, "minItems": 2},
            },
        },
        "family": {
            "type": "object",
            "required": ["m"],
            "additionalProperties": False,
            "properties": {
                "m": {"type": "integer", "minimum": 1},
                "d": {"type": "integer", "minimum": 1},
                "law": {"enum": ["power", "explicit"]},
                "scales": {"type": "array", "items": _NUM},
                "gamma": _NUM,
                "delta": _NUM,
                "coeffs": _MATRIX,
            },
        },
        "gram": {
            "type": "object",
            "required": ["mode"],
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["tilde", "explicit", "antitriangular"]},
                "matrix": _MATRIX,
                "hankel": {"type": "array"},
            },
        },
        "theta": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"scalar": _NUM, "X": _MATRIX, "Y": _MATRIX},
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"points": {"type": "array", "items": _COMPLEX, "minItems": 1}},
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "pairing": _NUM,
                "simplicity": _NUM,
                "negativity": _NUM,
                "identity": _NUM,
            },
        },
        "seed": {"type": "integer"},
    },
}

DEFAULT_TOLERANCES = {"pairing": 1e-6, "simplicity": 1e-6, "negativity": 1e-9, "identity": 1e-8}


def to_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def to_matrix(rows) -> np.ndarray:
    out = np.array([[to_complex(v) for v in row] for row in rows], dtype=complex)
    if len({len(r) for r in rows}) != 1:
        raise ConfigurationError("matrix rows have different lengths")
    return out


def complex_json(z) -> List[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(raw: Dict[str, Any]) -> str:
    return hashlib.sha256(canonical_json(raw).encode()).hexdigest()


@dataclass
class ModelConfig:
    raw: Dict[str, Any]
    op: SpectralOperator
    fam: SingularFamily
    gram: GramSpec
    theta: ThetaRelation
    grid: Optional[List[complex]]
    tolerances: Dict[str, float]
    seed: int

    @property
    def sha256(self) -> str:
        return config_hash(self.raw)

    def with_truncation(self, N: int) -> "ModelConfig":
        raw = json.loads(json.dumps(self.raw))
        raw["operator"]["N"] = int(N)
        return build_config(raw)


def _path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def validate(raw: Any):
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        msg = "; ".join(f"{_path(e)}: {e.message}" for e in errors[:5])
        raise ConfigurationError(f"config does not match schema {SCHEMA_ID}: {msg}")


def _operator(block) -> SpectralOperator:
    z1 = float(block["z1"])
    if block["law"] == "power":
        if "eigenvalues" in block:
            raise ConfigurationError("operator: 'eigenvalues' is only valid with law 'explicit'")
        return SpectralOperator.power(block.get("a", 1.0), block.get("p", 2.0), block.get("b", 0.0), block.get("N", 2000), z1)
    if "eigenvalues" not in block:
        raise ConfigurationError("operator: law 'explicit' needs 'eigenvalues'")
    return SpectralOperator.explicit(block["eigenvalues"], z1)


def _family(block, op: SpectralOperator) -> SingularFamily:
    m = int(block["m"])
    law = block.get("law", "power")
    if law == "explicit":
        if "coeffs" not in block:
            raise ConfigurationError("family: law 'explicit' needs 'coeffs'")
        C = to_matrix(block["coeffs"])
        if C.shape[1] != op.N:
            raise ConfigurationError(f"family/coeffs: rows need {op.N} entries, got {C.shape[1]}")
        if "d" in block and block["d"] != C.shape[0]:
            raise ConfigurationError("family: 'd' disagrees with the number of coefficient rows")
        return SingularFamily.explicit(op, m, C)
    return SingularFamily.power_law(
        op, m, int(block.get("d", 1)), block.get("scales"), block.get("gamma"), block.get("delta", 0.5)
    )


def _gram(block, fam: SingularFamily) -> GramSpec:
    m, d = fam.m, fam.d
    mode = block["mode"]
    if mode == "tilde":
        return fam.gram_spec()
    if mode == "explicit":
        if "matrix" not in block:
            raise ConfigurationError("gram: mode 'explicit' needs 'matrix'")
        G = to_matrix(block["matrix"])
        if G.shape != (m * d, m * d):
            raise ConfigurationError(f"gram/matrix: expected {m * d}x{m * d}, got {G.shape[0]}x{G.shape[1]}")
        return GramSpec(G, m, d)
    if "hankel" not in block:
        raise ConfigurationError("gram: mode 'antitriangular' needs 'hankel'")
    H = block["hankel"]
    # d = 1 admits a flat list of m values; otherwise nested (d, d, m)
    flat_list = all(not (isinstance(v, list) and v and isinstance(v[0], list)) for v in H)
    try:
        if d == 1 and flat_list:
            arr = np.array([to_complex(v) for v in H])
        else:
            arr = np.array([[[to_complex(v) for v in cell] for cell in row] for row in H])
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigurationError(f"gram/hankel: malformed entries ({exc})") from exc
    return GramSpec(antitriangular_gram(arr, m), m, d)


def _theta(block, d: int) -> ThetaRelation:
    if not block:
        return ThetaRelation.zero(d)
    if "scalar" in block:
        if "X" in block or "Y" in block:
            raise ConfigurationError("theta: give either 'scalar' or 'X'/'Y'")
        return ThetaRelation.scalar(float(block["scalar"]), d)
    if "X" not in block or "Y" not in block:
        raise ConfigurationError("theta: both 'X' and 'Y' are required")
    th = ThetaRelation(to_matrix(block["X"]), to_matrix(block["Y"]))
    if th.d != d:
        raise ConfigurationError(f"theta: matrices must be {d}x{d}")
    return th


def build_config(raw: Dict[str, Any]) -> ModelConfig:
    validate(raw)
    op = _operator(raw["operator"])
    fam = _family(raw["family"], op)
    gram = _gram(raw["gram"], fam)
    theta = _theta(raw.get("theta"), fam.d)
    grid = raw.get("grid", {}).get("points")
    grid = [to_complex(v) for v in grid] if grid else None
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(raw.get("tolerances", {}))
    return ModelConfig(raw, op, fam, gram, theta, grid, tol, int(raw.get("seed", 0)))


def load_config(path) -> ModelConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc
    return build_config(raw)


def fixture_config(m: int = 2, d: int = 1, N: int = 2000, gram: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Raw config of the reference fixture: lambda_k = k^2, z1 = -1."""
    return {
        "schema": SCHEMA_ID,
        "operator": {"law": "power", "a": 1.0, "p": 2.0, "b": 0.0, "N": N, "z1": -1.0},
        "family": {"m": m, "d": d, "law": "power"},
        "gram": gram or {"mode": "tilde"},
        "seed": 0,
    }
