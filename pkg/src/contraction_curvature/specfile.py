"""JSON operator specs.

A spec is a plain dict tagged by ``kind``.  In memory, scalars are Python
complex numbers and shift override keys are ints; on disk every scalar is an
explicit ``{"re": ..., "im": ...}`` object and override keys are decimal
strings.  :func:`canonical_spec` normalizes either form.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .corpus import build_named, named_params
from .defect import Extension
from .errors import DomainError
from .operators import DenseOperator, DirectSum, Operator, ShiftPower, WeightedShift

_FIELDS = {
    "dense": {"kind", "matrix"},
    "shift": {"kind", "variant", "overrides"},
    "direct_sum": {"kind", "parts"},
    "extension": {"kind", "inner"},
    "named": {"kind", "name", "params"},
}


def _scalar(value) -> complex:
    if isinstance(value, dict):
        if set(value) - {"re", "im"} or "re" not in value:
            raise DomainError(f"scalar must be {{'re', 'im'}}, got keys {sorted(value)}")
        z = complex(float(value["re"]), float(value.get("im", 0.0)))
    elif isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        z = complex(value)
    else:
        raise DomainError(f"not a scalar: {value!r}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("scalars must be finite")
    return z


def canonical_spec(spec: Any) -> dict:
    """Validate a spec tree and return it in the in-memory canonical form."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DomainError("spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind not in _FIELDS:
        raise DomainError(f"unknown spec kind {kind!r}")
    missing = _FIELDS[kind] - set(spec) - {"params", "overrides"}
    if missing:
        raise DomainError(f"{kind} spec is missing {sorted(missing)}")
    unknown = set(spec) - _FIELDS[kind]
    if unknown:
        raise DomainError(f"unknown fields in {kind} spec: {sorted(unknown)}")

    if kind == "dense":
        rows = spec["matrix"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise DomainError("dense matrix must be a non-empty list of rows")
        if any(len(r) != len(rows) for r in rows):
            raise DomainError("dense matrix must be square")
        return {"kind": kind, "matrix": [[_scalar(v) for v in r] for r in rows]}
    if kind == "shift":
        variant = spec["variant"]
        if variant not in ("unilateral", "bilateral"):
            raise DomainError(f"unknown shift variant {variant!r}")
        raw = spec.get("overrides", {})
        if not isinstance(raw, dict):
            raise DomainError("overrides must be an object")
        overrides = {}
        for k, v in raw.items():
            try:
                idx = int(k)
            except (TypeError, ValueError):
                raise DomainError(f"override index {k!r} is not an integer") from None
            overrides[idx] = _scalar(v)
        return {"kind": kind, "variant": variant, "overrides": dict(sorted(overrides.items()))}
    if kind == "direct_sum":
        parts = spec["parts"]
        if not isinstance(parts, list) or not parts:
            raise DomainError("direct_sum needs a non-empty list of parts")
        return {"kind": kind, "parts": [canonical_spec(p) for p in parts]}
    if kind == "extension":
        return {"kind": kind, "inner": canonical_spec(spec["inner"])}
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise DomainError("named params must be an object")
    return {"kind": kind, "name": spec["name"], "params": named_params(spec["name"], params)}


def _to_json(spec: dict) -> dict:
    kind = spec["kind"]
    if kind == "dense":
        return {"kind": kind, "matrix": [[_emit_scalar(v) for v in r] for r in spec["matrix"]]}
    if kind == "shift":
        return {"kind": kind, "variant": spec["variant"],
                "overrides": {str(k): _emit_scalar(v) for k, v in spec["overrides"].items()}}
    if kind == "direct_sum":
        return {"kind": kind, "parts": [_to_json(p) for p in spec["parts"]]}
    if kind == "extension":
        return {"kind": kind, "inner": _to_json(spec["inner"])}
    return {"kind": kind, "name": spec["name"], "params": dict(spec["params"])}


def _emit_scalar(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def spec_to_json(spec: dict) -> dict:
    """JSON-ready form of a spec (scalars as re/im objects)."""
    return _to_json(canonical_spec(spec))


def emit_spec(spec: dict) -> str:
    return json.dumps(spec_to_json(spec), indent=2, sort_keys=True)


def parse_spec(text: str) -> dict:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON: {exc}") from None
    return canonical_spec(payload)


def build_operator(spec: dict) -> Operator:
    spec = canonical_spec(spec)
    kind = spec["kind"]
    if kind == "dense":
        return DenseOperator(np.array(spec["matrix"], dtype=complex))
    if kind == "shift":
        return WeightedShift(spec["variant"], spec["overrides"])
    if kind == "direct_sum":
        return DirectSum([build_operator(p) for p in spec["parts"]])
    if kind == "extension":
        return Extension(build_operator(spec["inner"]))
    return build_named(spec["name"], spec["params"])


def operator_to_spec(T: Operator) -> dict:
    """Spec that rebuilds an operator equal to T."""
    if isinstance(T, DenseOperator):
        return {"kind": "dense", "matrix": [[complex(v) for v in row] for row in T.matrix]}
    if isinstance(T, WeightedShift):
        return {"kind": "shift", "variant": T.variant, "overrides": dict(T.overrides)}
    if isinstance(T, ShiftPower):
        name = "backward_shift" if T.adjoint else "shift_power"
        return {"kind": "named", "name": name, "params": {"m": T.m}}
    if isinstance(T, DirectSum):
        return {"kind": "direct_sum", "parts": [operator_to_spec(p) for p in T.parts]}
    if isinstance(T, Extension):
        return {"kind": "extension", "inner": operator_to_spec(T.inner)}
    raise DomainError(f"no spec form for {type(T).__name__}")


def normalize_dense(spec: dict, tol: float = 1e-9) -> tuple[dict, list[float]]:
    """Divide every dense leaf with norm above ``1 + tol`` by its largest singular value.

    Returns the new spec and the list of scale factors applied.
    """
    spec = canonical_spec(spec)
    scales: list[float] = []

    def walk(s):
        kind = s["kind"]
        if kind == "dense":
            M = np.array(s["matrix"], dtype=complex)
            smax = float(np.linalg.norm(M, 2))
            if smax > 1.0 + tol:
                scales.append(smax)
                M = M / smax
            return {"kind": kind, "matrix": [[complex(v) for v in row] for row in M]}
        if kind == "direct_sum":
            return {"kind": kind, "parts": [walk(p) for p in s["parts"]]}
        if kind == "extension":
            return {"kind": kind, "inner": walk(s["inner"])}
        return s

    return walk(spec), scales
