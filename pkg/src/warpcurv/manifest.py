"""Manifest loading and validation.

A manifest is a YAML (or JSON) document describing a warped product, an
optional generating field ``P``, optional (G)QE generators and parameters,
tolerances and sampling settings::

    name: hyperbolic3
    base:
      coords: [t]
      metric: [["1"]]          # upper-triangular or full rows
      box: [[-1, 1]]
    fiber:
      coords: [x, y]
      metric: [["1", "0"], ["1"]]
      box: [[-1, 1], [-1, 1]]
    warping: exp(t)
    P: {on: base, components: ["1"]}          # optional
    generators: {U: {on: base, components: ["1"]}}   # or U1/U2; optional
    qe: {a: 2, b: 0}                           # optional
    tolerances: {identity: 1.0e-7, fit: 1.0e-8}
    sampling: {points: 50, seed: 42}

Every error names the offending field as a dotted path.
"""
from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema
import yaml

from .einstein import QEStructure
from .expr import ExpressionError, ParseError, UnknownIdentifierError, parse
from .geometry import GeometryError, make_chart
from .warped import FieldPlacement, WarpedProduct, build, placement

DEFAULT_TOLERANCES = {"identity": 1e-7, "fit": 1e-8}
DEFAULT_SAMPLING = {"points": 50, "seed": 42}

_EXPR = {"type": ["string", "number"]}
_NUMBER = {"type": "number"}

_CHART = {
    "type": "object",
    "required": ["coords", "metric"],
    "additionalProperties": False,
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "coords": {"type": "array", "minItems": 1, "items": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"}},
        "metric": {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _EXPR}},
        "signature": {"type": "array", "items": {"enum": [1, -1]}},
        "box": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _NUMBER}},
    },
}

_FIELD = {
    "type": "object",
    "required": ["on", "components"],
    "additionalProperties": False,
    "properties": {
        "on": {"enum": ["base", "fiber"]},
        "components": {"type": "array", "minItems": 1, "items": _EXPR},
    },
}

SCHEMA = {
    "type": "object",
    "required": ["base", "fiber", "warping"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "base": _CHART,
        "fiber": _CHART,
        "warping": _EXPR,
        "P": _FIELD,
        "generators": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"U": _FIELD, "U1": _FIELD, "U2": _FIELD},
        },
        "qe": {
            "type": "object",
            "required": ["a", "b"],
            "additionalProperties": False,
            "properties": {"a": _NUMBER, "b": _NUMBER, "c": _NUMBER},
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "identity": {"type": "number", "exclusiveMinimum": 0},
                "fit": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "sampling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "points": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
            },
        },
    },
}


class ManifestError(ValueError):
    """Invalid manifest; ``path`` is the dotted location of the problem."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path or '<root>'}: {reason}")


@dataclass(frozen=True)
class Manifest:
    name: str
    data: dict
    wp: WarpedProduct
    P: Optional[FieldPlacement]
    generators: tuple
    qe: Optional[QEStructure]
    tolerances: dict
    sampling: dict

    @property
    def family(self) -> Optional[str]:
        return None if self.P is None else self.P.location


def _json_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _expr_text(value) -> str:
    return repr(float(value)) if isinstance(value, (int, float)) else str(value)


def _check_expr(text, coords, path: str, other_coords=()):
    try:
        return parse(_expr_text(text), coords)
    except UnknownIdentifierError as exc:
        if exc.name in other_coords:
            raise ManifestError(path, f"refers to coordinate {exc.name!r} of the other factor") from exc
        raise ManifestError(path, str(exc)) from exc
    except ParseError as exc:
        raise ManifestError(path, f"parse error: {exc}") from exc
    except ExpressionError as exc:
        raise ManifestError(path, str(exc)) from exc


def _chart(spec: dict, key: str, other_coords):
    coords = list(spec["coords"])
    n = len(coords)
    if len(set(coords)) != n:
        raise ManifestError(f"{key}.coords", "duplicate coordinate names")
    if "dim" in spec and spec["dim"] != n:
        raise ManifestError(f"{key}.dim", f"dim {spec['dim']} does not match {n} coordinates")
    rows = spec["metric"]
    if len(rows) != n:
        raise ManifestError(f"{key}.metric", f"needs {n} rows, got {len(rows)}")
    for i, row in enumerate(rows):
        if len(row) not in (n, n - i):
            raise ManifestError(f"{key}.metric[{i}]", f"has {len(row)} entries; expected {n} or {n - i}")
        for j, item in enumerate(row):
            _check_expr(item, coords, f"{key}.metric[{i}][{j}]", other_coords)
    if "signature" in spec and len(spec["signature"]) != n:
        raise ManifestError(f"{key}.signature", f"needs {n} entries")
    box = spec.get("box")
    if box is None:
        raise ManifestError(f"{key}.box", "a sampling box is required")
    if len(box) != n:
        raise ManifestError(f"{key}.box", f"needs {n} intervals, got {len(box)}")
    for i, (lo, hi) in enumerate(box):
        if not lo < hi:
            raise ManifestError(f"{key}.box[{i}]", f"empty interval [{lo}, {hi}]")
    try:
        return make_chart(coords, [[_expr_text(x) for x in row] for row in rows], spec.get("signature"), box, key)
    except GeometryError as exc:
        raise ManifestError(f"{key}.metric", str(exc)) from exc


def _placement(wp, spec: dict, path: str):
    loc = spec["on"]
    chart = wp.factor(loc)
    other = wp.fiber if loc == "base" else wp.base
    comps = spec["components"]
    if len(comps) != chart.dim:
        raise ManifestError(f"{path}.components", f"needs {chart.dim} components for the {loc}, got {len(comps)}")
    exprs = [_check_expr(c, chart.coords, f"{path}.components[{i}]", other.coords) for i, c in enumerate(comps)]
    return placement(wp, loc, exprs)


def validate(data) -> Manifest:
    """Schema and semantic validation; returns the built manifest."""
    if not isinstance(data, dict):
        raise ManifestError("", "manifest must be a mapping")
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        path = _json_path(err.absolute_path)
        if err.validator == "required":
            missing = [k for k in err.validator_value if k not in err.instance]
            path = ".".join(filter(None, [path, missing[0]])) if missing else path
        raise ManifestError(path, err.message)
    data = copy.deepcopy(data)
    base = _chart(data["base"], "base", data["fiber"]["coords"])
    fiber = _chart(data["fiber"], "fiber", data["base"]["coords"])
    clash = set(base.coords) & set(fiber.coords)
    if clash:
        raise ManifestError("fiber.coords", f"coordinate names shared with the base: {sorted(clash)}")
    f = _check_expr(data["warping"], base.coords, "warping", fiber.coords)
    wp = build(base, fiber, f)

    P = _placement(wp, data["P"], "P") if "P" in data else None
    gens = data.get("generators", {})
    if "U" in gens and ("U1" in gens or "U2" in gens):
        raise ManifestError("generators", "give either U or U1/U2, not both")
    if ("U1" in gens) != ("U2" in gens):
        raise ManifestError("generators", "U1 and U2 must be given together")
    keys = ["U"] if "U" in gens else (["U1", "U2"] if "U1" in gens else [])
    generators = tuple(_placement(wp, gens[k], f"generators.{k}") for k in keys)

    qe = None
    if "qe" in data:
        q = data["qe"]
        if not generators:
            raise ManifestError("qe", "qe parameters need generators")
        if len(generators) == 1 and q.get("c", 0) != 0:
            raise ManifestError("qe.c", "c requires two generators (U1, U2)")
        qe = QEStructure(
            float(q["a"]),
            float(q["b"]),
            generators[0],
            float(q.get("c", 0.0)),
            generators[1] if len(generators) == 2 else None,
        )
    tolerances = {**DEFAULT_TOLERANCES, **data.get("tolerances", {})}
    sampling = {**DEFAULT_SAMPLING, **data.get("sampling", {})}
    return Manifest(str(data.get("name", "manifest")), data, wp, P, generators, qe, tolerances, sampling)


class _Loader(yaml.SafeLoader):
    """Safe loader with YAML 1.2 booleans, so an unquoted ``on:`` key stays a string."""


_BOOL = "tag:yaml.org,2002:bool"
_Loader.yaml_implicit_resolvers = {
    first: [(tag, rx) for tag, rx in resolvers if tag != _BOOL]
    for first, resolvers in yaml.SafeLoader.yaml_implicit_resolvers.items()
}
_Loader.add_implicit_resolver(_BOOL, re.compile(r"^(?:true|True|TRUE|false|False|FALSE)$"), list("tTfF"))


def load_manifest(path) -> Manifest:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError("", f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise ManifestError("", f"not valid YAML: {exc}") from exc
    return validate(data)


def dump(data: dict) -> str:
    """Canonical YAML text for a manifest mapping."""
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


def to_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True)
