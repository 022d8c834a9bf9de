"""Built-in manifests.

Entries are frozen fixtures; ``random-<seed>`` entries are generated on
demand from the seeded warped-product generator.
"""
from __future__ import annotations

import copy
import math
import re

import numpy as np

from .generators import random_components, random_warped_product
from .manifest import Manifest, ManifestError, validate
from .warped import BASE, FIBER, WarpedProduct

TWO_PI = 2 * math.pi
SPHERE_LO, SPHERE_HI = 0.2, math.pi - 0.2

_ENTRIES = {
    "flat-trivial": {
        "name": "flat-trivial",
        "description": "Euclidean plane as a trivial product of two lines.",
        "base": {"coords": ["x"], "metric": [["1"]], "box": [[-1.0, 1.0]]},
        "fiber": {"coords": ["y"], "metric": [["1"]], "box": [[-1.0, 1.0]]},
        "warping": "1",
        "generators": {"U": {"on": "base", "components": ["1"]}},
    },
    "polar-plane": {
        "name": "polar-plane",
        "description": "Flat plane in polar coordinates, rotation field as P on the fiber.",
        "base": {"coords": ["r"], "metric": [["1"]], "box": [[0.5, 2.0]]},
        "fiber": {"coords": ["phi"], "metric": [["1"]], "box": [[0.0, TWO_PI]]},
        "warping": "r",
        "P": {"on": "fiber", "components": ["1"]},
    },
    "unit-sphere-warped": {
        "name": "unit-sphere-warped",
        "description": "Round unit 2-sphere as an interval warped with a circle, f = sin(t).",
        "base": {"coords": ["t"], "metric": [["1"]], "box": [[SPHERE_LO, SPHERE_HI]]},
        "fiber": {"coords": ["phi"], "metric": [["1"]], "box": [[0.0, TWO_PI]]},
        "warping": "sin(t)",
    },
    "hyperbolic2-ssnm": {
        "name": "hyperbolic2-ssnm",
        "description": "Hyperbolic plane dt^2 + e^(2t) dx^2 with P = d/dt on the base.",
        "base": {"coords": ["t"], "metric": [["1"]], "box": [[-1.0, 1.0]]},
        "fiber": {"coords": ["x"], "metric": [["1"]], "box": [[-1.0, 1.0]]},
        "warping": "exp(t)",
        "P": {"on": "base", "components": ["1"]},
    },
    "hyperbolic3": {
        "name": "hyperbolic3",
        "description": "Hyperbolic 3-space dt^2 + e^(2t)(dx^2 + dy^2).",
        "base": {"coords": ["t"], "metric": [["1"]], "box": [[-1.0, 1.0]]},
        "fiber": {"coords": ["x", "y"], "metric": [["1", "0"], ["1"]], "box": [[-1.0, 1.0], [-1.0, 1.0]]},
        "warping": "exp(t)",
        "generators": {"U": {"on": "base", "components": ["1"]}},
    },
    "r-cross-s2": {
        "name": "r-cross-s2",
        "description": "Product of a line with the round unit 2-sphere; U = d/dt.",
        "base": {"coords": ["t"], "metric": [["1"]], "box": [[-1.0, 1.0]]},
        "fiber": {
            "coords": ["theta", "phi"],
            "metric": [["1", "0"], ["sin(theta)^2"]],
            "box": [[SPHERE_LO, SPHERE_HI], [0.0, TWO_PI]],
        },
        "warping": "1",
        "generators": {"U": {"on": "base", "components": ["1"]}},
    },
    "minkowski-flat": {
        "name": "minkowski-flat",
        "description": "Minkowski plane -dt^2 + dx^2.",
        "base": {"coords": ["t"], "metric": [["-1"]], "signature": [-1], "box": [[-1.0, 1.0]]},
        "fiber": {"coords": ["x"], "metric": [["1"]], "box": [[-1.0, 1.0]]},
        "warping": "1",
    },
}

RANDOM_PATTERN = re.compile(r"^random-(\d+)$")


class UnknownCatalogError(ManifestError):
    def __init__(self, name: str):
        super().__init__("catalog", f"unknown catalog entry {name!r}; known: {', '.join(names())}, random-<seed>")


def names() -> list:
    return list(_ENTRIES)


def _chart_dict(chart) -> dict:
    n = chart.dim
    return {
        "coords": list(chart.coords),
        "metric": [[str(chart.metric[i][j]) for j in range(i, n)] for i in range(n)],
        "signature": list(chart.signature),
        "box": [list(b) for b in chart.box],
    }


def warped_to_dict(wp: WarpedProduct, name: str) -> dict:
    return {
        "name": name,
        "base": _chart_dict(wp.base),
        "fiber": _chart_dict(wp.fiber),
        "warping": str(wp.f),
    }


def random_entry(seed: int) -> dict:
    """Random warped product with a random polynomial P placed by the seed's parity."""
    wp = random_warped_product(seed)
    data = warped_to_dict(wp, f"random-{seed}")
    data["description"] = f"Seeded random warped product (seed {seed})."
    rng = np.random.default_rng([seed, 1])
    loc = BASE if seed % 2 == 0 else FIBER
    data["P"] = {"on": loc, "components": random_components(wp.factor(loc).coords, rng)}
    return data


def entry(name: str) -> dict:
    """The raw manifest mapping of a catalog entry (a fresh copy)."""
    if name in _ENTRIES:
        return copy.deepcopy(_ENTRIES[name])
    m = RANDOM_PATTERN.match(name)
    if m:
        return random_entry(int(m.group(1)))
    raise UnknownCatalogError(name)


def catalog(name: str) -> Manifest:
    return validate(entry(name))
