"""Seeded random charts, fields and warped products.

All generators draw from a caller-supplied ``numpy.random.Generator`` in a
fixed order, so a seed pins the output.  Positivity is guaranteed by
construction: every metric perturbation is rescaled by a bound of its
sup-norm on the sampling box, so no rejection sampling is needed.
"""
from __future__ import annotations

import itertools
from typing import Optional, Sequence

import numpy as np

from .geometry import ChartManifold, VectorField, make_chart, vector_field
from .warped import BASE, FIBER, FieldPlacement, WarpedProduct, build, placement

BOX = (-0.5, 0.5)


def monomials(nvars: int, degree: int):
    """Exponent tuples of total degree ``<= degree`` in a fixed order."""
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            exps = [0] * nvars
            for i in combo:
                exps[i] += 1
            out.append(tuple(exps))
    return out


def _monomial_text(coords, exps) -> str:
    parts = []
    for c, e in zip(coords, exps):
        if e == 1:
            parts.append(c)
        elif e > 1:
            parts.append(f"{c}^{e}")
    return "*".join(parts)


def poly_text(coords: Sequence[str], coefs, exps_list) -> str:
    terms = []
    for c, exps in zip(coefs, exps_list):
        mono = _monomial_text(coords, exps)
        lit = repr(float(c))
        terms.append(f"({lit})" if not mono else f"({lit})*{mono}")
    return " + ".join(terms) if terms else "0"


def random_polynomial(coords, degree: int, scale: float, rng: np.random.Generator, constant: bool = True):
    """Coefficients uniform in ``[-scale, scale]``; returns ``(text, coefs, exps)``."""
    exps = monomials(len(coords), degree)
    if not constant:
        exps = exps[1:]
    coefs = rng.uniform(-scale, scale, len(exps))
    return poly_text(coords, coefs, exps), coefs, exps


def sup_bound(coefs, exps, half_width: float) -> float:
    """Bound on ``|sum c x^e|`` over the cube ``[-h, h]^n``."""
    return float(sum(abs(c) * half_width ** sum(e) for c, e in zip(coefs, exps)))


def _bounded_perturbation(coords, degree, scale, cap, rng):
    """Polynomial without constant term whose sup-norm on BOX is at most ``cap``."""
    _, coefs, exps = random_polynomial(coords, degree, scale, rng, constant=False)
    bound = sup_bound(coefs, exps, max(abs(BOX[0]), abs(BOX[1])))
    if bound > cap:
        coefs = coefs * (cap / bound)
    return poly_text(coords, coefs, exps)


def random_chart(rng: np.random.Generator, dim: int, prefix: str = "x", scale: float = 0.3, degree: int = 2) -> ChartManifold:
    """Riemannian chart with metric ``I + S(x)``, ``S`` a full symmetric polynomial matrix.

    Each entry of ``S`` is capped at ``0.4/dim`` on the box, so the metric is
    diagonally dominant with eigenvalues at least 0.6.
    """
    coords = [f"{prefix}{i}" for i in range(dim)]
    cap = 0.4 / dim
    rows = []
    for i in range(dim):
        row = []
        for j in range(i, dim):
            pert = _bounded_perturbation(coords, degree, scale, cap, rng)
            row.append(f"1 + {pert}" if i == j else pert)
        rows.append(row)
    return make_chart(coords, rows, box=[BOX] * dim, name=f"random-chart-{dim}")


def random_diagonal_chart(rng: np.random.Generator, dim: int, prefix: str, scale: float = 0.3, degree: int = 2) -> ChartManifold:
    """Diagonal metric ``1 + poly`` per entry, each perturbation capped at 0.5 on the box."""
    coords = [f"{prefix}{i}" for i in range(dim)]
    rows = []
    for i in range(dim):
        row = [f"1 + {_bounded_perturbation(coords, degree, scale, 0.5, rng)}"]
        row += ["0"] * (dim - i - 1)
        rows.append(row)
    return make_chart(coords, rows, box=[BOX] * dim)


def random_field(chart: ChartManifold, rng: np.random.Generator, scale: float = 0.5, degree: int = 2) -> VectorField:
    return vector_field(chart, random_components(chart.coords, rng, scale, degree))


def random_components(coords, rng: np.random.Generator, scale: float = 0.5, degree: int = 2) -> list:
    return [random_polynomial(coords, degree, scale, rng)[0] for _ in coords]


def random_warping(coords, rng: np.random.Generator) -> str:
    """``1 + 0.25 * sum_k l_k^2`` with affine forms ``l_k``; always ``>= 1``."""
    terms = []
    for _ in coords:
        lin = rng.uniform(-1.0, 1.0, len(coords) + 1)
        form = " + ".join([repr(float(lin[0]))] + [f"({float(c)!r})*{x}" for c, x in zip(lin[1:], coords)])
        terms.append(f"({form})^2")
    return "1 + 0.25*(" + " + ".join(terms) + ")"


def random_warped_product(
    seed: int,
    n1: Optional[int] = None,
    n2: Optional[int] = None,
) -> WarpedProduct:
    """Warped product with random diagonal factors and a positive warping function.

    Dimensions default to independent draws from ``{1, 2, 3}``.
    """
    rng = np.random.default_rng(seed)
    dims = rng.integers(1, 4, size=2)
    n1 = int(dims[0]) if n1 is None else n1
    n2 = int(dims[1]) if n2 is None else n2
    base = random_diagonal_chart(rng, n1, "t")
    fiber = random_diagonal_chart(rng, n2, "y")
    f = random_warping(base.coords, rng)
    return build(base, fiber, f)


def random_placement(wp: WarpedProduct, location: str, rng: np.random.Generator, scale: float = 0.5) -> FieldPlacement:
    chart = wp.factor(location)
    return placement(wp, location, random_components(chart.coords, rng, scale))


def coordinate_placement(wp: WarpedProduct, location: str, index: int) -> FieldPlacement:
    chart = wp.factor(location)
    comps = ["1" if i == index else "0" for i in range(chart.dim)]
    return placement(wp, location, comps)


def generator_placements(wp: WarpedProduct, pattern: str, rng: np.random.Generator) -> list:
    """Generators for a placement pattern such as ``"B"``, ``"F"``, ``"BF"``, ``"FF"``.

    Single generators and generators on different factors are random
    polynomial fields (orthogonal automatically across factors).  Two
    generators on the same factor are the first two coordinate fields, which
    are orthogonal because the random factor metrics are diagonal.
    """
    locs = [BASE if c == "B" else FIBER for c in pattern]
    if len(locs) == 2 and locs[0] == locs[1]:
        return [coordinate_placement(wp, locs[0], 0), coordinate_placement(wp, locs[0], 1)]
    # keep generators away from zero: constant term 1 dominates
    out = []
    for loc in locs:
        chart = wp.factor(loc)
        comps = [f"1 + {random_polynomial(chart.coords, 2, 0.3, rng, constant=False)[0]}" if i == 0 else random_polynomial(chart.coords, 2, 0.3, rng)[0] for i in range(chart.dim)]
        out.append(placement(wp, loc, comps))
    return out


__all__ = [
    "BOX",
    "coordinate_placement",
    "generator_placements",
    "monomials",
    "random_chart",
    "random_components",
    "random_diagonal_chart",
    "random_field",
    "random_placement",
    "random_polynomial",
    "random_warped_product",
    "random_warping",
    "sup_bound",
]
