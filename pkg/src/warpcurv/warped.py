"""Warped products ``B x_f F`` and the base/fiber decompositions of SSNM curvature.

The ambient chart has coordinates ``base ++ fiber`` and metric
``g_B (+) f^2 g_F``.  A generating field P lives on one factor
(:class:`FieldPlacement`); ``pi`` is always the ambient pairing with the lifted
P, so a fiber-placed P carries the ``f^2`` factor.

Decomposition cases, keyed by the factor P lives on (``B*`` for base, ``F*``
for fiber).  Slots ``X, Y, Z`` take base vectors and ``U, V, W`` fiber
vectors, given in factor coordinates.

Curvature ``Rbar(., .).``:

=====  ==================================  ==========================
case   left-hand side                      P
=====  ==================================  ==========================
B1     Rbar(X,Y)Z                          base
B2     Rbar(V,X)Y                          base
B3     Rbar(X,Y)V and Rbar(V,W)X           base
B4     Rbar(X,V)W                          base
B5     Rbar(U,V)W                          base
F1     Rbar(X,Y)Z                          fiber
F2     Rbar(V,X)Y                          fiber
F3     Rbar(X,Y)V                          fiber
F4     Rbar(V,W)X                          fiber
F5     Rbar(X,V)W                          fiber
F6     Rbar(U,V)W                          fiber
=====  ==================================  ==========================

Ricci ``Ricbar(., .)``: B1 (X,Y), B2 (X,V) and (V,X), B3 (V,W); F1 (X,Y),
F2 (X,V), F3 (V,X), F4 (V,W).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .expr import BinOp, Expression, Num, constant, eval_jet2_batch, parse
from .geometry import (
    ChartManifold,
    GeometryError,
    LocalGeometry,
    VectorField,
    contract,
    ricci_from,
    riemann_from,
)
from .ssnm import ConnectionSpec

BASE = "base"
FIBER = "fiber"


class PlacementError(GeometryError):
    pass


@dataclass(frozen=True)
class FieldPlacement:
    location: str
    components: tuple

    def __post_init__(self):
        if self.location not in (BASE, FIBER):
            raise PlacementError(f"placement must be 'base' or 'fiber', got {self.location!r}")


@dataclass(frozen=True)
class WarpedProduct:
    base: ChartManifold
    fiber: ChartManifold
    f: Expression
    ambient: ChartManifold

    @property
    def n1(self) -> int:
        return self.base.dim

    @property
    def n2(self) -> int:
        return self.fiber.dim

    @property
    def n(self) -> int:
        return self.base.dim + self.fiber.dim

    def factor(self, location: str) -> ChartManifold:
        return self.base if location == BASE else self.fiber

    def split(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts[:, : self.n1], pts[:, self.n1 :]


def build(base: ChartManifold, fiber: ChartManifold, f) -> WarpedProduct:
    clash = set(base.coords) & set(fiber.coords)
    if clash:
        raise GeometryError(f"base and fiber share coordinate names {sorted(clash)}")
    if not isinstance(f, Expression):
        # parse over both factors so a fiber reference gets a precise error
        f = parse(str(f), tuple(base.coords) + tuple(fiber.coords))
    stray = set(f.free_vars) - set(base.coords)
    if stray:
        raise GeometryError(f"warping function depends on non-base coordinates {sorted(stray)}")
    f = f.bind(base.coords)
    coords = tuple(base.coords) + tuple(fiber.coords)
    n1, n = base.dim, base.dim + fiber.dim
    zero = constant(0.0, coords)
    f2 = BinOp("^", f.root, Num(2.0))
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i < n1 and j < n1:
                row.append(base.metric[i][j].bind(coords))
            elif i >= n1 and j >= n1:
                gf = fiber.metric[i - n1][j - n1]
                row.append(Expression(BinOp("*", f2, gf.root), coords))
            else:
                row.append(zero)
        rows.append(row)
    grid = tuple(tuple(rows[min(i, j)][max(i, j)] for j in range(n)) for i in range(n))
    box = None
    if base.box is not None and fiber.box is not None:
        box = tuple(base.box) + tuple(fiber.box)
    ambient = ChartManifold(coords, grid, tuple(base.signature) + tuple(fiber.signature), box, "ambient")
    return WarpedProduct(base, fiber, f, ambient)


def placement(wp: WarpedProduct, location: str, components: Sequence) -> FieldPlacement:
    chart = wp.factor(location)
    if len(components) != chart.dim:
        raise PlacementError(f"{location} field needs {chart.dim} components, got {len(components)}")
    exprs = []
    for c in components:
        if isinstance(c, Expression):
            exprs.append(c.bind(chart.coords))
        elif isinstance(c, (int, float)):
            exprs.append(constant(c, chart.coords))
        else:
            exprs.append(parse(str(c), chart.coords))
    return FieldPlacement(location, tuple(exprs))


def zero_placement(wp: WarpedProduct, location: str) -> FieldPlacement:
    return placement(wp, location, [0.0] * wp.factor(location).dim)


def factor_field(wp: WarpedProduct, p: FieldPlacement) -> VectorField:
    chart = wp.factor(p.location)
    return VectorField(chart, tuple(c.bind(chart.coords) for c in p.components))


def lift(wp: WarpedProduct, p: FieldPlacement) -> VectorField:
    """Extend a factor field to the product with zeros in the other block."""
    coords = wp.ambient.coords
    zero = constant(0.0, coords)
    comps = [c.bind(coords) for c in p.components]
    if p.location == BASE:
        full = comps + [zero] * wp.n2
    else:
        full = [zero] * wp.n1 + comps
    return VectorField(wp.ambient, tuple(full))


def lift_vectors(wp: WarpedProduct, location: str, v) -> np.ndarray:
    v = np.atleast_2d(np.asarray(v, dtype=float))
    z = np.zeros(v.shape[:-1] + (wp.n2 if location == BASE else wp.n1,))
    return np.concatenate([v, z] if location == BASE else [z, v], axis=-1)


# --------------------------------------------------------------------------
# Case tables
# --------------------------------------------------------------------------

# case -> (P location, slots, left-hand side argument tuples)
CURVATURE_CASES = {
    "B1": (BASE, "XYZ", ("XYZ",)),
    "B2": (BASE, "VXY", ("VXY",)),
    "B3": (BASE, "XYVW", ("XYV", "VWX")),
    "B4": (BASE, "XVW", ("XVW",)),
    "B5": (BASE, "UVW", ("UVW",)),
    "F1": (FIBER, "XYZ", ("XYZ",)),
    "F2": (FIBER, "VXY", ("VXY",)),
    "F3": (FIBER, "XYV", ("XYV",)),
    "F4": (FIBER, "VWX", ("VWX",)),
    "F5": (FIBER, "XVW", ("XVW",)),
    "F6": (FIBER, "UVW", ("UVW",)),
}

RICCI_CASES = {
    "B1": (BASE, "XY", ("XY",)),
    "B2": (BASE, "XV", ("XV", "VX")),
    "B3": (BASE, "VW", ("VW",)),
    "F1": (FIBER, "XY", ("XY",)),
    "F2": (FIBER, "XV", ("XV",)),
    "F3": (FIBER, "XV", ("VX",)),
    "F4": (FIBER, "VW", ("VW",)),
}

CURVATURE_LABELS = {
    "B1": "Rbar(X,Y)Z = Rbar_B(X,Y)Z",
    "B2": "Rbar(V,X)Y = -[H(X,Y)/f + g(Y,nabla_X P) - pi(X)pi(Y)] V",
    "B3": "Rbar(X,Y)V = Rbar(V,W)X = 0",
    "B4": "Rbar(X,V)W = -g(V,W)[nabla_X grad f/f + (Pf/f) X]",
    "B5": "Rbar(U,V)W = R_F(U,V)W - [|grad f|^2/f^2 + Pf/f][g(V,W)U - g(U,W)V]",
    "F1": "Rbar(X,Y)Z = R_B(X,Y)Z",
    "F2": "Rbar(V,X)Y = -H(X,Y)/f V - pi(V)(Yf/f) X",
    "F3": "Rbar(X,Y)V = pi(V)[(Xf/f)Y - (Yf/f)X]",
    "F4": "Rbar(V,W)X = (Xf/f)[pi(W)V - pi(V)W]",
    "F5": "Rbar(X,V)W = -g(V,W) nabla_X grad f/f + (Xf/f)pi(W)V - g(W,nabla_V P)X + pi(W)pi(V)X",
    "F6": "Rbar(U,V)W = R_F(U,V)W - |grad f|^2/f^2[g(V,W)U - g(U,W)V] + g(W,nabla_U P)V - g(W,nabla_V P)U + pi(W)[pi(V)U - pi(U)V]",
}

RICCI_LABELS = {
    "B1": "Ricbar(X,Y) = Ricbar_B(X,Y) + n2[H(X,Y)/f + g(Y,nabla_X P) - pi(X)pi(Y)]",
    "B2": "Ricbar(X,V) = Ricbar(V,X) = 0",
    "B3": "Ricbar(V,W) = Ric_F(V,W) + [-lap f/f + (n2-1)|grad f|^2/f^2 + (n-1)Pf/f] g(V,W)",
    "F1": "Ricbar(X,Y) = Ric_B(X,Y) + n2 H(X,Y)/f",
    "F2": "Ricbar(X,V) = (n-1) pi(V) Xf/f",
    "F3": "Ricbar(V,X) = (1-n) pi(V) Xf/f",
    "F4": "Ricbar(V,W) = Ric_F(V,W) + g(V,W)[-lap f/f + (n2-1)|grad f|^2/f^2] + (n-1)g(W,nabla_V P) + (1-n)pi(V)pi(W)",
}

SCALAR_LABELS = {
    BASE: "Sbar = Sbar_B - 2n2 lap f/f + S_F/f^2 + n2(n2-1)|grad f|^2/f^2 + n2(n-1)Pf/f - n2 pi(P) + n2 div_B P",
    FIBER: "Sbar = S_B - 2n2 lap f/f + S_F/f^2 + n2(n2-1)|grad f|^2/f^2 + (1-n)pi(P) + (n-1) div_F P",
}


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _col(s):
    return np.asarray(s)[..., None]


class LemmaContext:
    """Factor-level and ambient quantities at a batch of ambient points.

    Everything is computed lazily and shared between the decomposition cases.
    Factor-level connections: with P on the base, base curvature uses the
    base SSNM connection of P and fiber curvature the fiber Levi-Civita
    connection; with P on the fiber, both factors use Levi-Civita and
    ``nabla_V P`` is the ambient Levi-Civita derivative.
    """

    def __init__(self, wp: WarpedProduct, P: FieldPlacement, points):
        self.wp = wp
        self.P = P
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.xb, self.xf = wp.split(self.points)
        self.npts = len(self.points)
        fval = eval_jet2_batch(wp.f, self.xb).value
        if np.any(fval <= 0):
            k = int(np.argmin(fval))
            raise GeometryError(f"warping function is not positive at base point {list(self.xb[k])}")

    # -- factor geometry ------------------------------------------------
    @cached_property
    def base(self) -> LocalGeometry:
        return LocalGeometry(self.wp.base, self.xb)

    @cached_property
    def fiber(self) -> LocalGeometry:
        return LocalGeometry(self.wp.fiber, self.xf)

    @cached_property
    def ambient(self) -> LocalGeometry:
        return LocalGeometry(self.wp.ambient, self.points)

    @cached_property
    def f_jet(self):
        return eval_jet2_batch(self.wp.f, self.xb)

    @property
    def f(self):
        return self.f_jet.value

    @cached_property
    def df(self):
        return self.f_jet.gradient

    @cached_property
    def hess_f(self):
        return self.base.hessian(self.f_jet.gradient, self.f_jet.hessian)

    @cached_property
    def grad_f(self):
        return self.base.gradient(self.df)

    @cached_property
    def grad_norm2(self):
        return _dot(self.grad_f, self.df)

    @cached_property
    def lap_f(self):
        return -contract(self.base.g_inv, self.hess_f)

    # -- P ------------------------------------------------------------
    @property
    def p_on_base(self) -> bool:
        return self.P.location == BASE

    @cached_property
    def P_factor(self) -> VectorField:
        return factor_field(self.wp, self.P)

    @cached_property
    def P_ambient(self) -> VectorField:
        return lift(self.wp, self.P)

    @cached_property
    def p_jet(self):
        local_pts = self.xb if self.p_on_base else self.xf
        return self.P_factor.jet(local_pts)

    @cached_property
    def nabla_P_base(self):
        return self.base.nabla(*self.p_jet)

    @cached_property
    def nabla_P_ambient(self):
        return self.ambient.nabla(*self.P_ambient.jet(self.points))

    @cached_property
    def pi_ambient(self):
        """Ambient one-form ``pi = g(., P)`` as an ambient covector."""
        pval, _ = self.P_ambient.jet(self.points)
        return self.ambient.lower(pval)

    @cached_property
    def Pf(self):
        if not self.p_on_base:
            return np.zeros(self.npts)
        return _dot(self.p_jet[0], self.df)

    @cached_property
    def pi_of_P(self):
        pval, _ = self.P_ambient.jet(self.points)
        return _dot(self.pi_ambient, pval)

    @cached_property
    def div_P_factor(self):
        chart_local = self.base if self.p_on_base else self.fiber
        return np.einsum("...kk->...", chart_local.nabla(*self.p_jet))

    @cached_property
    def base_connection(self):
        if self.p_on_base:
            return ConnectionSpec.ssnm(self.P_factor)
        return None

    @cached_property
    def base_riemann(self):
        return self.base.riemann(self.base_connection)

    @cached_property
    def base_ricci(self):
        return ricci_from(self.base_riemann)

    @cached_property
    def fiber_riemann(self):
        return self.fiber.riemann()

    @cached_property
    def fiber_ricci(self):
        return ricci_from(self.fiber_riemann)

    @cached_property
    def ambient_connection(self):
        return ConnectionSpec.ssnm(self.P_ambient)

    @cached_property
    def ambient_riemann(self):
        return riemann_from(*self.ambient_connection.coefficients(self.ambient))

    @cached_property
    def ambient_ricci(self):
        return ricci_from(self.ambient_riemann)

    # -- helpers on placed vectors ---------------------------------------
    def lift_b(self, v):
        return lift_vectors(self.wp, BASE, np.broadcast_to(v, (self.npts, self.wp.n1)))

    def lift_f(self, v):
        return lift_vectors(self.wp, FIBER, np.broadcast_to(v, (self.npts, self.wp.n2)))

    def g_fiber(self, v, w):
        """Ambient metric on fiber vectors: ``f^2 g_F(v, w)``."""
        return self.f**2 * self.fiber.inner(v, w)

    def pi(self, slot: str, v):
        if slot in "XYZ":
            if not self.p_on_base:
                return np.zeros(self.npts)
            return self.base.inner(v, self.p_jet[0])
        if self.p_on_base:
            return np.zeros(self.npts)
        return self.g_fiber(v, self.p_jet[0])

    def vf(self, x):
        """``Xf / f`` for a base vector."""
        return _dot(x, self.df) / self.f

    def H(self, x, y):
        return np.einsum("...i,...ij,...j->...", x, self.hess_f, y)

    def g_nabla_base(self, y, x):
        """``g_B(Y, nabla_X P)`` for base-placed P."""
        return self.base.inner(y, np.einsum("...ki,...i->...k", self.nabla_P_base, x))

    def g_nabla_fiber(self, w, v):
        """``g(W, nabla_V P)`` with the ambient Levi-Civita connection, P on the fiber."""
        W, V = self.lift_f(w), self.lift_f(v)
        return self.ambient.inner(W, np.einsum("...ki,...i->...k", self.nabla_P_ambient, V))

    # -- direct ambient quantities ---------------------------------------
    def _lifted(self, slot, v):
        return self.lift_b(v) if slot in "XYZ" else self.lift_f(v)

    def curvature_lhs(self, case: str, inputs: dict) -> np.ndarray:
        _, _, lhs = _case(CURVATURE_CASES, case)
        out = []
        for a, b, c in lhs:
            A, B, C = (self._lifted(s, inputs[s]) for s in (a, b, c))
            out.append(np.einsum("...lijk,...i,...j,...k->...l", self.ambient_riemann, A, B, C))
        return out[0] if len(out) == 1 else np.stack(out, axis=-2)

    def ricci_lhs(self, case: str, inputs: dict) -> np.ndarray:
        _, _, lhs = _case(RICCI_CASES, case)
        out = []
        for a, b in lhs:
            A, B = self._lifted(a, inputs[a]), self._lifted(b, inputs[b])
            out.append(np.einsum("...i,...ij,...j->...", A, self.ambient_ricci, B))
        return out[0] if len(out) == 1 else np.stack(out, axis=-1)

    def scalar_lhs(self) -> np.ndarray:
        return contract(self.ambient.g_inv, self.ambient_ricci)

    # -- decomposition right-hand sides ---------------------------------
    def curvature_rhs(self, case: str, inputs: dict) -> np.ndarray:
        loc, slots, _ = _case(CURVATURE_CASES, case)
        self._check_family(loc, case)
        v = {s: np.broadcast_to(np.asarray(inputs[s], dtype=float), (self.npts, self.wp.n1 if s in "XYZ" else self.wp.n2)) for s in slots}
        f = self.f
        if case in ("B1", "F1"):
            X, Y, Z = v["X"], v["Y"], v["Z"]
            return self.lift_b(np.einsum("...lijk,...i,...j,...k->...l", self.base_riemann, X, Y, Z))
        if case == "B2":
            V, X, Y = v["V"], v["X"], v["Y"]
            coef = -self.H(X, Y) / f - self.g_nabla_base(Y, X) + self.pi("X", X) * self.pi("Y", Y)
            return self.lift_f(_col(coef) * V)
        if case == "B3":
            return np.zeros((self.npts, 2, self.wp.n))
        if case == "B4":
            X, V, W = v["X"], v["V"], v["W"]
            nabla_grad = np.einsum("...kl,...li,...i->...k", self.base.g_inv, self.hess_f, X)
            vec = nabla_grad / _col(f) + _col(self.Pf / f) * X
            return self.lift_b(-_col(self.g_fiber(V, W)) * vec)
        if case == "B5":
            U, V, W = v["U"], v["V"], v["W"]
            RF = np.einsum("...lijk,...i,...j,...k->...l", self.fiber_riemann, U, V, W)
            coef = self.grad_norm2 / f**2 + self.Pf / f
            return self.lift_f(RF - _col(coef) * (_col(self.g_fiber(V, W)) * U - _col(self.g_fiber(U, W)) * V))
        if case == "F2":
            V, X, Y = v["V"], v["X"], v["Y"]
            return self.lift_f(-_col(self.H(X, Y) / f) * V) - self.lift_b(_col(self.pi("V", V) * self.vf(Y)) * X)
        if case == "F3":
            X, Y, V = v["X"], v["Y"], v["V"]
            piV = self.pi("V", V)
            return self.lift_b(_col(piV) * (_col(self.vf(X)) * Y - _col(self.vf(Y)) * X))
        if case == "F4":
            V, W, X = v["V"], v["W"], v["X"]
            return self.lift_f(_col(self.vf(X)) * (_col(self.pi("W", W)) * V - _col(self.pi("V", V)) * W))
        if case == "F5":
            X, V, W = v["X"], v["V"], v["W"]
            nabla_grad = np.einsum("...kl,...li,...i->...k", self.base.g_inv, self.hess_f, X)
            piV, piW = self.pi("V", V), self.pi("W", W)
            base_part = -_col(self.g_fiber(V, W) / f) * nabla_grad - _col(self.g_nabla_fiber(W, V)) * X + _col(piW * piV) * X
            return self.lift_b(base_part) + self.lift_f(_col(self.vf(X) * piW) * V)
        if case == "F6":
            U, V, W = v["U"], v["V"], v["W"]
            RF = np.einsum("...lijk,...i,...j,...k->...l", self.fiber_riemann, U, V, W)
            piU, piV, piW = self.pi("U", U), self.pi("V", V), self.pi("W", W)
            out = (
                RF
                - _col(self.grad_norm2 / f**2) * (_col(self.g_fiber(V, W)) * U - _col(self.g_fiber(U, W)) * V)
                + _col(self.g_nabla_fiber(W, U)) * V
                - _col(self.g_nabla_fiber(W, V)) * U
                + _col(piW) * (_col(piV) * U - _col(piU) * V)
            )
            return self.lift_f(out)
        raise AssertionError(case)

    def ricci_rhs(self, case: str, inputs: dict) -> np.ndarray:
        loc, slots, _ = _case(RICCI_CASES, case)
        self._check_family(loc, case)
        v = {s: np.broadcast_to(np.asarray(inputs[s], dtype=float), (self.npts, self.wp.n1 if s in "XYZ" else self.wp.n2)) for s in slots}
        f, n, n2 = self.f, self.wp.n, self.wp.n2
        if case == "B1":
            X, Y = v["X"], v["Y"]
            ric = np.einsum("...i,...ij,...j->...", X, self.base_ricci, Y)
            return ric + n2 * (self.H(X, Y) / f + self.g_nabla_base(Y, X) - self.pi("X", X) * self.pi("Y", Y))
        if case == "B2":
            return np.zeros((self.npts, 2))
        if case in ("B3", "F4"):
            V, W = v["V"], v["W"]
            ric = np.einsum("...i,...ij,...j->...", V, self.fiber_ricci, W)
            bracket = -self.lap_f / f + (n2 - 1) * self.grad_norm2 / f**2
            if case == "B3":
                return ric + (bracket + (n - 1) * self.Pf / f) * self.g_fiber(V, W)
            return ric + bracket * self.g_fiber(V, W) + (n - 1) * self.g_nabla_fiber(W, V) + (1 - n) * self.pi("V", V) * self.pi("W", W)
        if case == "F1":
            X, Y = v["X"], v["Y"]
            return np.einsum("...i,...ij,...j->...", X, self.base_ricci, Y) + n2 * self.H(X, Y) / f
        if case in ("F2", "F3"):
            X, V = v["X"], v["V"]
            sign = (n - 1) if case == "F2" else (1 - n)
            return sign * self.pi("V", V) * self.vf(X)
        raise AssertionError(case)

    def scalar_rhs(self) -> np.ndarray:
        f, n, n1, n2 = self.f, self.wp.n, self.wp.n1, self.wp.n2
        S_base = contract(self.base.g_inv, self.base_ricci)
        S_fiber = contract(self.fiber.g_inv, self.fiber_ricci)
        common = S_base - 2 * n2 * self.lap_f / f + S_fiber / f**2 + n2 * (n2 - 1) * self.grad_norm2 / f**2
        if self.p_on_base:
            return common + n2 * (n - 1) * self.Pf / f - n2 * self.pi_of_P + n2 * self.div_P_factor
        return common + (1 - n) * self.pi_of_P + (n - 1) * self.div_P_factor

    def _check_family(self, loc: str, case: str):
        if loc != self.P.location:
            raise PlacementError(f"case {case} requires P on the {loc}, got P on the {self.P.location}")


def _case(table, case):
    try:
        return table[case]
    except KeyError:
        raise PlacementError(f"unknown case {case!r}; expected one of {sorted(table)}") from None


def _check_inputs(table, case, inputs):
    _, slots, _ = _case(table, case)
    missing = [s for s in slots if s not in inputs]
    extra = [s for s in inputs if s not in slots]
    if missing or extra:
        raise PlacementError(f"case {case} takes slots {list(slots)}; missing {missing}, unexpected {extra}")


def lemma_curvature_rhs(wp: WarpedProduct, case: str, P: FieldPlacement, inputs: dict, point) -> np.ndarray:
    """Right-hand side of a curvature decomposition case, as an ambient vector."""
    _check_inputs(CURVATURE_CASES, case, inputs)
    single = np.ndim(point) == 1
    out = LemmaContext(wp, P, point).curvature_rhs(case, inputs)
    return out[0] if single else out


def lemma_ricci_rhs(wp: WarpedProduct, case: str, P: FieldPlacement, inputs: dict, point):
    _check_inputs(RICCI_CASES, case, inputs)
    single = np.ndim(point) == 1
    out = LemmaContext(wp, P, point).ricci_rhs(case, inputs)
    return out[0] if single else out


def scalar_formula_rhs(wp: WarpedProduct, P: FieldPlacement, point):
    single = np.ndim(point) == 1
    out = LemmaContext(wp, P, point).scalar_rhs()
    return float(out[0]) if single else out


# --------------------------------------------------------------------------
# Identity checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityResult:
    kind: str  # curvature | ricci | scalar
    case: str
    label: str
    samples: int
    max_error: float


def scaled_error(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Per point ``max|lhs - rhs| / (1 + max|lhs|)``."""
    npts = lhs.shape[0]
    l = np.abs(lhs.reshape(npts, -1))
    d = np.abs((lhs - rhs).reshape(npts, -1))
    return d.max(axis=1) / (1.0 + l.max(axis=1))


def random_inputs(wp: WarpedProduct, slots: str, npts: int, rng: np.random.Generator) -> dict:
    return {s: rng.uniform(-1.0, 1.0, (npts, wp.n1 if s in "XYZ" else wp.n2)) for s in slots}


def identity_checks(wp: WarpedProduct, P: FieldPlacement, points, rng: np.random.Generator) -> list:
    """Every curvature, Ricci and scalar decomposition for P's family at ``points``.

    Random placed vectors are drawn from ``rng`` in case order.
    """
    ctx = LemmaContext(wp, P, points)
    prefix = "B" if P.location == BASE else "F"
    results = []
    for case in sorted(c for c in CURVATURE_CASES if c.startswith(prefix)):
        inputs = random_inputs(wp, CURVATURE_CASES[case][1], ctx.npts, rng)
        err = scaled_error(ctx.curvature_lhs(case, inputs), ctx.curvature_rhs(case, inputs))
        results.append(IdentityResult("curvature", case, CURVATURE_LABELS[case], ctx.npts, float(err.max())))
    for case in sorted(c for c in RICCI_CASES if c.startswith(prefix)):
        inputs = random_inputs(wp, RICCI_CASES[case][1], ctx.npts, rng)
        lhs = ctx.ricci_lhs(case, inputs).reshape(ctx.npts, -1)
        rhs = ctx.ricci_rhs(case, inputs).reshape(ctx.npts, -1)
        results.append(IdentityResult("ricci", case, RICCI_LABELS[case], ctx.npts, float(scaled_error(lhs, rhs).max())))
    err = scaled_error(ctx.scalar_lhs()[:, None], ctx.scalar_rhs()[:, None])
    results.append(IdentityResult("scalar", prefix, SCALAR_LABELS[P.location], ctx.npts, float(err.max())))
    return results
