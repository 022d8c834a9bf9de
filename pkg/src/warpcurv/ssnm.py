"""Semi-symmetric non-metric connections.

Given the Levi-Civita connection ``nabla`` and a vector field ``P`` with dual
one-form ``pi(X) = g(X, P)``, the connection is

    nablabar_X Y = nabla_X Y + pi(Y) X,

i.e. ``gammabar[k, i, j] = gamma[k, i, j] + delta[k, i] * pi[j]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import (
    ChartManifold,
    GeometryError,
    LocalGeometry,
    VectorField,
    _points,
    _unbatch,
    _vec,
    contract,
    ricci_from,
    riemann_from,
)

LEVI_CIVITA = "levi-civita"
SSNM = "ssnm"


@dataclass(frozen=True)
class ConnectionSpec:
    kind: str = LEVI_CIVITA
    P: Optional[VectorField] = None

    def __post_init__(self):
        if self.kind not in (LEVI_CIVITA, SSNM):
            raise GeometryError(f"unknown connection kind {self.kind!r}")
        if (self.kind == SSNM) != (self.P is not None):
            raise GeometryError("a generating field P is required for, and only for, the SSNM connection")

    @classmethod
    def levi_civita(cls) -> "ConnectionSpec":
        return cls(LEVI_CIVITA)

    @classmethod
    def ssnm(cls, P: VectorField) -> "ConnectionSpec":
        return cls(SSNM, P)

    def coefficients(self, local: LocalGeometry):
        """Connection coefficients and their exact first derivatives at ``local``'s points."""
        if self.kind == LEVI_CIVITA:
            return local.gamma, local.dgamma
        if tuple(self.P.chart.coords) != tuple(local.chart.coords):
            raise GeometryError("P is defined on a different chart")
        pval, pgrad = self.P.jet(local.points)
        pi = local.lower(pval)
        # d_l pi_j = d_l g_jm P^m + g_jm d_l P^m
        dpi = np.einsum("...jml,...m->...jl", local.dg, pval) + np.einsum("...jm,...ml->...jl", local.g, pgrad)
        eye = np.eye(local.chart.dim)
        gamma = local.gamma + np.einsum("ki,...j->...kij", eye, pi)
        dgamma = local.dgamma + np.einsum("ki,...jl->...kijl", eye, dpi)
        return gamma, dgamma


@dataclass(frozen=True)
class CurvatureRelation:
    direct: np.ndarray
    via_relation: np.ndarray
    error: np.ndarray


def connection_coeffs(chart: ChartManifold, spec: ConnectionSpec, point, derivative: bool = False):
    pts, single = _points(point)
    gamma, dgamma = spec.coefficients(LocalGeometry(chart, pts))
    return _unbatch((gamma, dgamma) if derivative else gamma, single)


def torsion(chart: ChartManifold, spec: ConnectionSpec, point, X, Y) -> np.ndarray:
    """``T(X, Y) = nablabar_X Y - nablabar_Y X - [X, Y]`` from the coefficients."""
    pts, single = _points(point)
    gamma, _ = spec.coefficients(LocalGeometry(chart, pts))
    x, y = _vec(X, len(pts)), _vec(Y, len(pts))
    antisym = gamma - np.swapaxes(gamma, -2, -1)
    return _unbatch(np.einsum("...kij,...i,...j->...k", antisym, x, y), single)


def nonmetricity(chart: ChartManifold, spec: ConnectionSpec, point, X, Y, Z) -> np.ndarray:
    """``(nablabar_X g)(Y, Z)`` computed from the connection coefficients."""
    pts, single = _points(point)
    local = LocalGeometry(chart, pts)
    gamma, _ = spec.coefficients(local)
    # (nablabar_k g)_ij = d_k g_ij - G^l_ki g_lj - G^l_kj g_il
    q = np.einsum("...ijk->...kij", local.dg)
    q = q - np.einsum("...lki,...lj->...kij", gamma, local.g) - np.einsum("...lkj,...il->...kij", gamma, local.g)
    n = len(pts)
    return _unbatch(np.einsum("...kij,...k,...i,...j->...", q, _vec(X, n), _vec(Y, n), _vec(Z, n)), single)


def relation_rhs(local: LocalGeometry, P: VectorField, X, Y, Z) -> np.ndarray:
    """``R(X,Y)Z + g(Z, nabla_X P) Y - g(Z, nabla_Y P) X + pi(Z)[pi(Y) X - pi(X) Y]``."""
    pval, pgrad = P.jet(local.points)
    nablaP = local.nabla(pval, pgrad)
    pi = local.lower(pval)
    R = np.einsum("...lijk,...i,...j,...k->...l", local.riemann(), X, Y, Z)
    nxP = np.einsum("...ki,...i->...k", nablaP, X)
    nyP = np.einsum("...ki,...i->...k", nablaP, Y)
    dot = lambda a, b: np.einsum("...i,...i->...", a, b)  # noqa: E731
    piX, piY, piZ = dot(pi, X), dot(pi, Y), dot(pi, Z)
    return (
        R
        + local.inner(Z, nxP)[..., None] * Y
        - local.inner(Z, nyP)[..., None] * X
        + piZ[..., None] * (piY[..., None] * X - piX[..., None] * Y)
    )


def curvature_relation_check(chart: ChartManifold, P: VectorField, point, X, Y, Z) -> CurvatureRelation:
    """Compare ``Rbar(X,Y)Z`` from the SSNM coefficients with its Levi-Civita expansion.

    ``error`` is the max-abs component difference at each point.
    """
    pts, single = _points(point)
    local = LocalGeometry(chart, pts)
    n = len(pts)
    x, y, z = _vec(X, n), _vec(Y, n), _vec(Z, n)
    direct = np.einsum("...lijk,...i,...j,...k->...l", local.riemann(ConnectionSpec.ssnm(P)), x, y, z)
    via = relation_rhs(local, P, x, y, z)
    err = np.max(np.abs(direct - via), axis=-1)
    return _unbatch(CurvatureRelation(direct, via, err), single)


def ricci_ssnm(chart: ChartManifold, P: VectorField, point) -> np.ndarray:
    pts, single = _points(point)
    local = LocalGeometry(chart, pts)
    return _unbatch(ricci_from(riemann_from(*ConnectionSpec.ssnm(P).coefficients(local))), single)


def scalar_ssnm(chart: ChartManifold, P: VectorField, point):
    """``g^ij Ricbar_ij``; only the symmetric part of the Ricci matrix contributes."""
    pts, single = _points(point)
    local = LocalGeometry(chart, pts)
    out = contract(local.g_inv, local.ricci(ConnectionSpec.ssnm(P)))
    return float(out[0]) if single else out
