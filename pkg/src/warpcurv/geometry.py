"""Chart-based Levi-Civita geometry.

Index conventions (a leading batch axis is implied everywhere):

* ``dg[i, j, k] = d_k g_ij``, ``d2g[i, j, k, l] = d_k d_l g_ij``
* ``gamma[k, i, j]`` is the coefficient of ``d_k`` in ``nabla_{d_i} d_j``
* ``dgamma[k, i, j, l] = d_l gamma[k, i, j]``
* ``riemann[l, i, j, k]`` is the ``d_l`` component of ``R(d_i, d_j) d_k`` with
  ``R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y]``
* ``ricci[i, j] = riemann[a, i, a, j]``, i.e. ``Ric(X, Y)`` is the trace of
  ``Z -> R(X, Z) Y``.  This is the sum ``sum_k eps_k <R(X, E_k) Y, E_k>`` over
  an orthonormal frame, which is the *negative* of the usual Ricci tensor:
  the round sphere has ``Ric = -g`` here.
* ``laplacian f = -trace(Hess f)``, the negative of the Laplace-Beltrami
  operator.

Public functions take a single point (shape ``(n,)``) or a batch (shape
``(N, n)``) and return unbatched or batched arrays accordingly.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .expr import Expression, constant, eval_jet2_batch, parse

DEGENERACY_RTOL = 1e-12


class GeometryError(ValueError):
    pass


class DegenerateMetricError(GeometryError):
    def __init__(self, point, detail: str = ""):
        self.point = np.asarray(point)
        super().__init__(f"degenerate metric at point {list(np.round(self.point, 15))}{detail}")


class SignatureError(GeometryError):
    pass


@dataclass(frozen=True)
class ChartManifold:
    """A manifold covered by one chart with symbolic metric components.

    ``metric`` is a full ``dim x dim`` grid in which ``metric[i][j]`` and
    ``metric[j][i]`` are the same object; only the upper triangle is ever
    read.  ``box`` is the admissible sampling region, one ``(lo, hi)`` per
    coordinate.
    """

    coords: tuple
    metric: tuple
    signature: tuple
    box: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        n = len(self.coords)
        if n < 1:
            raise GeometryError("chart dimension must be at least 1")
        if len(self.metric) != n or any(len(row) != n for row in self.metric):
            raise GeometryError(f"metric must be {n}x{n}")
        if len(self.signature) != n or any(s not in (1, -1) for s in self.signature):
            raise GeometryError(f"signature must be {n} entries of +1/-1, got {self.signature}")
        for i in range(n):
            for j in range(n):
                e = self.metric[i][j]
                if tuple(e.coords) != tuple(self.coords):
                    raise GeometryError(f"metric[{i}][{j}] is not bound to chart coordinates")
                if e.root != self.metric[j][i].root:
                    raise GeometryError(f"metric is not symmetric at ({i},{j})")
        if self.box is not None:
            if len(self.box) != n:
                raise GeometryError("box needs one interval per coordinate")
            for lo, hi in self.box:
                if not lo < hi:
                    raise GeometryError(f"empty sampling interval [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return len(self.coords)


def make_chart(coords: Sequence[str], metric, signature=None, box=None, name: str = "") -> ChartManifold:
    """Build a chart from metric rows of expression strings (or Expressions).

    Rows may be full (``n`` entries) or upper-triangular (row ``i`` holds
    columns ``i..n-1``).  A full row's lower part must agree with the upper
    triangle.
    """
    coords = tuple(coords)
    n = len(coords)

    def as_expr(item):
        if isinstance(item, Expression):
            return item.bind(coords)
        if isinstance(item, (int, float)):
            return constant(item, coords)
        return parse(str(item), coords)

    if len(metric) != n:
        raise GeometryError(f"metric needs {n} rows, got {len(metric)}")
    upper = {}
    lower = {}
    for i, row in enumerate(metric):
        if len(row) == n:
            for j, item in enumerate(row):
                (upper if j >= i else lower)[(i, j)] = as_expr(item)
        elif len(row) == n - i:
            for k, item in enumerate(row):
                upper[(i, i + k)] = as_expr(item)
        else:
            raise GeometryError(f"metric row {i} has {len(row)} entries; expected {n} or {n - i}")
    for (i, j), e in lower.items():
        if e.root != upper[(j, i)].root:
            raise GeometryError(f"metric[{i}][{j}] = {e} disagrees with metric[{j}][{i}] = {upper[(j, i)]}")
    grid = tuple(tuple(upper[(min(i, j), max(i, j))] for j in range(n)) for i in range(n))
    signature = tuple(int(s) for s in signature) if signature is not None else (1,) * n
    box = tuple((float(lo), float(hi)) for lo, hi in box) if box is not None else None
    return ChartManifold(coords, grid, signature, box, name)


@dataclass(frozen=True)
class VectorField:
    chart: ChartManifold
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.chart.dim:
            raise GeometryError(f"vector field needs {self.chart.dim} components, got {len(self.components)}")

    def jet(self, points):
        """Component values ``(N, n)`` and first derivatives ``(N, n, n)``, ``[p, k, i] = d_i P^k``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        jets = [eval_jet2_batch(c, pts) for c in self.components]
        return np.stack([j.value for j in jets], axis=-1), np.stack([j.gradient for j in jets], axis=-2)


def vector_field(chart: ChartManifold, components) -> VectorField:
    exprs = []
    for c in components:
        if isinstance(c, Expression):
            exprs.append(c.bind(chart.coords))
        elif isinstance(c, (int, float)):
            exprs.append(constant(c, chart.coords))
        else:
            exprs.append(parse(str(c), chart.coords))
    return VectorField(chart, tuple(exprs))


@dataclass(frozen=True)
class MetricJet:
    g: np.ndarray
    g_inv: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray


@dataclass(frozen=True)
class ScalarCalculus:
    grad_f: np.ndarray
    grad_norm2: np.ndarray
    hessian_f: np.ndarray
    laplacian_f: np.ndarray
    Pf: Optional[np.ndarray]


# --------------------------------------------------------------------------
# Pointwise tensor algebra on batched coefficient arrays
# --------------------------------------------------------------------------


def riemann_from(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """``R^l_ijk = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik``."""
    d_part = np.einsum("...ljki->...lijk", dgamma) - np.einsum("...likj->...lijk", dgamma)
    quad = np.einsum("...lim,...mjk->...lijk", gamma, gamma)
    return d_part + quad - np.swapaxes(quad, -3, -2)


def ricci_from(riemann: np.ndarray) -> np.ndarray:
    return np.einsum("...aiaj->...ij", riemann)


def contract(g_inv: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...ij->...", g_inv, tensor)


class LocalGeometry:
    """Metric jets and derived Levi-Civita data at a batch of points."""

    def __init__(self, chart: ChartManifold, points, check_signature: bool = True):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != chart.dim:
            raise GeometryError(f"points have {pts.shape[-1]} coordinates, chart has {chart.dim}")
        self.chart = chart
        self.points = pts
        n = chart.dim
        npts = pts.shape[0]
        g = np.empty((npts, n, n))
        dg = np.empty((npts, n, n, n))
        d2g = np.empty((npts, n, n, n, n))
        for i in range(n):
            for j in range(i, n):
                jet = eval_jet2_batch(chart.metric[i][j], pts)
                g[:, i, j] = g[:, j, i] = jet.value
                dg[:, i, j] = dg[:, j, i] = jet.gradient
                d2g[:, i, j] = d2g[:, j, i] = jet.hessian
        scale = np.max(np.abs(g), axis=(-2, -1))
        det = np.linalg.det(g)
        bad = np.abs(det) < DEGENERACY_RTOL * scale**n
        if np.any(bad):
            raise DegenerateMetricError(pts[np.argmax(bad)])
        if check_signature:
            neg = np.sum(np.linalg.eigvalsh(g) < 0, axis=-1)
            want = sum(1 for s in chart.signature if s < 0)
            if np.any(neg != want):
                k = int(np.argmax(neg != want))
                raise SignatureError(
                    f"metric at {list(pts[k])} has {neg[k]} negative eigenvalues; signature declares {want}"
                )
        self.g = g
        self.g_inv = np.linalg.inv(g)
        self.dg = dg
        self.d2g = d2g

    @cached_property
    def _gamma_lower(self) -> np.ndarray:
        dg = self.dg
        # [m, i, j] = 1/2 (d_i g_jm + d_j g_im - d_m g_ij)
        return 0.5 * (np.einsum("...jmi->...mij", dg) + np.einsum("...imj->...mij", dg) - np.einsum("...ijm->...mij", dg))

    @cached_property
    def gamma(self) -> np.ndarray:
        return np.einsum("...km,...mij->...kij", self.g_inv, self._gamma_lower)

    @cached_property
    def dgamma(self) -> np.ndarray:
        d2g = self.d2g
        dlow = 0.5 * (
            np.einsum("...jmil->...mijl", d2g) + np.einsum("...imjl->...mijl", d2g) - np.einsum("...ijml->...mijl", d2g)
        )
        dginv = -np.einsum("...ka,...abl,...bm->...kml", self.g_inv, self.dg, self.g_inv)
        return np.einsum("...km,...mijl->...kijl", self.g_inv, dlow) + np.einsum("...kml,...mij->...kijl", dginv, self._gamma_lower)

    def coefficients(self, connection=None):
        if connection is None:
            return self.gamma, self.dgamma
        return connection.coefficients(self)

    def riemann(self, connection=None) -> np.ndarray:
        return riemann_from(*self.coefficients(connection))

    def ricci(self, connection=None) -> np.ndarray:
        return ricci_from(self.riemann(connection))

    def scalar(self, connection=None) -> np.ndarray:
        return contract(self.g_inv, self.ricci(connection))

    def inner(self, u, v) -> np.ndarray:
        return np.einsum("...i,...ij,...j->...", u, self.g, v)

    def lower(self, v) -> np.ndarray:
        return np.einsum("...ij,...j->...i", self.g, v)

    def nabla(self, values: np.ndarray, grads: np.ndarray) -> np.ndarray:
        """Levi-Civita derivative of a vector field: ``[k, i] = d_i P^k + G^k_ij P^j``."""
        return grads + np.einsum("...kij,...j->...ki", self.gamma, values)

    def hessian(self, grad: np.ndarray, hess: np.ndarray) -> np.ndarray:
        return hess - np.einsum("...kij,...k->...ij", self.gamma, grad)

    def gradient(self, grad: np.ndarray) -> np.ndarray:
        return np.einsum("...ij,...j->...i", self.g_inv, grad)


def _points(point):
    arr = np.asarray(point, dtype=float)
    return np.atleast_2d(arr), arr.ndim == 1


def _unbatch(value, single: bool):
    if not single:
        return value
    if isinstance(value, np.ndarray):
        return value[0] if value.ndim else value
    if hasattr(value, "__dataclass_fields__"):
        return replace(value, **{f.name: _unbatch(getattr(value, f.name), True) for f in fields(value)})
    if isinstance(value, tuple):
        return tuple(_unbatch(v, True) for v in value)
    return value


def _vec(v, npts: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(v, dtype=float), (npts, np.shape(v)[-1]))


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def metric_jet(chart: ChartManifold, point) -> MetricJet:
    pts, single = _points(point)
    local = LocalGeometry(chart, pts)
    return _unbatch(MetricJet(local.g, local.g_inv, local.dg, local.d2g), single)


def christoffel(chart: ChartManifold, point, derivative: bool = False):
    """Levi-Civita ``gamma[k, i, j]``; with ``derivative=True`` also ``dgamma``."""
    pts, single = _points(point)
    local = LocalGeometry(chart, pts)
    out = (local.gamma, local.dgamma) if derivative else local.gamma
    return _unbatch(out, single)


def riemann(chart: ChartManifold, point, X, Y, Z, connection=None) -> np.ndarray:
    """``R(X, Y) Z`` for Levi-Civita or the given connection."""
    pts, single = _points(point)
    local = LocalGeometry(chart, pts)
    npts = len(pts)
    out = np.einsum("...lijk,...i,...j,...k->...l", local.riemann(connection), _vec(X, npts), _vec(Y, npts), _vec(Z, npts))
    return _unbatch(out, single)


def riemann_tensor(chart: ChartManifold, point, connection=None) -> np.ndarray:
    pts, single = _points(point)
    return _unbatch(LocalGeometry(chart, pts).riemann(connection), single)


def ricci(chart: ChartManifold, point, connection=None) -> np.ndarray:
    """Ricci matrix ``Ric_ij = R^a_iaj`` (not symmetrised)."""
    pts, single = _points(point)
    return _unbatch(LocalGeometry(chart, pts).ricci(connection), single)


def scalar(chart: ChartManifold, point, connection=None):
    pts, single = _points(point)
    out = LocalGeometry(chart, pts).scalar(connection)
    return float(out[0]) if single else out


def scalar_calculus(chart: ChartManifold, f: Expression, point, P: Optional[VectorField] = None) -> ScalarCalculus:
    pts, single = _points(point)
    local = LocalGeometry(chart, pts)
    jet = eval_jet2_batch(f.bind(chart.coords), pts)
    grad = local.gradient(jet.gradient)
    hess = local.hessian(jet.gradient, jet.hessian)
    Pf = None
    if P is not None:
        pval, _ = P.jet(pts)
        Pf = np.einsum("...i,...i->...", pval, jet.gradient)
    out = ScalarCalculus(
        grad_f=grad,
        grad_norm2=np.einsum("...i,...i->...", grad, jet.gradient),
        hessian_f=hess,
        laplacian_f=-contract(local.g_inv, hess),
        Pf=Pf,
    )
    return _unbatch(out, single)


def divergence(chart: ChartManifold, P: VectorField, point):
    pts, single = _points(point)
    local = LocalGeometry(chart, pts)
    out = np.einsum("...kk->...", local.nabla(*P.jet(pts)))
    return float(out[0]) if single else out


def sample_points(chart: ChartManifold, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples in the chart's box, drawn row by row."""
    if chart.box is None:
        raise GeometryError(f"chart {chart.name or chart.coords} has no sampling box")
    lo = np.array([b[0] for b in chart.box])
    hi = np.array([b[1] for b in chart.box])
    return lo + (hi - lo) * rng.random((count, chart.dim))
