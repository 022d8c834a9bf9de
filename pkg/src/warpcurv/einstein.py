"""Quasi-Einstein (QE) and generalised quasi-Einstein (GQE) bookkeeping.

A structure ``(a, b, c, U1, U2)`` is tested through its defect tensor

    D = Ricbar - a g - b A (x) A - c B (x) B,   A = g(., U1), B = g(., U2),

and the base/fiber consequences of ``D = 0`` are replayed as conditional
identities whose residuals are bounded by the defect.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .expr import eval_jet2_batch
from .geometry import ChartManifold, GeometryError, LocalGeometry, VectorField, contract
from .ssnm import ConnectionSpec
from .warped import BASE, FIBER, FieldPlacement, LemmaContext, PlacementError, WarpedProduct, lift, zero_placement

UNIT_FLOOR = 1e-10
ORTHO_TOL = 1e-8
CONSTANCY_TOL = 1e-8


class EinsteinError(GeometryError):
    pass


class IllPosedFitError(EinsteinError):
    pass


@dataclass(frozen=True)
class QEStructure:
    a: float
    b: float
    U1: FieldPlacement
    c: float = 0.0
    U2: Optional[FieldPlacement] = None

    @property
    def generators(self):
        return (self.U1,) if self.U2 is None else (self.U1, self.U2)

    @property
    def coefficients(self):
        return (self.b,) if self.U2 is None else (self.b, self.c)


@dataclass(frozen=True)
class DefectTensor:
    matrices: np.ndarray
    max_abs: float


@dataclass(frozen=True)
class FitResult:
    a: float
    b: Optional[float]
    c: Optional[float]
    residual: float

    @property
    def params(self) -> tuple:
        return tuple(v for v in (self.a, self.b, self.c) if v is not None)


@dataclass(frozen=True)
class AlphaConstant:
    which: str
    samples: list
    spread: float


@dataclass(frozen=True)
class EquationResidual:
    label: str
    residual: float


@dataclass
class PropositionReport:
    pattern: str
    equations: list
    defect: float
    K: float
    tolerance: float

    @property
    def bound(self) -> float:
        return self.K * self.defect + self.tolerance

    @property
    def passed(self) -> bool:
        return all(e.residual <= self.bound for e in self.equations)


@dataclass
class TheoremReport:
    pattern: str
    applicable: bool
    hypotheses: dict = field(default_factory=dict)
    c0: Optional[float] = None
    max_error: Optional[float] = None
    note: str = ""


# --------------------------------------------------------------------------
# Targets and generators
# --------------------------------------------------------------------------


def _resolve(target, P, generators):
    """Ambient chart, connection and ambient generator fields."""
    if isinstance(target, WarpedProduct):
        chart = target.ambient
        conn = None if P is None else ConnectionSpec.ssnm(lift(target, P))
        fields = [lift(target, u) if isinstance(u, FieldPlacement) else u for u in generators]
    elif isinstance(target, ChartManifold):
        chart = target
        if P is None or isinstance(P, ConnectionSpec):
            conn = P
        else:
            conn = ConnectionSpec.ssnm(P)
        fields = list(generators)
        if any(not isinstance(u, VectorField) for u in fields):
            raise EinsteinError("generators on a plain chart must be VectorFields")
    else:
        raise TypeError(f"expected WarpedProduct or ChartManifold, got {type(target).__name__}")
    return chart, conn, fields


def unit_generators(local: LocalGeometry, fields: Sequence[VectorField]) -> list:
    """Normalise each generator at every point; check orthogonality of pairs."""
    units = []
    for k, u in enumerate(fields):
        val, _ = u.jet(local.points)
        norm2 = local.inner(val, val)
        if np.any(np.abs(norm2) <= UNIT_FLOOR):
            raise EinsteinError(f"generator {k + 1} is null or vanishes at a sample point")
        if np.any(np.sign(norm2) != np.sign(norm2[0])):
            raise EinsteinError(f"generator {k + 1} changes causal character across samples")
        units.append(val / np.sqrt(np.abs(norm2))[:, None])
    for i in range(len(units)):
        for j in range(i + 1, len(units)):
            if np.max(np.abs(local.inner(units[i], units[j]))) > ORTHO_TOL:
                raise EinsteinError(f"generators {i + 1} and {j + 1} are not orthogonal")
    return units


def _basis(local: LocalGeometry, units):
    """``[g, A (x) A, B (x) B, ...]`` at each point."""
    mats = [local.g]
    for u in units:
        form = local.lower(u)
        mats.append(form[:, :, None] * form[:, None, :])
    return mats


def defect(target, qe: QEStructure, points, P=None) -> DefectTensor:
    """Pointwise ``Ricbar - a g - b A(x)A [- c B(x)B]`` and its max-abs entry."""
    chart, conn, fields = _resolve(target, P, qe.generators)
    local = LocalGeometry(chart, points)
    units = unit_generators(local, fields)
    mats = _basis(local, units)
    params = (qe.a,) + qe.coefficients
    D = local.ricci(conn) - sum(p * m for p, m in zip(params, mats))
    return DefectTensor(D, float(np.max(np.abs(D))))


def fit(target, generators: Sequence, points, P=None, cond_limit: float = 1e10) -> FitResult:
    """Least-squares ``(a[, b[, c]])`` over all sample points via the normal equations.

    With no generators this is the Einstein model ``Ricbar = a g``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) < 2:
        raise EinsteinError("fit needs at least two sample points")
    if len(generators) > 2:
        raise EinsteinError("fit takes at most two generators")
    chart, conn, fields = _resolve(target, P, generators)
    local = LocalGeometry(chart, pts)
    units = unit_generators(local, fields)
    mats = _basis(local, units)
    ric = local.ricci(conn)
    k = len(mats)
    normal = np.empty((k, k))
    rhs = np.empty(k)
    for i in range(k):
        rhs[i] = np.sum(mats[i] * ric)
        for j in range(k):
            normal[i, j] = np.sum(mats[i] * mats[j])
    if not np.all(np.isfinite(normal)) or np.linalg.cond(normal) > cond_limit:
        raise IllPosedFitError("normal equations are rank-deficient: generator terms are not independent of g")
    theta = np.linalg.solve(normal, rhs)
    D = ric - sum(t * m for t, m in zip(theta, mats))
    b = float(theta[1]) if k >= 2 else None
    c = float(theta[2]) if k == 3 else None
    return FitResult(float(theta[0]), b, c, float(np.max(np.abs(D))))


# --------------------------------------------------------------------------
# Warped-product consequences
# --------------------------------------------------------------------------

ALPHA_PLACEMENT = {"alpha1": BASE, "alpha2": FIBER, "alpha3": BASE, "alpha4": FIBER}


def alpha_check(wp: WarpedProduct, P: Optional[FieldPlacement], which: str, base_points, a: float) -> AlphaConstant:
    """``f lap f + (1-n2)|grad f|^2 [+ (1-n) f Pf] + a f^2`` at each base point.

    The ``Pf`` term is present for the base-placed variants (alpha1, alpha3).
    """
    if which not in ALPHA_PLACEMENT:
        raise EinsteinError(f"unknown alpha {which!r}; expected one of {sorted(ALPHA_PLACEMENT)}")
    loc = ALPHA_PLACEMENT[which]
    if P is None:
        P = zero_placement(wp, loc)
    if P.location != loc:
        raise EinsteinError(f"{which} requires P on the {loc}")
    pts = np.atleast_2d(np.asarray(base_points, dtype=float))
    local = LocalGeometry(wp.base, pts)
    jet = eval_jet2_batch(wp.f, pts)
    f = jet.value
    lap = -contract(local.g_inv, local.hessian(jet.gradient, jet.hessian))
    grad2 = np.einsum("...i,...ij,...j->...", jet.gradient, local.g_inv, jet.gradient)
    value = f * lap + (1 - wp.n2) * grad2 + a * f**2
    if loc == BASE:
        pval = np.stack([eval_jet2_batch(c.bind(wp.base.coords), pts).value for c in P.components], axis=-1)
        value = value + (1 - wp.n) * f * np.einsum("...i,...i->...", pval, jet.gradient)
    samples = [(tuple(p), float(v)) for p, v in zip(pts, value)]
    return AlphaConstant(which, samples, float(value.max() - value.min()))


# Placement patterns "P:U" / "P:U1U2" with B = base, F = fiber.  A GQE
# pattern "FB" is "BF" with the generators swapped and is accepted as well.
PATTERNS = (
    "B:B", "B:F", "F:B", "F:F",
    "B:BB", "B:FF", "B:BF", "F:BB", "F:FF", "F:BF",
)


def pattern_of(P: FieldPlacement, qe: QEStructure) -> str:
    locs = "".join("B" if u.location == BASE else "F" for u in qe.generators)
    return ("B" if P.location == BASE else "F") + ":" + locs


def _factor_units(ctx: LemmaContext, qe: QEStructure):
    """Ambient-unit generators in factor coordinates, with their placements."""
    out = []
    for u in qe.generators:
        chart = ctx.wp.factor(u.location)
        pts = ctx.xb if u.location == BASE else ctx.xf
        val = np.stack([eval_jet2_batch(c.bind(chart.coords), pts).value for c in u.components], axis=-1)
        if u.location == BASE:
            norm2 = ctx.base.inner(val, val)
        else:
            norm2 = ctx.g_fiber(val, val)
        if np.any(np.abs(norm2) <= UNIT_FLOOR):
            raise EinsteinError("generator is null or vanishes at a sample point")
        out.append((u.location, val / np.sqrt(np.abs(norm2))[:, None]))
    return out


def proposition_check(
    wp: WarpedProduct,
    P: FieldPlacement,
    qe: QEStructure,
    points,
    tolerance: float = 1e-7,
    expect: Optional[str] = None,
) -> PropositionReport:
    """Residuals of the factor-level Ricci and scalar equations implied by (G)QE.

    Ricci equations are compared entrywise in factor coordinates.  The
    contract is ``residual <= n^2 * defect + tolerance`` where ``defect`` is
    the max-abs ambient defect at the same points.  ``expect`` (one of
    ``PATTERNS``) pins the placements the caller intends to test.
    """
    if expect is not None:
        if expect not in PATTERNS:
            raise EinsteinError(f"unknown placement pattern {expect!r}")
        got = pattern_of(P, qe)
        swapped = got[:2] + got[2:][::-1]
        if expect not in (got, swapped):
            raise PlacementError(f"placement pattern {got} does not match expected {expect}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    delta = defect(wp, qe, pts, P=P).max_abs
    ctx = LemmaContext(wp, P, pts)
    units = _factor_units(ctx, qe)
    coefs = qe.coefficients
    a, n, n1, n2 = qe.a, wp.n, wp.n1, wp.n2
    f = ctx.f
    on_base = P.location == BASE

    gB, gF = ctx.base.g, ctx.fiber.g
    rhs_base = a * gB - n2 * ctx.hess_f / f[:, None, None]
    rhs_fiber_scalar = f * ctx.lap_f + (1 - n2) * ctx.grad_norm2 + a * f**2
    if on_base:
        # g_B(d_b, nabla_{d_a} P) - pi_a pi_b
        gnab = np.einsum("...bk,...ka->...ab", gB, ctx.nabla_P_base)
        pi_b = ctx.base.lower(ctx.p_jet[0])
        rhs_base = rhs_base - n2 * (gnab - pi_b[:, :, None] * pi_b[:, None, :])
        rhs_fiber_scalar = rhs_fiber_scalar + (1 - n) * f * ctx.Pf
    rhs_fiber = rhs_fiber_scalar[:, None, None] * gF
    if not on_base:
        amb = ctx.ambient
        sl = slice(n1, n)
        # g(d_v, nabla_{d_u} P) and pi_u pi_v on fiber coordinate vectors
        gnab = np.einsum("...vk,...ku->...uv", amb.g[:, sl, :], ctx.nabla_P_ambient[:, :, sl])
        pi_f = ctx.pi_ambient[:, sl]
        rhs_fiber = rhs_fiber + (1 - n) * gnab + (n - 1) * pi_f[:, :, None] * pi_f[:, None, :]

    extra_base = np.zeros(len(pts))
    extra_fiber = np.zeros(len(pts))
    for coef, (loc, u) in zip(coefs, units):
        if loc == BASE:
            form = ctx.base.lower(u)
            rhs_base = rhs_base + coef * form[:, :, None] * form[:, None, :]
            extra_base += coef
        else:
            form = ctx.fiber.lower(u)  # g_F(., U)
            rhs_fiber = rhs_fiber + coef * (f**4)[:, None, None] * form[:, :, None] * form[:, None, :]
            extra_fiber += coef * f**2

    equations = [
        EquationResidual("base Ricci", float(np.max(np.abs(ctx.base_ricci - rhs_base)))),
        EquationResidual("fiber Ricci", float(np.max(np.abs(ctx.fiber_ricci - rhs_fiber)))),
    ]

    S_amb = ctx.scalar_lhs()
    S_base = contract(ctx.base.g_inv, ctx.base_ricci)
    S_fiber = contract(ctx.fiber.g_inv, ctx.fiber_ricci)
    base_line = n1 * a + n2 * ctx.lap_f / f + extra_base
    fiber_line = n2 * rhs_fiber_scalar + extra_fiber
    if on_base:
        base_line = base_line - n2 * ctx.div_P_factor + n2 * ctx.pi_of_P
    else:
        # ambient div and pi(P) enter through g_F^{uv}, hence the f^2
        fiber_line = fiber_line + (1 - n) * f**2 * ctx.div_P_factor + (n - 1) * f**2 * ctx.pi_of_P
    equations += [
        EquationResidual("ambient scalar", float(np.max(np.abs(S_amb - (n * a + sum(coefs)))))),
        EquationResidual("base scalar", float(np.max(np.abs(S_base - base_line)))),
        EquationResidual("fiber scalar", float(np.max(np.abs(S_fiber - fiber_line)))),
    ]
    return PropositionReport(pattern_of(P, qe), equations, delta, float(n * n), tolerance)


def fiber_scalar_unscaled_residual(wp: WarpedProduct, P: FieldPlacement, qe: QEStructure, points) -> float:
    """Fiber-scalar residual with ``div_F P`` and ``pi(P)`` entering without ``f^2``.

    Kept to document that this variant is not implied by (G)QE for a
    fiber-placed P unless ``f`` is constant.
    """
    if P.location != FIBER:
        raise EinsteinError("only meaningful for a fiber-placed P")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ctx = LemmaContext(wp, P, pts)
    units = _factor_units(ctx, qe)
    f, n, n2 = ctx.f, wp.n, wp.n2
    line = n2 * (f * ctx.lap_f + (1 - n2) * ctx.grad_norm2 + qe.a * f**2)
    line = line + (1 - n) * ctx.div_P_factor + (n - 1) * ctx.pi_of_P
    for coef, (loc, _) in zip(qe.coefficients, units):
        if loc == FIBER:
            line = line + coef * f**2
    S_fiber = contract(ctx.fiber.g_inv, ctx.fiber_ricci)
    return float(np.max(np.abs(S_fiber - line)))


def theorem_bookkeeping(wp: WarpedProduct, P: FieldPlacement, qe: QEStructure, points) -> TheoremReport:
    """Replay ``lap_B f = c0 f`` for a one-dimensional base.

    ``c0 = [div_B P - pi(P)] - (a + sum of base-placed coefficients)/n2``,
    the bracket present only for a base-placed P.  Hypotheses that can be
    checked at the samples are reported; nothing is concluded about ``f``.
    """
    pattern = pattern_of(P, qe)
    report = TheoremReport(pattern, applicable=False)
    report.hypotheses["n1 == 1"] = wp.n1 == 1
    if wp.n1 != 1:
        report.note = "not applicable: needs a one-dimensional base"
        return report
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ctx = LemmaContext(wp, P, pts)
    shift = 0.0
    if P.location == BASE:
        div = ctx.div_P_factor
        pipi = ctx.pi_of_P
        div_const = float(np.ptp(div)) <= CONSTANCY_TOL
        pi_const = float(np.ptp(pipi)) <= CONSTANCY_TOL
        report.hypotheses["div_B P constant"] = div_const
        report.hypotheses["pi(P) constant"] = pi_const
        if not (div_const and pi_const):
            report.note = "hypothesis failure: div_B P or pi(P) varies across samples"
            return report
        shift = float(div[0] - pipi[0])
    base_sum = qe.a + sum(c for c, u in zip(qe.coefficients, qe.generators) if u.location == BASE)
    c0 = shift - base_sum / wp.n2
    report.applicable = True
    report.c0 = c0
    report.max_error = float(np.max(np.abs(ctx.lap_f - c0 * ctx.f)))
    return report
