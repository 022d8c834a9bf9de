"""Verification suites and reports.

Sampling uses numpy's PCG64 bit generator.  The ambient sample points are
drawn first from ``PCG64(seed)`` (uniform per coordinate in the declared
box); each suite then draws its random test vectors from its own stream
``PCG64(SeedSequence([seed, suite_index]))`` so selecting a subset of suites
does not change what the others see.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .einstein import (
    EinsteinError,
    QEStructure,
    alpha_check,
    defect,
    fit,
    proposition_check,
    theorem_bookkeeping,
)
from .geometry import LocalGeometry
from .manifest import Manifest
from .ssnm import ConnectionSpec, relation_rhs
from .warped import BASE, FIBER, identity_checks, lift, scaled_error, zero_placement

SUITES = ("lemmas", "ssnm", "einstein")
ASSERT, CONTRACT, DIAGNOSTIC = "assert", "contract", "diagnostic"


@dataclass
class CheckRecord:
    id: str
    label: str
    kind: str
    samples: int
    max_error: Optional[float]
    tolerance: Optional[float]
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    manifest: str
    suite: str
    seed: int
    points: int
    records: list = field(default_factory=list)
    engine: str = __version__

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def summary(self) -> dict:
        failed = sum(not r.passed for r in self.records)
        return {"checks": len(self.records), "failed": failed, "passed": len(self.records) - failed, "ok": failed == 0}

    def as_dict(self) -> dict:
        return {
            "engine": self.engine,
            "manifest": self.manifest,
            "suite": self.suite,
            "seed": self.seed,
            "points": self.points,
            "summary": self.summary(),
            "records": [asdict(r) for r in sorted(self.records, key=lambda r: r.id)],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def table(self) -> str:
        rows = sorted(self.records, key=lambda r: r.id)
        width = max([len("check")] + [len(r.id) for r in rows])
        lines = [f"{'check':<{width}}  {'kind':<10}  {'n':>4}  {'max error':>10}  {'tol':>10}  result"]
        lines.append("-" * len(lines[0]))
        for r in rows:
            err = "-" if r.max_error is None else f"{r.max_error:10.3g}"
            tol = "-" if r.tolerance is None else f"{r.tolerance:10.3g}"
            verdict = "PASS" if r.passed else "FAIL"
            if r.kind == DIAGNOSTIC:
                verdict = "info"
            lines.append(f"{r.id:<{width}}  {r.kind:<10}  {r.samples:>4}  {err:>10}  {tol:>10}  {verdict}")
        s = self.summary()
        lines.append(f"{self.manifest} [{self.suite}] seed={self.seed}: {s['passed']}/{s['checks']} passed")
        return "\n".join(lines) + "\n"


def _finite(x) -> Optional[float]:
    x = float(x)
    return x if math.isfinite(x) else None


def _record(cid, label, kind, samples, err, tol, detail="") -> CheckRecord:
    err = _finite(err) if err is not None else None
    if kind == DIAGNOSTIC:
        passed = True
    else:
        passed = err is not None and err <= tol
    return CheckRecord(cid, label, kind, int(samples), err, tol if kind != DIAGNOSTIC else None, passed, detail)


def _guard(records: list, cid: str, label: str, fn: Callable[[], None]):
    """Run ``fn``; an exception becomes a failed record instead of a crash."""
    try:
        fn()
    except Exception as exc:  # noqa: BLE001 - every failure is reported
        records.append(CheckRecord(cid, label, ASSERT, 0, None, None, False, f"{type(exc).__name__}: {exc}"))


def sample(manifest: Manifest, count: int, seed: int) -> np.ndarray:
    box = np.asarray(manifest.wp.ambient.box, dtype=float)
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.uniform(box[:, 0], box[:, 1], size=(count, len(box)))


def _stream(seed: int, suite: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, SUITES.index(suite)])))


def _family_P(m: Manifest, family: str):
    if m.P is not None and m.P.location == family:
        return m.P
    return zero_placement(m.wp, family)


# --------------------------------------------------------------------------
# Suites
# --------------------------------------------------------------------------


def lemma_checks(m: Manifest, pts, rng, tol) -> list:
    records = []
    for family in (BASE, FIBER):
        P = _family_P(m, family)

        def run(P=P, family=family):
            for r in identity_checks(m.wp, P, pts, rng):
                cid = f"lemmas.{family}.{r.kind}.{r.case}"
                records.append(_record(cid, r.label, ASSERT, r.samples, r.max_error, tol["identity"]))

        _guard(records, f"lemmas.{family}", f"decompositions with P on the {family}", run)
    return records


def ssnm_checks(m: Manifest, pts, rng, tol) -> list:
    records = []
    wp = m.wp
    P = lift(wp, m.P if m.P is not None else zero_placement(wp, BASE))
    n, npts = wp.n, len(pts)

    def run():
        local = LocalGeometry(wp.ambient, pts)
        spec = ConnectionSpec.ssnm(P)
        X, Y, Z = (rng.uniform(-1.0, 1.0, (npts, n)) for _ in range(3))
        direct = np.einsum("...lijk,...i,...j,...k->...l", local.riemann(spec), X, Y, Z)
        via = relation_rhs(local, P, X, Y, Z)
        records.append(_record(
            "ssnm.curvature-relation",
            "Rbar(X,Y)Z = R(X,Y)Z + g(Z,nabla_X P)Y - g(Z,nabla_Y P)X + pi(Z)[pi(Y)X - pi(X)Y]",
            ASSERT, npts, scaled_error(direct, via).max(), tol["identity"],
        ))
        gamma, _ = spec.coefficients(local)
        pval, _ = P.jet(pts)
        pi = local.lower(pval)
        dot = lambda a, b: np.einsum("...i,...i->...", a, b)  # noqa: E731
        piX, piY, piZ = dot(pi, X), dot(pi, Y), dot(pi, Z)
        T = np.einsum("...kij,...i,...j->...k", gamma - np.swapaxes(gamma, -2, -1), X, Y)
        T_expected = piY[:, None] * X - piX[:, None] * Y
        records.append(_record("ssnm.torsion", "T(X,Y) = pi(Y)X - pi(X)Y", ASSERT, npts,
                               scaled_error(T, T_expected).max(), tol["identity"]))
        q = np.einsum("...ijk->...kij", local.dg)
        q = q - np.einsum("...lki,...lj->...kij", gamma, local.g) - np.einsum("...lkj,...il->...kij", gamma, local.g)
        Q = np.einsum("...kij,...k,...i,...j->...", q, X, Y, Z)
        Q_expected = -piY * local.inner(X, Z) - piZ * local.inner(X, Y)
        records.append(_record("ssnm.nonmetricity", "(nablabar_X g)(Y,Z) = -pi(Y)g(X,Z) - pi(Z)g(X,Y)", ASSERT, npts,
                               scaled_error(Q[:, None], Q_expected[:, None]).max(), tol["identity"]))

    _guard(records, "ssnm", "semi-symmetric non-metric connection identities", run)
    return records


def _default_generator(m: Manifest):
    from .generators import coordinate_placement

    return coordinate_placement(m.wp, BASE, 0)


def _einstein_family(m: Manifest, family: str, pts, tol, records: list):
    wp = m.wp
    P = _family_P(m, family)
    P_is_zero = m.P is None or m.P.location != family
    primary = m.P is None or m.P.location == family
    prefix = f"einstein.{family}"
    gens = list(m.generators)

    # -- parameters: declared, fitted (asserted), or fitted (diagnostic)
    if primary and m.qe is not None:
        qe = m.qe
        d = defect(wp, qe, pts, P=P)
        records.append(_record(f"{prefix}.defect", "Ricbar - a g - b A(x)A - c B(x)B = 0", ASSERT, len(pts), d.max_abs, tol["fit"]))
    else:
        kind = ASSERT if (primary and gens) else DIAGNOSTIC
        try:
            res = fit(wp, gens, pts, P=P)
        except EinsteinError as exc:
            records.append(CheckRecord(f"{prefix}.fit", "least-squares (G)QE parameters", kind, len(pts), None, None,
                                       kind == DIAGNOSTIC, f"{type(exc).__name__}: {exc}"))
            res = fit(wp, [], pts, P=P)
            gens = []
        else:
            params = ", ".join(f"{k}={v!r}" for k, v in zip("abc", res.params))
            records.append(_record(f"{prefix}.fit", "least-squares (G)QE parameters", kind, len(pts), res.residual, tol["fit"], params))
        if not gens:
            qe = QEStructure(res.a, 0.0, _default_generator(m))
        elif len(gens) == 1:
            qe = QEStructure(res.a, res.b, gens[0])
        else:
            qe = QEStructure(res.a, res.b, gens[0], res.c, gens[1])
        d = defect(wp, qe, pts, P=P)
    zero_defect = d.max_abs <= tol["fit"]

    # -- factor-level equations: conditional identities, always asserted
    rep = proposition_check(wp, P, qe, pts, tolerance=tol["identity"])
    for eq in rep.equations:
        cid = f"{prefix}.equations.{eq.label.replace(' ', '-')}"
        records.append(_record(cid, f"{eq.label} equation under pattern {rep.pattern}", CONTRACT, len(pts), eq.residual,
                               rep.bound, f"defect={rep.defect!r} K={rep.K!r}"))

    # -- constancy of the fiber bracket
    gqe = qe.U2 is not None
    which = {(BASE, False): "alpha1", (FIBER, False): "alpha2", (BASE, True): "alpha3", (FIBER, True): "alpha4"}[(family, gqe)]
    fiber_coefs = [c for c, u in zip(qe.coefficients, qe.generators) if u.location == FIBER]
    expect_constant = zero_defect and all(c == 0 for c in fiber_coefs) and (family == BASE or P_is_zero)
    alpha = alpha_check(wp, P, which, pts[:, : wp.n1], qe.a)
    records.append(_record(f"{prefix}.{which}", f"{which} constant across base points", ASSERT if expect_constant else DIAGNOSTIC,
                           len(pts), alpha.spread, tol["identity"]))

    # -- one-dimensional base bookkeeping
    thm = theorem_bookkeeping(wp, P, qe, pts)
    if thm.applicable:
        kind = ASSERT if zero_defect else DIAGNOSTIC
        records.append(_record(f"{prefix}.lap-f", "lap_B f = c0 f", kind, len(pts), thm.max_error, tol["identity"], f"c0={thm.c0!r}"))
    else:
        records.append(_record(f"{prefix}.lap-f", "lap_B f = c0 f", DIAGNOSTIC, len(pts), None, None, thm.note))


def einstein_checks(m: Manifest, pts, rng, tol) -> list:
    records = []
    for family in (BASE, FIBER):
        _guard(records, f"einstein.{family}", f"(G)QE checks with P on the {family}",
               lambda family=family: _einstein_family(m, family, pts, tol, records))
    return records


RUNNERS = {"lemmas": lemma_checks, "ssnm": ssnm_checks, "einstein": einstein_checks}


def run_suite(
    manifest: Manifest,
    suite: str = "all",
    points: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
) -> VerificationReport:
    """Run ``suite`` (``lemmas``, ``ssnm``, ``einstein`` or ``all``) on a manifest.

    ``points``/``seed`` override the manifest's sampling settings and ``tol``
    overrides the identity tolerance.
    """
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES + ('all',)}")
    npts = manifest.sampling["points"] if points is None else int(points)
    seed = manifest.sampling["seed"] if seed is None else int(seed)
    tolerances = dict(manifest.tolerances)
    if tol is not None:
        tolerances["identity"] = float(tol)
    report = VerificationReport(manifest.name, suite, seed, npts)
    pts = sample(manifest, npts, seed)
    for name in SUITES if suite == "all" else (suite,):
        report.records.extend(RUNNERS[name](manifest, pts, _stream(seed, name), tolerances))
    report.records.sort(key=lambda r: r.id)
    return report
