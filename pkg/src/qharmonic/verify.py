"""Numerical pass/fail checks for constructed harmonic functions."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import errors, gluing, harmonic, model
from .config import DEFAULT, Tolerances
from .kernel import Kernel, curve_M


@dataclass
class Check:
    name: str
    value: float | str | None
    tolerance: float | None
    passed: bool
    detail: str = ""


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, name, value, tolerance, passed=None, detail=""):
        if passed is None:
            passed = value is not None and value <= tolerance
        self.checks.append(Check(name, value, tolerance, bool(passed), detail))
        return passed

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks], "info": self.info}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def harmonicity_residual(grid, s: model.StepSet, t: float) -> float:
    """Largest relative interior residual of ``sum p f(i+k, j+l) - t f(i, j)``.

    The grid is extended by zero outside the quadrant; ``f`` is a
    ``HarmonicGrid`` or a plain array indexed ``[i, j]`` from 0.
    """
    f = np.asarray(getattr(grid, "values", grid), dtype=float)
    n = f.shape[0] - 1
    if n < 2:
        return 0.0
    core = f[1:n, 1:n]
    acc = -t * core
    for k in (-1, 0, 1):
        for l in (-1, 0, 1):
            w = s.p(k, l)
            if w:
                acc = acc + w * f[1 + k:n + k, 1 + l:n + l]
    return float(np.max(np.abs(acc) / np.maximum(np.abs(core), 1e-300)))


def boundary_condition_residual(fam: harmonic.HarmonicFamily, n: int = 64) -> float:
    """Sup over conjugate pairs of ``M`` of ``|A(x) - A(conj x)|``, each
    relative to ``max(|A(x)|, |A(conj x)|, median |A|)``.  ``A = L(x, 0) H(x, 0)``.

    The per-pair scale matters when ``p = X(y2)``: the pole of ``A`` then
    sits at an end of ``M``.
    """
    if n < 8:
        raise ValueError("need n >= 8")
    cs = curve_M(fam.kernel, n + 2)
    a, b = cs.first[1:-1], cs.second[1:-1]
    fa, fb = fam.A(a), fam.A(b)
    med = float(np.median(np.abs(np.concatenate([fa, fb]))))
    scale = np.maximum(np.maximum(np.abs(fa), np.abs(fb)), max(med, 1e-300))
    return float(np.max(np.abs(fa - fb) / scale))


def _richardson(seq, x, order=4):
    # polynomial extrapolation in x -> 0 through the last order+1 points,
    # applied to deviations from the last value so constant data stays exact
    xs = np.asarray(x[-(order + 1):], dtype=float)
    ys = np.asarray(seq[-(order + 1):], dtype=float)
    c = np.polyfit(xs, ys - ys[-1], order)
    return float(ys[-1] + c[-1])


def growth_check(coeffs, p: float | None = None):
    """Exponential growth rate of a positive sequence ``f(1), f(2), ...``.

    Uses the log-ratios ``log f(i+1)/f(i)``, which differ from the limit by a
    series in ``1/i`` even when ``f`` carries a polynomial factor, and
    extrapolates them to ``i = inf``.  Returns ``(estimate, |estimate - 1/p|)``
    (error ``nan`` without ``p``).
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size < 20:
        raise ValueError("need at least 20 coefficients")
    if np.any(c <= 0):
        return math.nan, math.inf
    i = np.arange(1, c.size)
    lr = np.log(c[1:] / c[:-1])
    est = math.exp(_richardson(lr, 1.0 / i))
    err = abs(est - 1 / p) if p else math.nan
    return est, err


def uniqueness_probe_at_t0(k: Kernel, gf: gluing.GluingFn | None = None, N: int = 10,
                           tol: Tolerances = DEFAULT) -> Report:
    """At ``t0`` the families at both segment ends must coincide up to scale."""
    rep = Report(info={"t": k.t})
    gf = gf or gluing.build(k, tol=tol)
    g0 = harmonic.coeffs_grid(harmonic.build_family(k, lam=0.0, gf=gf, tol=tol), N).normalized()
    g1 = harmonic.coeffs_grid(harmonic.build_family(k, lam=1.0, gf=gf, tol=tol), N).normalized()
    d = float(np.max(np.abs(g0[1:, 1:] - g1[1:, 1:]) / np.abs(g1[1:, 1:])))
    rep.add("proportional", d, tol.proportional)
    return rep


def full_report(s, t: float, p: float | None = None, N: int = 15, lam: float | None = None,
                tol: Tolerances = DEFAULT, samples: int = 64) -> Report:
    """Run the whole pipeline and collect every check.

    ``s`` may be raw weights; validation failures end the report early.
    """
    rep = Report(info={"t": t, "p": p, "lambda": lam, "N": N})
    try:
        if not isinstance(s, model.StepSet):
            s = model.validate(s, tol)
    except errors.ValidationError as e:
        rep.add("validate", type(e).__name__, None, False, str(e))
        return rep
    rep.add("validate", "ok", None, True)
    try:
        crit = model.solve_t0(s, tol)
        rep.info["t0"] = crit.t0
        regime = model.classify(s, t, tol.classify, crit)
        rep.info["regime"] = regime.value
        if regime is model.Regime.EMPTY:
            rep.add("family", "refused", None, False, "t < t0: no positive t-harmonic function")
            return rep
        k = Kernel(s, t)
        rep.info["branch_x"] = list(k.branch.x)
        rep.info["branch_y"] = list(k.branch.y)
        gf = gluing.build(k, tol=tol)
        rep.add("gluing", gluing.gluing_residual(gf, samples), tol.gluing)
        if p is None and lam is None:
            lam = 0.5
        fam = harmonic.build_family(k, p=p, lam=None if p is not None else lam, gf=gf, tol=tol)
        rep.info["p"], rep.info["p_prime"] = fam.p, fam.pprime
        rep.add("boundary", boundary_condition_residual(fam, samples), tol.boundary)
        grid = harmonic.coeffs_grid(fam, N)
        rep.add("harmonicity", harmonicity_residual(grid, s, t), tol.harmonicity)
        interior = grid.values[1:N, 1:N]
        rep.add("positivity", float(interior.min()), None, bool(np.all(interior > 0)))
        nx = max(30, N)
        gx = growth_check(harmonic.coeffs_x(fam, nx), fam.p)
        gy = growth_check(harmonic.coeffs_y(fam, nx), fam.pprime)
        rep.add("growth_x", gx[1] * fam.p, tol.growth)
        rep.add("growth_y", gy[1] * fam.pprime, tol.growth)
        a = model.level_point(s, t, crit=crit) if regime is model.Regime.SEGMENT else crit.a_star
        tilted = model.tilt(s, a, t, tol)
        rep.add("tilt", harmonicity_residual(model.transfer_harmonic(grid, a), tilted, 1.0),
                tol.harmonicity)
    except errors.QHarmonicError as e:
        rep.add("error", type(e).__name__, None, False, str(e))
    return rep
