"""Minimal t-harmonic functions from the gluing function.

For ``p`` on the segment ``[x2, X(y2)]`` put ``A(x) = c_alpha / (w(x) - w(p)) +
c_beta``.  Then ``L(x,0) H(x,0) = A(x)`` and, through the functional equation,

    H(x, y) = (A(x) - A(X0(y))) / L(x, y),

whose Taylor coefficients are ``f(i+1, j+1)``.  Only one-dimensional
evaluations of ``w`` are needed; the double Cauchy sum is one 2-D FFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import errors, gluing
from .config import DEFAULT, Tolerances
from .kernel import Kernel, X_branches, conjugate_point, eval_L, segment_S


@dataclass(frozen=True)
class HarmonicFamily:
    """Generating-function data of the minimal harmonic function at ``p``.

    ``c_alpha`` and ``c_beta`` are the constants in front of and beside
    ``1 / (w - w(p))``; ``f11`` is the normalisation ``f(1, 1)``.
    """

    kernel: Kernel
    gf: gluing.GluingFn
    p: float
    pprime: float
    c_alpha: float
    c_beta: float
    w_p: float
    f11: float = 1.0
    lam: float | None = None
    tol: Tolerances = field(default=DEFAULT, repr=False)

    def A(self, x):
        """``L(x, 0) H(x, 0)``."""
        return self.c_alpha / (self.gf(x) - self.w_p) + self.c_beta

    def metadata(self) -> dict:
        return {
            "t": self.kernel.t,
            "t0": self.kernel.critical.t0,
            "p": self.p,
            "p_prime": self.pprime,
            "lambda": self.lam,
            "c_alpha": self.c_alpha,
            "c_beta": self.c_beta,
            "mode": self.gf.mode,
        }


@dataclass(frozen=True)
class HarmonicGrid:
    """``values[i, j] = f(i, j)`` for ``0 <= i, j <= N``; zero on the axes."""

    values: np.ndarray
    radii: tuple[float, float] = (math.nan, math.nan)
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.values.shape[0] - 1

    def normalized(self) -> np.ndarray:
        return self.values / self.values[1, 1]

    def rows(self):
        n = self.N
        for i in range(n + 1):
            for j in range(n + 1):
                yield i, j, float(self.values[i, j])


def segment_point(k: Kernel, lam: float) -> float:
    """``p = x2 + lam (X(y2) - x2)`` for ``lam`` in ``[0, 1]``."""
    if not 0.0 <= lam <= 1.0:
        raise errors.OutOfSegment(f"lambda = {lam} outside [0, 1]")
    lo, hi = segment_S(k)
    if lam == 0.0:
        return lo
    if lam == 1.0:
        return hi
    return lo + lam * (hi - lo)


def constants(gf: gluing.GluingFn, k: Kernel, p: float, f11: float = 1.0,
              tol: Tolerances = DEFAULT) -> tuple[float, float]:
    """``(c_alpha, c_beta)`` from the expansion of ``A`` at ``x = 0``.

    Three cases by the steps that make ``L(x, 0)`` vanish at the origin:
    ``p11 = 0, p01 != 0`` matches first derivatives, ``p11 = p01 = 0``
    matches second derivatives, and ``p11 != 0`` uses that ``A`` vanishes at
    the root ``X0(0)`` of ``L(x, 0)``.

    Raises
    ------
    ZeroDerivative, PoleCollision
    """
    s = k.step
    p11, p01, pm11 = s.p(1, 1), s.p(0, 1), s.p(-1, 1)
    wp = gf(p).real
    if p11 == 0:
        d1, d2 = gluing.w_derivs_at_0(gf)
        if p01 != 0:
            if abs(d1) <= tol.zero_derivative:
                raise errors.ZeroDerivative("w'(0) vanishes")
            ca = -p01 * wp ** 2 / d1
        else:
            if abs(d2) <= tol.zero_derivative:
                raise errors.ZeroDerivative("w''(0) vanishes")
            ca = -2 * pm11 * wp ** 2 / d2
        ca *= f11
    else:
        x00 = X_branches(k, 0.0)[0]
        wx = gf(x00)
        if abs(wx - wp) <= tol.pole_collision * max(1.0, abs(wp)):
            raise errors.PoleCollision("w(p) coincides with w(X0(0))")
        ca = -p11 * f11 * (wx - wp) * wp / wx
        if abs(ca.imag) > tol.coefficient_imag * abs(ca):
            raise errors.BranchFault(f"complex constant {ca}")
        ca = ca.real
    cb = p11 * f11 + ca / wp
    return float(ca), float(cb)


def build_family(k: Kernel, p: float | None = None, lam: float | None = None,
                 gf: gluing.GluingFn | None = None, tol: Tolerances = DEFAULT) -> HarmonicFamily:
    """Family at ``p`` (absolute) or ``lam`` (relative position on the segment)."""
    if (p is None) == (lam is None):
        raise ValueError("give exactly one of p and lam")
    if k.t < k.critical.t0 - tol.classify:
        raise errors.RegimeError(f"t = {k.t} is below t0 = {k.critical.t0}")
    if p is None:
        p = segment_point(k, lam)
    gf = gf or gluing.build(k, tol=tol)
    pp = conjugate_point(k, p)
    ca, cb = constants(gf, k, p, tol=tol)
    return HarmonicFamily(k, gf, float(p), pp, ca, cb, float(gf(p).real), lam=lam, tol=tol)


def critical_family(gf: gluing.GluingFn, k: Kernel, tol: Tolerances = DEFAULT) -> HarmonicFamily:
    """The unique family at ``t = t0``, built at the collapsed segment point."""
    if not k.is_critical:
        raise errors.RegimeError("critical_family needs t = t0")
    return build_family(k, lam=0.0, gf=gf, tol=tol)


def H_boundary_x(fam: HarmonicFamily, x):
    """``H(x, 0) = sum f(i, 1) x^(i-1)``.

    At a removable zero of ``L(x, 0)`` at the origin the normalisation
    ``f(1, 1)`` is returned.

    Raises
    ------
    PoleAtP, ZeroOfGamma
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if np.any(np.abs(x - fam.p) <= fam.tol.pole * max(1.0, fam.p)):
        raise errors.PoleAtP(f"H(x, 0) is singular at p = {fam.p}")
    k = fam.kernel
    gam = k.gamma(x)
    out = np.empty(x.shape, dtype=complex)
    origin = (x == 0) & (k.gamma(0.0) == 0)
    out[origin] = fam.f11
    rest = ~origin
    g = gam[rest]
    if np.any(np.abs(g) <= 1e-13):
        raise errors.ZeroOfGamma("x is at a root of L(x, 0)")
    out[rest] = fam.A(x[rest]) / g
    return complex(out[0]) if scalar else out


def H_boundary_y(fam: HarmonicFamily, y):
    """``H(0, y) = (p11 f11 - A(X0(y))) / L(0, y)``.

    Raises
    ------
    ZeroOfGammaTilde
    """
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    k = fam.kernel
    p11 = k.step.p(1, 1)
    out = np.empty(y.shape, dtype=complex)
    origin = (y == 0) & (k.gamma_t(0.0) == 0)
    out[origin] = fam.f11
    rest = ~origin
    gt = k.gamma_t(y[rest])
    if np.any(np.abs(gt) <= 1e-13):
        raise errors.ZeroOfGammaTilde("y is at a root of L(0, y)")
    x0 = X_branches(k, y[rest])[0]
    out[rest] = (p11 * fam.f11 - fam.A(x0)) / gt
    return complex(out[0]) if scalar else out


def _L_scale(k: Kernel, x, y):
    # sum of the moduli of the individual terms of L, to judge when L is "zero"
    ax, ay = np.abs(x), np.abs(y)
    out = k.t * ax * ay
    for (kk, ll) in ((a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)):
        w = k.step.p(kk, ll)
        if w:
            out = out + w * ax ** (1 - kk) * ay ** (1 - ll)
    return out


def H_full(fam: HarmonicFamily, x, y):
    """``H(x, y)`` from the functional equation.

    On the axes the boundary functions are used directly, which also covers
    the removable point ``(0, 0)`` when ``p11 = 0``.

    Raises
    ------
    OnKernelCurve
    """
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    x, y = np.broadcast_arrays(np.atleast_1d(np.asarray(x, dtype=complex)),
                               np.atleast_1d(np.asarray(y, dtype=complex)))
    k = fam.kernel
    out = np.empty(x.shape, dtype=complex)
    on_x = y == 0
    on_y = (x == 0) & ~on_x
    rest = ~(on_x | on_y)
    if np.any(on_x):
        out[on_x] = H_boundary_x(fam, x[on_x])
    if np.any(on_y):
        out[on_y] = H_boundary_y(fam, y[on_y])
    if np.any(rest):
        xr, yr = x[rest], y[rest]
        L = eval_L(k, xr, yr)
        if np.any(np.abs(L) <= 1e-12 * np.maximum(_L_scale(k, xr, yr), 1e-300)):
            raise errors.OnKernelCurve("(x, y) is on the kernel curve")
        out[rest] = (fam.A(xr) - fam.A(X_branches(k, yr)[0])) / L
    return complex(out[0]) if scalar else out


def default_radii(fam: HarmonicFamily, ratio: float = 0.8) -> tuple[float, float]:
    """Contour radii for coefficient extraction, a fixed fraction of the
    radii of convergence ``p`` and ``p'``."""
    return ratio * fam.p, ratio * fam.pprime


def _check_coeffs(c, tol: Tolerances, what: str):
    if np.any(np.abs(c.imag) > tol.coefficient_imag * np.abs(c.real) + 1e-300):
        raise errors.RadiusTooLarge(f"{what}: coefficients are not real")
    if np.any(c.real <= 0):
        raise errors.RadiusTooLarge(f"{what}: coefficients are not positive")
    return c.real


def _circle(r, m):
    return r * np.exp(2j * np.pi * np.arange(m) / m)


def coeffs_x(fam: HarmonicFamily, N: int, r: float | None = None, M: int | None = None) -> np.ndarray:
    """``f(i, 1)`` for ``i = 1..N`` by a trapezoidal Cauchy sum on ``|x| = r``."""
    r = r or default_radii(fam)[0]
    if not 0 < r < fam.p:
        raise errors.RadiusTooLarge(f"radius {r} must lie in (0, p = {fam.p})")
    M = M or max(256, 8 * N)
    xs = _circle(r, M)
    c = np.fft.fft(H_boundary_x(fam, xs))[:N] / M / r ** np.arange(N)
    return _check_coeffs(c, fam.tol, "coeffs_x")


def coeffs_y(fam: HarmonicFamily, N: int, r: float | None = None, M: int | None = None) -> np.ndarray:
    """``f(1, j)`` for ``j = 1..N`` on ``|y| = r``."""
    r = r or default_radii(fam)[1]
    if not 0 < r < fam.pprime:
        raise errors.RadiusTooLarge(f"radius {r} must lie in (0, p' = {fam.pprime})")
    M = M or max(256, 8 * N)
    ys = _circle(r, M)
    c = np.fft.fft(H_boundary_y(fam, ys))[:N] / M / r ** np.arange(N)
    return _check_coeffs(c, fam.tol, "coeffs_y")


def coeffs_grid(fam: HarmonicFamily, N: int, radii=None, M: int | None = None,
                threads: int = 1) -> HarmonicGrid:
    """``f(i, j)`` for ``0 <= i, j <= N`` by a double Cauchy sum.

    The torus generally meets the kernel zero set at isolated points, where
    ``H`` is analytic but the quotient is 0/0; if a node lands too close to
    one, the radii are nudged down and the sum repeated.

    ``threads`` is accepted for interface stability; the FFT order is fixed,
    so results never depend on it.

    Raises
    ------
    TorusOnKernel
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    k = fam.kernel
    M = M or max(256, 8 * N)
    rx, ry = radii or default_radii(fam)
    for attempt in range(20):
        xs, ys = _circle(rx, M), _circle(ry, M)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        L = eval_L(k, X, Y)
        rel = np.abs(L) / _L_scale(k, X, Y)
        if rel.min() > 1e-6:
            break
        rx, ry = rx * 0.985, ry * 0.99
    else:
        raise errors.TorusOnKernel("no admissible torus radii found")
    ax = fam.A(xs)
    ay = fam.A(X_branches(k, ys)[0])
    vals = (ax[:, None] - ay[None, :]) / L
    c = np.fft.fft2(vals)[:N, :N] / (M * M)
    c = c / np.outer(rx ** np.arange(N), ry ** np.arange(N))
    scale = np.abs(c)
    if np.any(np.abs(c.imag) > fam.tol.coefficient_imag * scale + 1e-300):
        raise errors.RadiusTooLarge("grid coefficients are not real")
    out = np.zeros((N + 1, N + 1))
    out[1:, 1:] = c.real
    meta = dict(fam.metadata(), radii=[rx, ry], nodes=M)
    return HarmonicGrid(out, (rx, ry), meta)


def closed_form_simple(s, t: float, p: float, i, j, tol: Tolerances = DEFAULT):
    """Minimal harmonic function of a walk with axis steps only.

    Raises
    ------
    NotSimpleWalk, OutOfSegment
    """
    if not s.is_simple:
        raise errors.NotSimpleWalk("closed form needs axis steps only")
    k = Kernel(s, t)
    lo, hi = segment_S(k)
    slack = 1e-9 * max(1.0, hi)
    if not (lo - slack <= p <= hi + slack):
        raise errors.OutOfSegment(f"p = {p} is outside [{lo}, {hi}]")
    pp = conjugate_point(k, min(max(p, lo), hi))
    i = np.asarray(i, dtype=float)
    j = np.asarray(j, dtype=float)
    rx = s.p(-1, 0) / s.p(1, 0) * p
    ry = s.p(0, -1) / s.p(0, 1) * pp
    fx = (1 / p) ** i - rx ** i
    fy = (1 / pp) ** j - ry ** j
    if abs(p - lo) <= slack:
        fy = j * (1 / pp) ** j
    if abs(p - hi) <= slack:
        fx = i * (1 / p) ** i
    return fx * fy


def closed_form_grid(s, t: float, p: float, N: int) -> HarmonicGrid:
    ii, jj = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
    vals = closed_form_simple(s, t, p, ii, jj)
    vals[0, :] = 0.0
    vals[:, 0] = 0.0
    return HarmonicGrid(vals / vals[1, 1], meta={"t": t, "p": p, "closed_form": True})


def y_branch_check(fam: HarmonicFamily) -> float:
    """``|L(p, p')|``; the family's defining point lies on the kernel curve."""
    return float(abs(eval_L(fam.kernel, fam.p, fam.pprime)))


__all__ = [
    "HarmonicFamily", "HarmonicGrid", "segment_point", "constants", "build_family",
    "critical_family", "H_boundary_x", "H_boundary_y", "H_full", "default_radii",
    "coeffs_x", "coeffs_y", "coeffs_grid", "closed_form_simple", "closed_form_grid",
    "y_branch_check",
]
