"""Conformal gluing function of the domain bounded by the curve M.

``w`` is meromorphic and injective on the domain and identifies complex
conjugate points of its boundary, ``w(x) = w(conj x)`` on ``M``.  It is a
Moebius transform of an auxiliary function ``u``: for ``t > t0``, ``u`` is the
lattice-(omega1, omega3) wp evaluated at the lift of ``x`` to the
lattice-(omega1, omega2) torus; at ``t = t0`` both lattices lose their
imaginary period and ``u`` becomes trigonometric.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import polynomial as P

from . import elliptic, errors
from .config import DEFAULT, Tolerances
from .kernel import Kernel, X_branches, lobatto

GENERIC = "Generic"
CRITICAL = "Critical"


def g_map(x, delta, bp):
    """Moebius (or affine, for ``x4 = inf``) map sending the branch points
    ``x1, x2, x3`` to the half-period values of the (omega1, omega2) lattice.

    Raises
    ------
    PoleAtX4
    """
    x = np.asarray(x, dtype=complex)
    x4 = bp.x[3]
    if math.isinf(x4):
        return P.polyval(0.0, P.polyder(delta, 2)) / 6 + P.polyval(0.0, P.polyder(delta, 3)) * x / 6
    if np.any(np.abs(x - x4) <= 1e-14 * max(1.0, abs(x4))):
        raise errors.PoleAtX4(f"g has a pole at x4 = {x4}")
    d1 = P.polyval(x4, P.polyder(delta, 1))
    d2 = P.polyval(x4, P.polyder(delta, 2))
    return d2 / 6 + d1 / (x - x4)


def theta_angle(k: Kernel, bp=None, tol: Tolerances = DEFAULT, powers: str = "inverse") -> float:
    """Angle governing the critical trigonometric ``u``, in ``(0, pi)``.

    It is the angle of the covariance of the walk tilted to zero drift:
    ``cos(theta) = -sum ij p_ij x2^-i y2^-j / (2 sqrt(alpha(x2) alpha~(y2)))``.
    ``powers="printed"`` uses ``x2^i y2^j`` in the numerator instead; the two
    agree whenever the mixed term vanishes (e.g. for walks without
    diagonal steps) and otherwise the printed form disagrees with the
    ``t -> t0`` limit of ``pi omega3 / omega2``.

    Raises
    ------
    OutOfRange
        If the arccos argument leaves ``[-1, 1]`` by more than 1e-10.
    """
    bp = bp or k.branch
    x2, y2 = bp.x[1], bp.y[1]
    if powers == "inverse":
        bx, by = 1 / x2, 1 / y2
    elif powers == "printed":
        bx, by = x2, y2
    else:
        raise ValueError("powers must be 'inverse' or 'printed'")
    s = k.step
    num = sum(i * j * s.p(i, j) * bx ** i * by ** j for i in (-1, 1) for j in (-1, 1))
    den = 2 * math.sqrt(k.alpha(x2) * k.alpha_t(y2))
    c = -num / den
    if abs(c) > 1 + 1e-10:
        raise errors.OutOfRange(f"arccos argument {c} outside [-1, 1]")
    return math.acos(min(1.0, max(-1.0, c)))


def default_x0(k: Kernel) -> float:
    """Reference point in ``(X(y1), x2)`` kept away from 0 and from ``x1``.

    ``u`` has a pole at ``x1``, so ``x0 = x1`` would make ``u(x0)`` infinite.
    """
    lo = float(k.X_double(k.branch.y[0]))
    hi = k.branch.x[1]
    x1 = k.branch.x[0]
    width = hi - lo
    for frac in (1 / 2, 1 / 3, 2 / 3, 1 / 4, 3 / 4):
        c = lo + frac * width
        if abs(c) >= 0.05 * width and abs(c - x1) >= 0.05 * width:
            return c
    raise errors.DegenerateCurve("no admissible reference point in (X(y1), x2)")


@dataclass(frozen=True)
class GluingFn:
    """Conformal gluing function ``w`` with ``w(0) = 0`` and a pole at ``x0``.

    Call it like a function: ``gf(x)``.  Build with :func:`build`.
    """

    kernel: Kernel
    mode: str
    x0: float
    periods: elliptic.PeriodTriple
    lat12: elliptic.Lattice | None = None
    lat13: elliptic.Lattice | None = None
    theta: float | None = None
    d2: float | None = None  # delta'' used by the critical formula
    d2_at_double: bool = True
    scale: float = 1.0
    tol: Tolerances = field(default=DEFAULT, repr=False)
    u0: complex = 0j
    u_zero: complex = 0j

    def u(self, x):
        if self.mode == GENERIC:
            return u_generic(x, self)
        return u_critical(x, self)

    def __call__(self, x):
        return w_eval(x, self)


def _lattice_point(z, lat: elliptic.Lattice, tol: float):
    sa, sb = lat.coords(z)
    return (np.abs(sa - np.round(sa)) <= tol) & (np.abs(sb - np.round(sb)) <= tol)


def u_generic(x, gf: GluingFn):
    """``wp13(z - omega2/2)`` where ``z`` is the canonical lift of ``g(x)``.

    The lift lies in the half cell ``0 <= Re z <= omega2/2`` modulo
    ``omega1``; over that half cell ``wp13(z - omega2/2)`` is single valued,
    so no path tracking is needed.  Returns ``inf`` at ``x1`` (the pole).

    Raises
    ------
    BranchFault
        If ``u`` is not real at real points of ``(X(y1), x2)``.
    """
    if gf.mode != GENERIC:
        raise errors.DomainError("u_generic needs a generic-mode gluing function")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    k = gf.kernel
    v = g_map(x, k.delta, k.branch)
    z = elliptic.wp_inverse(v, gf.lat12, gf.tol)
    arg = z - gf.periods.omega2 / 2
    pole = _lattice_point(arg, gf.lat13, 1e-12)
    out = np.full(x.shape, complex(np.inf), dtype=complex)
    if np.any(~pole):
        out[~pole] = elliptic.wp(arg[~pole], gf.lat13, gf.tol)
    _check_real(x, out, gf)
    return complex(out[0]) if scalar else out


def u_critical(x, gf: GluingFn):
    """Trigonometric degeneration of ``u`` at ``t = t0``.

    Principal branches of ``sqrt`` and ``arcsin`` are used; the final
    ``sin(.)^-2`` is even, so the sign ambiguity on the arcsin cut is harmless.
    """
    if gf.mode != CRITICAL:
        raise errors.DomainError("u_critical needs a critical-mode gluing function")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    k = gf.kernel
    inner = _critical_inner(x, gf)
    at_x2 = inner == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.arcsin(1 / np.sqrt(np.where(at_x2, 1.0, inner)))
    if not np.all(np.isfinite(a)):
        raise errors.DomainFault("arcsin argument left the principal domain")
    s = np.sin(math.pi / gf.theta * (a - math.pi / 2))
    w3 = gf.periods.omega3
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (math.pi / w3) ** 2 * (1 / s ** 2 - 1 / 3)
    out = np.where(np.abs(s) <= 1e-300, complex(np.inf), out)
    # at the double point the arcsin argument is infinite and sin(.)^-2 -> 0
    out = np.where(at_x2, -(math.pi / w3) ** 2 / 3 + 0j, out)
    _check_real(x, out, gf)
    return complex(out[0]) if scalar else out


def _critical_inner(x, gf: GluingFn):
    # 1/3 - 2 g(x) / delta''; at the double point g(x2) = delta''(x2)/6, so
    # with delta'' taken there the difference factors through (x - x2) and
    # loses no digits next to x2
    k = gf.kernel
    bp = k.branch
    if not gf.d2_at_double:
        return 1 / 3 - 2 * g_map(x, k.delta, bp) / gf.d2
    x2, x4 = bp.x[1], bp.x[3]
    if math.isinf(x4):
        dg = P.polyval(0.0, P.polyder(k.delta, 3)) / 6 * (x - x2)
    else:
        d1 = P.polyval(x4, P.polyder(k.delta, 1))
        dg = -d1 * (x - x2) / ((x - x4) * (x2 - x4))
    return -2 * dg / gf.d2


def _check_real(x, u, gf: GluingFn):
    k = gf.kernel
    lo, hi = float(k.X_double(k.branch.y[0])), k.branch.x[1]
    on = (x.imag == 0) & (x.real > lo) & (x.real < hi) & np.isfinite(u)
    if np.any(on):
        bad = np.abs(u[on].imag) > gf.tol.realness * np.maximum(1.0, np.abs(u[on]))
        if np.any(bad):
            xb = x[on][bad][0]
            raise errors.BranchFault(f"u is not real at real point x = {xb.real}")


def w_eval(x, gf: GluingFn):
    """``u0/(u - u0) - u0/(u(0) - u0)``, times the optional scale factor.

    Raises
    ------
    PoleAtReference
        If ``x`` is within 1e-10 of ``x0``.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if np.any(np.abs(x - gf.x0) <= gf.tol.pole):
        raise errors.PoleAtReference(f"w has its pole at x0 = {gf.x0}")
    u = gf.u(x)
    u0 = gf.u0
    shift = u0 / (gf.u_zero - u0)
    fin = np.isfinite(u)
    out = np.full(x.shape, -shift, dtype=complex)
    out[fin] = u0 / (u[fin] - u0) - shift
    out = gf.scale * out
    return complex(out[0]) if scalar else out


def build(k: Kernel, x0: float | None = None, critical_d2: str = "x2",
          theta_powers: str = "inverse", tol: Tolerances = DEFAULT, periods: elliptic.PeriodTriple | None = None) -> GluingFn:
    """Construct the gluing function of ``k``.

    Parameters
    ----------
    x0 : float, optional
        Reference point in ``(X(y1), x2)``, nonzero; see :func:`default_x0`.
    critical_d2 : {"x2", "1"}
        Where ``delta''`` is evaluated in the critical formula.  ``"x2"``
        (the double point) is the trigonometric limit of the generic
        construction; ``"1"`` evaluates at the point 1, which coincides only
        when the double point happens to be 1.
    theta_powers : {"inverse", "printed"}
        Numerator convention of :func:`theta_angle`.
    periods : PeriodTriple, optional
        Override the computed periods (used for negative controls).
    """
    bp = k.branch
    x_y1 = float(k.X_double(bp.y[0]))
    if x0 is None:
        x0 = default_x0(k)
    elif not (x_y1 < x0 < bp.x[1]) or x0 == 0:
        raise errors.OutOfRange(f"x0 = {x0} must lie in ({x_y1}, {bp.x[1]}) minus 0")
    critical = k.is_critical
    if critical:
        x1, x4 = bp.x[0], bp.x[3]
        if not math.isinf(x4) and abs(x1 - x4) <= tol.merge_double * max(1.0, abs(x4)):
            raise errors.DegenerateCurve(
                "x1 and x4 coincide at t0: the curve has a second double point")
    if periods is None:
        periods = elliptic.period_integrals(bp, k.delta, x_y1, critical=critical, tol=tol)
    if critical:
        if critical_d2 == "x2":
            at = bp.x[1]
        elif critical_d2 == "1":
            at = 1.0
        else:
            raise ValueError("critical_d2 must be 'x2' or '1'")
        d2 = float(P.polyval(at, P.polyder(k.delta, 2)))
        gf = GluingFn(k, CRITICAL, float(x0), periods, theta=theta_angle(k, bp, tol, theta_powers),
                      d2=d2, d2_at_double=critical_d2 == "x2", tol=tol)
    else:
        lat12 = elliptic.invariants_from_lattice(periods.omega1, periods.omega2)
        lat13 = elliptic.invariants_from_lattice(periods.omega1, periods.omega3)
        gf = GluingFn(k, GENERIC, float(x0), periods, lat12, lat13, tol=tol)
    u0 = gf.u(x0)
    uz = gf.u(0.0)
    if not (np.isfinite(u0) and np.isfinite(uz)) or abs(uz - u0) <= tol.pole * max(1.0, abs(u0)):
        raise errors.PoleAtReference("u(x0) is infinite or equals u(0)")
    return replace(gf, u0=complex(u0.real), u_zero=complex(uz.real))


def perturbed(gf: GluingFn, factor: float = 1.01) -> GluingFn:
    """Copy of ``gf`` rebuilt with ``omega2`` (critical mode: ``theta``) scaled.

    A deliberately wrong gluing function for negative controls.
    """
    if gf.mode == CRITICAL:
        # omega3 only rescales the critical u, which w ignores; bend theta
        bad = replace(gf, theta=gf.theta * factor)
        return replace(bad, u0=complex(bad.u(bad.x0).real), u_zero=complex(bad.u(0.0).real))
    bad = replace(gf.periods, omega2=gf.periods.omega2 * factor)
    return build(gf.kernel, gf.x0, tol=gf.tol, periods=bad)


def scaled(gf: GluingFn, c: float) -> GluingFn:
    """``c * w`` (still a gluing function)."""
    return replace(gf, scale=gf.scale * c)


def w_derivs_at_0(gf: GluingFn, h0: float | None = None, levels: int = 8):
    """``(w'(0), w''(0))`` by fourth-order central differences on the real
    axis with Richardson extrapolation over step halvings.

    Raises
    ------
    DerivativeNonConvergence
    """
    bp = gf.kernel.branch
    if h0 is None:
        h0 = 0.1 * min(abs(gf.x0), abs(bp.x[0]), bp.x[1])

    def diffs(h):
        pts = np.array([-2 * h, -h, 0.0, h, 2 * h])
        f = w_eval(pts, gf).real
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        return d1, d2

    # a derivative can vanish (w'(0) = 0 when M ends at the origin), so the
    # stopping rule has an absolute floor on the natural scale |w| / h^n
    wscale = float(np.max(np.abs(w_eval(np.array([-h0, h0]), gf))))
    out = []
    for which in (0, 1):
        floor = 1e-3 * wscale / h0 ** (which + 1)
        table = []
        best = None
        for lev in range(levels):
            row = [diffs(h0 / 2 ** lev)[which]]
            for m in range(1, lev + 1):
                fac = 4.0 ** (m + 1)
                row.append(row[m - 1] + (row[m - 1] - table[-1][m - 1]) / (fac - 1))
            table.append(row)
            if lev >= 2:
                a, b = table[-1][-1], table[-2][-1]
                if abs(a - b) <= gf.tol.derivative * max(abs(a), floor, 1e-300):
                    best = a
                    break
        if best is None:
            raise errors.DerivativeNonConvergence(
                f"Richardson table for derivative {which + 1} did not settle")
        out.append(best)
    return out[0], out[1]


def _samples(k: Kernel, n: int):
    y1, y2 = k.branch.y[:2]
    ys = lobatto(y1, y2, n)[1:-1]
    return X_branches(k, ys)


def gluing_residual(gf: GluingFn, n: int = 64) -> float:
    """Sup of ``|w(X0(y)) - w(X1(y))|`` over ``n`` Chebyshev points of
    ``[y1, y2]``, relative to the median ``|w|`` on the samples."""
    if n < 8:
        raise ValueError("need n >= 8")
    a, b = _samples(gf.kernel, n + 2)
    wa, wb = w_eval(a, gf), w_eval(b, gf)
    scale = float(np.median(np.abs(np.concatenate([wa, wb]))))
    return float(np.max(np.abs(wa - wb)) / max(scale, 1e-300))


def dump_csv(gf: GluingFn, xs, path) -> None:
    """Write ``x_re, x_im, w_re, w_im`` rows for diagnostics."""
    xs = np.asarray(xs, dtype=complex)
    ws = w_eval(xs, gf)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x_re", "x_im", "w_re", "w_im"])
        for x, w in zip(xs, ws):
            wr.writerow([repr(x.real), repr(x.imag), repr(w.real), repr(w.imag)])
