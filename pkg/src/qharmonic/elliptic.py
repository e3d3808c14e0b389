"""Period integrals and Weierstrass elliptic functions on a given lattice.

Conventions: a :class:`Lattice` is built from two *full* periods ``(g_a, g_b)``
so that ``wp(z + g_a) = wp(z + g_b) = wp(z)``.  Invariants come from Eisenstein
q-series; ``wp`` itself uses a Laurent expansion at the origin followed by
repeated duplication; its inverse uses Carlson's symmetric integral ``R_F``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P

from . import errors
from .config import DEFAULT, Tolerances

# ----------------------------------------------------------------------------
# quadrature for integrals of 1/sqrt(+-delta) between roots of delta
# ----------------------------------------------------------------------------


def _factored(x, da, db, a, b, roots, lead):
    # lead * prod(x - r), with the endpoint factors taken from the exact
    # distances so that no cancellation occurs next to a root
    out = np.full_like(x, lead, dtype=float)
    for r in roots:
        if math.isinf(r):
            continue
        if r == a:
            out = out * da
        elif r == b:
            out = out * (-db)
        else:
            out = out * (x - r)
    return out


def tanh_sinh(a: float, b: float, roots, lead: float, sign: float, h: float,
              tmax: float = 4.5) -> float:
    """Double-exponential rule for ``int_a^b dx / sqrt(sign * delta(x))``.

    ``delta = lead * prod(x - r)`` over ``roots``; endpoints coinciding with a
    root produce inverse-square-root singularities, which the transform
    absorbs.
    """
    t = np.arange(-tmax, tmax + 0.5 * h, h)
    u = 0.5 * np.pi * np.sinh(t)
    half = 0.5 * (b - a)
    da = half * 2.0 / (1.0 + np.exp(-2.0 * u))
    db = half * 2.0 / (1.0 + np.exp(2.0 * u))
    x = np.where(t < 0, a + da, b - db)
    wgt = h * half * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    keep = (da > 0) & (db > 0) & (wgt > 0)
    val = sign * _factored(x[keep], da[keep], db[keep], a, b, roots, lead)
    if np.any(val < 0):
        bad = x[keep][val < 0]
        scale = abs(lead) * max(1.0, max(abs(r) for r in roots if not math.isinf(r))) ** 4
        if np.any(np.abs(val[val < 0]) > 1e-10 * scale):
            raise errors.NegativeIntegrand(f"integrand sign violated near x = {bad[0]}")
        val = np.abs(val)
    return float(np.sum(wgt[keep] / np.sqrt(val)))


def sine_substitution(a: float, b: float, roots, lead: float, sign: float, n: int) -> float:
    """Independent rule: ``x = mid + half sin(theta)`` then Gauss-Legendre in theta.

    The substitution removes the square-root singularity at either endpoint,
    leaving a smooth integrand.
    """
    th, w = np.polynomial.legendre.leggauss(n)
    th = 0.5 * np.pi * th
    w = 0.5 * np.pi * w
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    s = np.sin(th)
    x = mid + half * s
    # x - a = half (1 + s) = half cos^2 / (1 - s), computed without cancellation
    c2 = np.cos(th) ** 2
    da = half * np.where(s >= 0, 1 + s, c2 / (1 - s))
    db = half * np.where(s <= 0, 1 - s, c2 / (1 + s))
    val = sign * _factored(x, da, db, a, b, roots, lead)
    return float(np.sum(w * half * np.cos(th) / np.sqrt(np.abs(val))))


def inv_sqrt_integral(a, b, roots, lead, sign, tol: Tolerances = DEFAULT) -> float:
    """Tanh-sinh with step halving; consecutive levels must agree."""
    prev = tanh_sinh(a, b, roots, lead, sign, 1 / 8)
    for k in range(4, 11):
        cur = tanh_sinh(a, b, roots, lead, sign, 2.0 ** -k)
        if abs(cur - prev) <= 0.01 * tol.quadrature * abs(cur):
            return cur
        prev = cur
    if abs(cur - prev) <= tol.quadrature * abs(cur):
        return cur
    raise errors.QuadratureDisagreement(
        f"tanh-sinh levels disagree: {prev!r} vs {cur!r} on [{a}, {b}]")


@dataclass(frozen=True)
class PeriodTriple:
    """``omega1`` (purely imaginary), ``omega2`` and ``omega3`` (positive).

    ``omega2`` is ``None`` at ``t = t0`` where ``omega1`` diverges; ``omega1``
    is then ``None`` too and ``omega2_limit`` carries the finite limit of
    ``omega2``.
    """

    omega1: complex | None
    omega2: float | None
    omega3: float
    omega2_limit: float | None = None


def _delta_lead(delta):
    return float(delta[4]) if delta[4] != 0 else float(delta[3])


def period_integrals(bp, delta, x_y1: float, critical: bool = False,
                     tol: Tolerances = DEFAULT, cross_check: bool = True) -> PeriodTriple:
    """The three period integrals of ``dx / sqrt(delta)``.

    ``omega1 = i int_{x1}^{x2} dx/sqrt(-delta)``, ``omega2 = int_{x2}^{x3}
    dx/sqrt(delta)``, ``omega3 = int_{X(y1)}^{x1} dx/sqrt(delta)``.  Each is
    computed by tanh-sinh and, when ``cross_check``, compared with the
    sine-substitution rule.
    """
    x1, x2, x3, x4 = bp.x
    roots = [x1, x2, x3, x4]
    deg4 = not math.isinf(x4)
    lead = _delta_lead(delta)
    if not deg4:
        roots = roots[:3]
    if not x_y1 < x1:
        raise errors.DegenerateCurve(
            f"X(y1) = {x_y1} is not left of x1 = {x1}; the arc through infinity is not supported")

    def integral(a, b, sign):
        val = inv_sqrt_integral(a, b, roots, lead, sign, tol)
        if cross_check:
            alt = sine_substitution(a, b, roots, lead, sign, 200)
            alt2 = sine_substitution(a, b, roots, lead, sign, 400)
            if abs(alt2 - val) > tol.quadrature * abs(val) and abs(alt - alt2) <= 1e-13 * abs(alt2):
                raise errors.QuadratureDisagreement(
                    f"quadrature schemes disagree on [{a}, {b}]: {val!r} vs {alt2!r}")
        return val

    omega3 = integral(x_y1, x1, 1.0)
    if critical:
        d2 = P.polyval(x2, P.polyder(delta, 2))
        if not d2 < 0:
            raise errors.DegenerateCurve(f"delta''(x2) = {d2} is not negative at the double root")
        return PeriodTriple(None, None, omega3, math.pi / math.sqrt(-0.5 * d2))
    omega1 = 1j * integral(x1, x2, -1.0)
    omega2 = integral(x2, x3, 1.0)
    return PeriodTriple(omega1, omega2, omega3)


# ----------------------------------------------------------------------------
# lattices
# ----------------------------------------------------------------------------


def _reduce_basis(a: complex, b: complex):
    """Gauss-reduced basis ``(w, w')`` with ``tau = w'/w`` in the fundamental domain."""
    if abs(a) > abs(b):
        a, b = b, a
    for _ in range(100):
        m = round((b / a).real)
        b = b - m * a
        if abs(b) < abs(a):
            a, b = b, a
        else:
            break
    if (b / a).imag < 0:
        b = -b
    return a, b


def _sigma_sum(q, power, nmax=60):
    n = np.arange(1, nmax + 1)
    qn = q ** n
    return np.sum(n ** power * qn / (1 - qn))


@dataclass(frozen=True)
class Lattice:
    """Period lattice ``Z g_a + Z g_b`` with invariants and half-period values.

    ``e`` holds ``(wp(g_a/2), wp(g_b/2), wp((g_a+g_b)/2))``.
    """

    g_a: complex
    g_b: complex
    omega: complex  # shortest period of the reduced basis
    tau: complex
    g2: complex
    g3: complex
    e: tuple[complex, complex, complex]

    @cached_property
    def laurent(self) -> np.ndarray:
        return _laurent_coeffs(self.g2, self.g3, 20)

    @property
    def nome(self) -> complex:
        return complex(np.exp(2j * np.pi * self.tau))

    def coords(self, z):
        """Real coordinates ``(s_a, s_b)`` with ``z = s_a g_a + s_b g_b``."""
        z = np.asarray(z, dtype=complex)
        m = np.array([[self.g_a.real, self.g_b.real], [self.g_a.imag, self.g_b.imag]])
        inv = np.linalg.inv(m)
        sa = inv[0, 0] * z.real + inv[0, 1] * z.imag
        sb = inv[1, 0] * z.real + inv[1, 1] * z.imag
        return sa, sb

    @property
    def is_rectangular(self) -> bool:
        return abs((self.g_a / self.g_b).real) <= 1e-12 * abs(self.g_a / self.g_b)


def invariants_from_lattice(g_a: complex, g_b: complex) -> Lattice:
    """Lattice invariants ``g2, g3`` and half-period values via q-series.

    Raises
    ------
    DegenerateLattice
        If the generators are (nearly) collinear.
    """
    g_a, g_b = complex(g_a), complex(g_b)
    if g_a == 0 or g_b == 0 or abs((g_b / g_a).imag) <= 1e-14 * abs(g_b / g_a):
        raise errors.DegenerateLattice("generators are collinear")
    w, w2 = _reduce_basis(g_a, g_b)
    tau = w2 / w
    q = complex(np.exp(2j * np.pi * tau))
    if abs(q) >= 1 - 1e-6:
        raise errors.DegenerateLattice(f"nome |q| = {abs(q)} too close to 1")
    e4 = 1 + 240 * _sigma_sum(q, 3)
    e6 = 1 - 504 * _sigma_sum(q, 5)
    g2 = (4 * math.pi ** 4 / 3) * e4 / w ** 4
    g3 = (8 * math.pi ** 6 / 27) * e6 / w ** 6
    lat = Lattice(g_a, g_b, w, tau, complex(g2), complex(g3), (0j, 0j, 0j))
    halves = np.array([g_a / 2, g_b / 2, (g_a + g_b) / 2])
    e = wp_qseries(halves, lat)
    if lat.is_rectangular:
        # rectangular lattices are real: the half-period values are real
        e = np.where(np.abs(e.imag) <= 1e-13 * np.abs(e), e.real + 0j, e)
    object.__setattr__(lat, "e", tuple(complex(v) for v in e))
    return lat


def _laurent_coeffs(g2, g3, kmax):
    c = np.zeros(kmax + 1, dtype=complex)
    c[2] = g2 / 20
    c[3] = g3 / 28
    for k in range(4, kmax + 1):
        c[k] = 3 / ((2 * k + 1) * (k - 3)) * sum(c[m] * c[k - m] for m in range(2, k - 1))
    return c


def _reduce(z, lat: Lattice):
    # translate into the cell centred at 0 of the reduced basis
    w, w2 = lat.omega, lat.omega * lat.tau
    m = np.array([[w.real, w2.real], [w.imag, w2.imag]])
    inv = np.linalg.inv(m)
    s1 = inv[0, 0] * z.real + inv[0, 1] * z.imag
    s2 = inv[1, 0] * z.real + inv[1, 1] * z.imag
    return z - np.round(s1) * w - np.round(s2) * w2


def wp_qseries(z, lat: Lattice, nmax: int = 60):
    """Weierstrass wp from the Fourier (q-) expansion in the reduced basis.

    Independent of :func:`wp`; used for half-period values and checks.
    """
    z = _reduce(np.asarray(z, dtype=complex), lat)
    w = lat.omega
    q = lat.nome
    n = np.arange(1, nmax + 1)
    qn = q ** n
    e2 = 1 - 24 * np.sum(n * qn / (1 - qn))
    arg = np.pi * z / w
    # q^n cos(2 n arg) combined in the exponent: separately, q^n underflows
    # while cos overflows for elongated lattices
    logq = 2j * np.pi * lat.tau
    ex = np.multiply.outer(2j * arg, n)
    cos_terms = (0.5 * (np.exp(logq * n + ex) + np.exp(logq * n - ex))) @ (n / (1 - qn))
    # 1/sin^2 = -4E/(1-E)^2 with E = exp(+-2i arg) taken of modulus <= 1
    E = np.exp(2j * np.where(arg.imag >= 0, arg, -arg))
    return (np.pi / w) ** 2 * (-e2 / 3 - 4 * E / (1 - E) ** 2 - 8 * cos_terms)


def wp(z, lat: Lattice, tol: Tolerances = DEFAULT):
    """Weierstrass wp: reduce to the centred cell, halve the argument until
    it is within a quarter of the shortest period, sum the Laurent series and
    apply the duplication formula back.

    For elongated lattices (``Im tau > 3``) the many duplications amplify
    rounding errors, while the q-series converges almost at once; it is
    used there instead.

    Raises
    ------
    PoleAtLatticePoint
    """
    scalar = np.ndim(z) == 0
    z = _reduce(np.atleast_1d(np.asarray(z, dtype=complex)), lat)
    rho = abs(lat.omega)
    mod = np.abs(z)
    if np.any(mod <= 1e-12 * rho):
        raise errors.PoleAtLatticePoint("argument is on the lattice")
    if lat.tau.imag > 3:
        val = wp_qseries(z, lat)
        return complex(val[0]) if scalar else val
    ndup = np.maximum(0, np.ceil(np.log2(mod / (0.25 * rho)))).astype(int)
    zs = z / 2.0 ** ndup
    c = lat.laurent
    z2 = zs * zs
    acc = np.zeros_like(zs)
    for k in range(len(c) - 1, 1, -1):
        acc = acc * z2 + c[k]
    val = 1 / z2 + acc * z2
    g2, g3 = lat.g2, lat.g3
    for step in range(int(ndup.max(initial=0))):
        act = ndup > step
        v = val[act]
        d2 = 6 * v * v - g2 / 2
        d1sq = 4 * v ** 3 - g2 * v - g3
        val[act] = -2 * v + d2 * d2 / (4 * d1sq)
    return complex(val[0]) if scalar else val


def wp_prime_sq(v, lat: Lattice):
    """``wp'^2 = 4 wp^3 - g2 wp - g3`` at a value ``v`` of wp."""
    return 4 * v ** 3 - lat.g2 * v - lat.g3


# ----------------------------------------------------------------------------
# Carlson R_F and the inverse of wp
# ----------------------------------------------------------------------------


def carlson_rf(x, y, z, max_iter: int = 100):
    """Carlson's symmetric integral ``R_F(x, y, z)`` for complex arguments.

    Duplication until the arguments agree to ``(3 eps)^(1/8)``, then the
    seventh-order Taylor correction; principal square roots throughout.

    Raises
    ------
    NoConvergence
    """
    scalar = all(np.ndim(v) == 0 for v in (x, y, z))
    x, y, z = (np.atleast_1d(np.asarray(v, dtype=complex)) for v in (x, y, z))
    x, y, z = np.broadcast_arrays(x, y, z)
    x0, y0 = x, y
    x, y, z = x.copy(), y.copy(), z.copy()
    a0 = (x + y + z) / 3
    q = (3 * np.finfo(float).eps) ** (-1 / 8) * np.maximum.reduce(
        [np.abs(a0 - x), np.abs(a0 - y), np.abs(a0 - z)])
    a = a0.copy()
    f = np.ones(x.shape)
    for _ in range(max_iter):
        done = q / f < np.abs(a)
        if np.all(done):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        upd = ~done
        x = np.where(upd, (x + lam) / 4, x)
        y = np.where(upd, (y + lam) / 4, y)
        z = np.where(upd, (z + lam) / 4, z)
        a = np.where(upd, (a + lam) / 4, a)
        f = np.where(upd, f * 4, f)
    else:
        raise errors.NoConvergence("Carlson R_F duplication did not converge")
    X = (a0 - x0) / (a * f)
    Y = (a0 - y0) / (a * f)
    Z = -(X + Y)
    e2 = X * Y - Z * Z
    e3 = X * Y * Z
    out = (1 + e3 * (1 / 14 + 3 * e3 / 104)
           + e2 * (-1 / 10 + e2 / 24 - 3 * e3 / 44 - 5 * e2 * e2 / 208 + e2 * e3 / 16)) / np.sqrt(a)
    return complex(out[0]) if scalar else out


def canonical_half_cell(z, lat: Lattice):
    """Representative of ``+-z`` modulo the lattice with ``s_a in [0, 1)`` and
    ``s_b in [0, 1/2]`` (coordinates along ``g_a``, ``g_b``)."""
    z = np.asarray(z, dtype=complex)
    sa, sb = lat.coords(z)
    sa = np.mod(sa, 1.0)
    sb = np.mod(sb, 1.0)
    flip = sb > 0.5
    sa = np.where(flip, np.mod(-sa, 1.0), sa)
    sb = np.where(flip, 1.0 - sb, sb)
    return sa * lat.g_a + sb * lat.g_b


def wp_inverse(v, lat: Lattice, tol: Tolerances = DEFAULT, check: bool = True):
    """A solution ``z`` of ``wp(z) = v`` in the canonical half cell.

    ``R_F(v - e1, v - e2, v - e3)`` inverts wp on the plane cut along
    ``(-inf, e1]`` and by continuity on both rims of the cut.

    Raises
    ------
    RoundTripFailure
        If ``wp(z)`` does not reproduce ``v``.
    """
    scalar = np.ndim(v) == 0
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    e1, e2, e3 = lat.e
    z = carlson_rf(v - e1, v - e2, v - e3)
    z = canonical_half_cell(z, lat)
    if check:
        back = wp(np.where(np.abs(z) > 0, z, lat.g_b / 2), lat)
        err = np.abs(back - v)
        bad = err > tol.round_trip * np.maximum(1.0, np.abs(v))
        if np.any(bad):
            i = int(np.argmax(bad))
            raise errors.RoundTripFailure(f"wp(wp_inverse({v[i]})) = {back[i]}")
    return complex(z[0]) if scalar else z
