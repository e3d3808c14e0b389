"""The kernel ``L(x, y)`` of the functional equation and its algebraic branches.

``L(x, y) = xy (sum p_{k,l} x^-k y^-l - t)`` is quadratic in each variable:

    L = alpha(x) y^2 + beta(x) y + gamma(x) = alpha~(y) x^2 + beta~(y) x + gamma~(y).

Polynomials are stored as ascending coefficient arrays, the convention of
:mod:`numpy.polynomial.polynomial`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P

from . import errors
from .config import DEFAULT, Tolerances
from .model import StepSet


@dataclass(frozen=True)
class CoeffPolys:
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    alpha_t: np.ndarray
    beta_t: np.ndarray
    gamma_t: np.ndarray


@dataclass(frozen=True)
class BranchPoints:
    """Roots of the discriminants, ordered by modulus.

    ``x[3]`` (resp. ``y[3]``) is ``inf`` when the discriminant has degree three.
    """

    x: tuple[float, float, float, float]
    y: tuple[float, float, float, float]

    @property
    def x_inf(self) -> bool:
        return math.isinf(self.x[3])

    @property
    def y_inf(self) -> bool:
        return math.isinf(self.y[3])


@dataclass(frozen=True)
class CurveSample:
    """Points of ``M = X([y1, y2])`` (or ``L = Y([x1, x2])``).

    ``first``/``second`` hold the two branches at each parameter; on the
    interval they are complex conjugates of each other.
    """

    params: np.ndarray
    first: np.ndarray
    second: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.first, self.second])

    def rows(self):
        for s, a, b in zip(self.params, self.first, self.second):
            yield (float(s), float(a.real), float(a.imag), float(b.real), float(b.imag))


@dataclass(frozen=True)
class Kernel:
    step: StepSet
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise errors.DomainError(f"t must be positive, got {self.t}")

    @cached_property
    def polys(self) -> CoeffPolys:
        return coeff_polys(self)

    @cached_property
    def delta(self) -> np.ndarray:
        return discriminants(self.polys)[0]

    @cached_property
    def delta_t(self) -> np.ndarray:
        return discriminants(self.polys)[1]

    @cached_property
    def critical(self):
        from .model import solve_t0
        return solve_t0(self.step)

    @property
    def is_critical(self) -> bool:
        return abs(self.t - self.critical.t0) <= DEFAULT.classify

    @cached_property
    def branch(self) -> BranchPoints:
        if self.is_critical:
            a1, a2 = self.critical.a_star
            return branch_points(self, double_root=(math.exp(-a1), math.exp(-a2)))
        return branch_points(self)

    def alpha(self, x):
        return P.polyval(x, self.polys.alpha)

    def beta(self, x):
        return P.polyval(x, self.polys.beta)

    def gamma(self, x):
        return P.polyval(x, self.polys.gamma)

    def alpha_t(self, y):
        return P.polyval(y, self.polys.alpha_t)

    def beta_t(self, y):
        return P.polyval(y, self.polys.beta_t)

    def gamma_t(self, y):
        return P.polyval(y, self.polys.gamma_t)

    def X_double(self, y):
        """The coinciding value of X at a root of delta~ (a double root in x)."""
        return -self.beta_t(y) / (2 * self.alpha_t(y))

    def Y_double(self, x):
        return -self.beta(x) / (2 * self.alpha(x))


def eval_L(k: Kernel, x, y):
    """Kernel value via its polynomial form (no division by x or y)."""
    return k.alpha(x) * y * y + k.beta(x) * y + k.gamma(x)


def coeff_polys(k: Kernel) -> CoeffPolys:
    p, t = k.step.p, k.t

    def arr(*c):
        return np.array(c, dtype=float)

    return CoeffPolys(
        alpha=arr(p(1, -1), p(0, -1), p(-1, -1)),
        beta=arr(p(1, 0), -t, p(-1, 0)),
        gamma=arr(p(1, 1), p(0, 1), p(-1, 1)),
        alpha_t=arr(p(-1, 1), p(-1, 0), p(-1, -1)),
        beta_t=arr(p(0, 1), -t, p(0, -1)),
        gamma_t=arr(p(1, 1), p(1, 0), p(1, -1)),
    )


def discriminants(cp: CoeffPolys) -> tuple[np.ndarray, np.ndarray]:
    """``delta = beta^2 - 4 alpha gamma`` and its tilde counterpart (degree <= 4)."""
    d = P.polysub(P.polymul(cp.beta, cp.beta), 4 * P.polymul(cp.alpha, cp.gamma))
    dt = P.polysub(P.polymul(cp.beta_t, cp.beta_t), 4 * P.polymul(cp.alpha_t, cp.gamma_t))
    return np.pad(d, (0, 5 - len(d))), np.pad(dt, (0, 5 - len(dt)))


def discriminant_degree(coeffs: np.ndarray, tol: Tolerances = DEFAULT) -> int:
    return 3 if abs(coeffs[4]) <= tol.degree3 else 4


def _polish(coeffs, r):
    # two guarded Newton steps on the companion-matrix roots
    dc = P.polyder(coeffs)
    for _ in range(2):
        f = P.polyval(r, coeffs)
        df = P.polyval(r, dc)
        if df == 0:
            break
        nr = r - f / df
        if abs(P.polyval(nr, coeffs)) < abs(f):
            r = nr
        else:
            break
    return r


def _ordered_roots(coeffs, tol: Tolerances, name: str):
    deg = discriminant_degree(coeffs, tol)
    roots = P.polyroots(coeffs[: deg + 1]).astype(complex)
    roots = np.array([_polish(coeffs[: deg + 1], r) for r in roots])
    scale = np.maximum(1.0, np.abs(roots))
    roots = np.where(np.abs(roots.imag) <= tol.snap_imag * scale, roots.real + 0j, roots)
    # a double root at t = t0 comes out as a conjugate pair with imaginary
    # part of order sqrt(eps); merge it back onto the real axis
    cplx = [i for i, r in enumerate(roots) if r.imag != 0]
    if len(cplx) == 2:
        a, b = roots[cplx]
        bound = tol.merge_double * max(1.0, abs(a))
        if abs(a - np.conj(b)) <= bound and abs(a.imag) <= bound:
            roots[cplx] = 0.5 * (a.real + b.real)
    if np.any(roots.imag != 0):
        raise errors.OrderingViolation(
            f"{name} has non-real roots {roots}; is t below t0?")
    roots = sorted(roots.real, key=lambda r: (abs(r), r))
    # modulus ties: the inner pair keeps the negative root first (x1 <= 0 < x2),
    # the outer pair the positive one (x3 > 0 > x4)
    if len(roots) == 4 and abs(abs(roots[2]) - abs(roots[3])) <= 1e-12 * abs(roots[3]):
        roots[2], roots[3] = max(roots[2:]), min(roots[2:])
    if deg == 3:
        roots.append(math.inf)
    return tuple(float(r) for r in roots)


def _check_roots(r, poly, name, tol):
    r1, r2, r3, r4 = r
    slack = 1e-9
    if not (-1 - slack <= r1 < 1 + slack):
        raise errors.OrderingViolation(f"{name}1 = {r1} outside [-1, 1)")
    if not (r2 > 0 and r3 > 0):
        raise errors.OrderingViolation(f"{name}2, {name}3 = {r2}, {r3} must be positive")
    if not (r1 <= r2 + slack <= r3 + 2 * slack):
        raise errors.OrderingViolation(f"{name}-roots not ordered: {r}")

    def val(x):
        return P.polyval(x, poly)

    scale = np.max(np.abs(poly))
    eps = 1e-12 * scale
    samples_neg = [0.5 * (r1 + r2)]
    if math.isinf(r4):
        samples_neg.append(2 * r3 + 1)
    elif r4 > 0:
        samples_neg.append(0.5 * (r3 + r4))
    else:
        samples_neg += [2 * r3 + 1, 2 * r4 - 1]
    if any(val(x) > eps for x in samples_neg if x != r2):
        raise errors.OrderingViolation(f"{name}: discriminant not negative on ({name}1,{name}2)u({name}3,{name}4)")
    if r3 - r2 > 1e-12 and val(0.5 * (r2 + r3)) < -eps:
        raise errors.OrderingViolation(f"{name}: discriminant not positive on ({name}2,{name}3)")


def branch_points(k: Kernel, tol: Tolerances = DEFAULT, check: bool = True,
                  double_root: tuple[float, float] | None = None) -> BranchPoints:
    """Roots of delta and delta~ via companion-matrix eigenvalues.

    ``double_root = (x, y)`` replaces the two middle roots of each list by
    the exact double root, as happens at ``t = t0`` where eigenvalues only
    resolve it to about ``sqrt(eps)``.

    Raises
    ------
    OrderingViolation
        When the roots do not show the pattern that holds for ``t >= t0``.
    """
    xs = _ordered_roots(k.delta, tol, "x")
    ys = _ordered_roots(k.delta_t, tol, "y")
    if double_root is not None:
        xs = (xs[0], double_root[0], double_root[0], xs[3])
        ys = (ys[0], double_root[1], double_root[1], ys[3])
    if check:
        _check_roots(xs, k.delta, "x", tol)
        _check_roots(ys, k.delta_t, "y", tol)
    return BranchPoints(xs, ys)


def _quadratic_roots(a, b, c, tol: Tolerances):
    """Roots of ``a z^2 + b z + c`` ordered by modulus, vectorised.

    The larger root comes from the formula with no cancellation and the
    smaller one from the product ``c / a``.  When ``|a|`` is negligible the
    second root is infinite.
    """
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a, b, c)))
    sq = np.sqrt(b * b - 4 * a * c)
    sq = np.where((np.conj(b) * sq).real >= 0, sq, -sq)
    q = -0.5 * (b + sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = q / a
        small = c / q
    q0 = q == 0
    if np.any(q0):
        # b = 0 and c = 0: the double root is zero
        big = np.where(q0, 0, big)
        small = np.where(q0, 0, small)
    deg = np.abs(a) <= tol.degenerate_leading
    if np.any(deg):
        with np.errstate(divide="ignore", invalid="ignore"):
            lin = -c / b
        big = np.where(deg, np.inf, big)
        small = np.where(deg, lin, small)
    mb, ms = np.abs(big), np.abs(small)
    tie = np.abs(mb - ms) <= 1e-12 * np.maximum(mb, 1e-300)
    swap = np.where(tie, small.imag < big.imag, mb < ms)
    r0 = np.where(swap, big, small)
    r1 = np.where(swap, small, big)
    return r0, r1


def Y_branches(k: Kernel, x, tol: Tolerances = DEFAULT):
    """``(Y0(x), Y1(x))`` with ``|Y0| <= |Y1|``.

    On the cuts the two branches are conjugate; the one with non-negative
    imaginary part is returned first.
    """
    y0, y1 = _quadratic_roots(k.alpha(x), k.beta(x), k.gamma(x), tol)
    if np.ndim(x) == 0:
        return complex(y0), complex(y1)
    return y0, y1


def X_branches(k: Kernel, y, tol: Tolerances = DEFAULT):
    """``(X0(y), X1(y))`` with ``|X0| <= |X1|``; mirror of :func:`Y_branches`."""
    x0, x1 = _quadratic_roots(k.alpha_t(y), k.beta_t(y), k.gamma_t(y), tol)
    if np.ndim(y) == 0:
        return complex(x0), complex(x1)
    return x0, x1


def lobatto(a: float, b: float, n: int) -> np.ndarray:
    """Chebyshev extreme points on ``[a, b]``, endpoints included."""
    return 0.5 * (a + b) - 0.5 * (b - a) * np.cos(np.pi * np.arange(n) / (n - 1))


def curve_M(k: Kernel, n: int = 64) -> CurveSample:
    """Sample ``M = X([y1, y2])`` at Chebyshev-spaced parameters."""
    if n < 8:
        raise ValueError("need at least 8 samples")
    y1, y2 = k.branch.y[:2]
    ys = lobatto(y1, y2, n)
    x0, x1 = X_branches(k, ys)
    ends = k.X_double(np.array([y1, y2])) + 0j
    x0[[0, -1]] = ends
    x1[[0, -1]] = ends
    return CurveSample(ys, x0, x1)


def curve_L(k: Kernel, n: int = 64) -> CurveSample:
    """Sample ``L = Y([x1, x2])``."""
    if n < 8:
        raise ValueError("need at least 8 samples")
    x1, x2 = k.branch.x[:2]
    xs = lobatto(x1, x2, n)
    y0, y1 = Y_branches(k, xs)
    ends = k.Y_double(np.array([x1, x2])) + 0j
    y0[[0, -1]] = ends
    y1[[0, -1]] = ends
    return CurveSample(xs, y0, y1)


def segment_S(k: Kernel) -> tuple[float, float]:
    """Endpoints ``(x2, X(y2))`` of the segment parametrising the boundary."""
    x2 = k.branch.x[1]
    return x2, float(k.X_double(k.branch.y[1]))


def conjugate_point(k: Kernel, p: float, slack: float = 1e-9) -> float:
    """``p' = Y0(p)`` for ``p`` on the segment; it is real there."""
    lo, hi = segment_S(k)
    if not (lo - slack <= p <= hi + slack):
        raise errors.OutOfSegment(f"p = {p} is outside [{lo}, {hi}]")
    if abs(p - lo) <= slack:
        return float(k.Y_double(lo))
    y0, _ = Y_branches(k, p)
    return float(y0.real)


def circle_bound_check(k: Kernel, x: float, n: int = 64) -> float:
    """Largest ``|Y0(u)| / Y0(x)`` over ``n`` points of the circle ``|u| = x``."""
    u = x * np.exp(2j * np.pi * np.arange(n) / n)
    y0, _ = Y_branches(k, u)
    ref = conjugate_point(k, x)
    return float(np.max(np.abs(y0)) / ref)
