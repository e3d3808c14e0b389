"""Step sets of small-step walks in the quadrant and their Laplace transform.

A step set is a 3x3 array of non-negative weights ``w[k+1, l+1]`` for the
jump ``(k, l)`` with ``k, l`` in ``{-1, 0, 1}``.  The Laplace transform

    phi(a) = sum_{k,l} p_{k,l} exp(k a_1 + l a_2)

is strictly convex; its minimum ``t0`` separates the three regimes of the
t-Martin boundary.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import errors
from .config import DEFAULT, Tolerances

STEPS = tuple((k, l) for k in (-1, 0, 1) for l in (-1, 0, 1))

# clockwise around the origin, starting at (1, 1)
CLOCKWISE = ((1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1))

_K = np.array([[-1, -1, -1], [0, 0, 0], [1, 1, 1]], dtype=float)
_L = _K.T.copy()


@dataclass(frozen=True, eq=False)
class StepSet:
    """Validated jump weights; ``weights[k + 1, l + 1]`` is ``p_{k,l}``.

    Build instances with :func:`validate`, which enforces the hypotheses.
    """

    weights: np.ndarray

    def p(self, k: int, l: int) -> float:
        return float(self.weights[k + 1, l + 1])

    def __eq__(self, other):
        if not isinstance(other, StepSet):
            return NotImplemented
        return bool(np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        nz = ", ".join(f"({k},{l}): {self.p(k, l):.6g}" for k, l in STEPS if self.p(k, l))
        return f"StepSet({{{nz}}})"

    def allclose(self, other: "StepSet", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.weights, other.weights, rtol=0, atol=atol))

    @property
    def is_simple(self) -> bool:
        """Only the four axis neighbours carry weight."""
        axis = self.p(1, 0) + self.p(-1, 0) + self.p(0, 1) + self.p(0, -1)
        return abs(axis - 1.0) <= 1e-12


class Regime(enum.Enum):
    EMPTY = "Empty"
    POINT = "Point"
    SEGMENT = "Segment"


@dataclass(frozen=True)
class CriticalData:
    t0: float
    a_star: tuple[float, float]
    iterations: int = 0


def validate(raw, tol: Tolerances = DEFAULT) -> StepSet:
    """Check raw weights ``raw[k+1][l+1]`` against the small-step hypotheses.

    Weights summing to within ``tol.renormalize`` of one are rescaled;
    anything further off is rejected so that typos are not silently absorbed.

    Raises
    ------
    NegativeWeight, CenterNonzero, SumNotOne, ThreeConsecutiveZeros
    """
    w = np.array(raw, dtype=float)
    if w.shape != (3, 3):
        raise errors.ValidationError(f"expected a 3x3 weight array, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise errors.ValidationError("weights must be finite")
    if np.any(w < 0):
        k, l = np.argwhere(w < 0)[0] - 1
        raise errors.NegativeWeight(f"p[{k},{l}] = {w[k + 1, l + 1]} is negative")
    if w[1, 1] != 0:
        raise errors.CenterNonzero(f"p[0,0] = {w[1, 1]} must be zero")
    total = w.sum()
    if abs(total - 1.0) > tol.renormalize:
        raise errors.SumNotOne(f"weights sum to {total!r}")
    w = w / total
    ring = [w[k + 1, l + 1] == 0 for k, l in CLOCKWISE]
    for i in range(8):
        if ring[i] and ring[(i + 1) % 8] and ring[(i + 2) % 8]:
            run = [CLOCKWISE[(i + j) % 8] for j in range(3)]
            raise errors.ThreeConsecutiveZeros(f"steps {run} all have zero weight")
    w.setflags(write=False)
    return StepSet(w)


def from_dict(weights: dict, tol: Tolerances = DEFAULT) -> StepSet:
    """Build a step set from ``{(k, l): p}``; missing steps are zero."""
    raw = np.zeros((3, 3))
    for (k, l), v in weights.items():
        raw[k + 1, l + 1] = v
    return validate(raw, tol)


def phi(s: StepSet, a) -> np.ndarray | float:
    """Laplace transform ``sum p_{k,l} exp(k a1 + l a2)``; ``a`` has shape (..., 2)."""
    a = np.asarray(a, dtype=float)
    a1 = a[..., 0, None, None]
    a2 = a[..., 1, None, None]
    out = np.sum(s.weights * np.exp(_K * a1 + _L * a2), axis=(-2, -1))
    return float(out) if out.ndim == 0 else out


def _grad_hess(s: StepSet, a):
    e = s.weights * np.exp(_K * a[0] + _L * a[1])
    g = np.array([np.sum(_K * e), np.sum(_L * e)])
    h = np.array([[np.sum(_K * _K * e), np.sum(_K * _L * e)],
                  [np.sum(_K * _L * e), np.sum(_L * _L * e)]])
    return g, h


def grad_phi(s: StepSet, a) -> np.ndarray:
    return _grad_hess(s, np.asarray(a, dtype=float))[0]


def drift(s: StepSet) -> tuple[float, float]:
    """Mean jump ``(sum k p_{k,l}, sum l p_{k,l})``."""
    return float(np.sum(_K * s.weights)), float(np.sum(_L * s.weights))


def solve_t0(s: StepSet, tol: Tolerances = DEFAULT, max_iter: int = 200) -> CriticalData:
    """Minimise phi by damped Newton from the origin.

    Strict convexity makes the damped iteration globally convergent; hitting
    the iteration cap means the weights are degenerate.
    """
    a = np.zeros(2)
    f = phi(s, a)
    for it in range(max_iter):
        g, h = _grad_hess(s, a)
        if np.hypot(*g) <= tol.newton_gradient:
            # one more full step squares the remaining error
            polished = a + np.linalg.solve(h, -g)
            if np.hypot(*_grad_hess(s, polished)[0]) < np.hypot(*g):
                a = polished
                f = phi(s, a)
            return CriticalData(float(f), (float(a[0]), float(a[1])), it)
        step = np.linalg.solve(h, -g)
        gn = np.hypot(*g)
        lam = 1.0
        for _ in range(60):
            trial = a + lam * step
            ft = phi(s, trial)
            if ft < f:
                break
            # phi is flat to rounding near the minimum; let the gradient decide
            if ft - f <= 8 * np.finfo(float).eps * abs(f) and np.hypot(*_grad_hess(s, trial)[0]) < gn:
                break
            lam *= 0.5
        else:
            # no decrease at machine precision; the gradient test decides
            trial, ft = a + step, phi(s, a + step)
        a, f = trial, ft
    raise errors.NoConvergence(f"Newton for t0 did not converge in {max_iter} iterations")


def classify(s: StepSet, t: float, tol: float | None = None,
             crit: CriticalData | None = None) -> Regime:
    """Regime of the t-Martin boundary: empty, a point, or a segment."""
    tol = DEFAULT.classify if tol is None else tol
    t0 = (crit or solve_t0(s)).t0
    if t < t0 - tol:
        return Regime.EMPTY
    if t > t0 + tol:
        return Regime.SEGMENT
    return Regime.POINT


def level_point(s: StepSet, t: float, d=(1.0, 0.0), tol: Tolerances = DEFAULT,
                crit: CriticalData | None = None) -> tuple[float, float]:
    """Point ``a`` on the ray ``a_star + r d`` (r >= 0) with ``phi(a) = t``.

    phi restricted to the ray is convex with its minimum at ``r = 0``, hence
    increasing, so bisection on a bracket grown by doubling always succeeds.
    """
    crit = crit or solve_t0(s, tol)
    a0 = np.array(crit.a_star)
    if t < crit.t0 - tol.classify:
        raise errors.RegimeError(f"t={t} is below t0={crit.t0}; the level set is empty")
    d = np.asarray(d, dtype=float)
    d = d / np.hypot(*d)
    if t <= crit.t0:
        return crit.a_star
    f = lambda r: phi(s, a0 + r * d) - t  # noqa: E731
    lo, hi = 0.0, 1.0
    while f(hi) < 0:
        lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    r = lo if abs(f(lo)) <= abs(f(hi)) else hi
    a = a0 + r * d
    return float(a[0]), float(a[1])


def tilt(s: StepSet, a, t: float, tol: Tolerances = DEFAULT) -> StepSet:
    """Exponentially tilted weights ``p_{k,l} exp(<a,(k,l)>) / t``.

    Requires ``phi(a) = t`` so that the result is again a probability.
    """
    a = np.asarray(a, dtype=float)
    val = phi(s, a)
    if abs(val - t) > tol.tilt_level:
        raise errors.LevelMismatch(f"phi(a) = {val!r} differs from t = {t!r}")
    w = s.weights * np.exp(_K * a[0] + _L * a[1]) / t
    return validate(w, tol)


def transfer_harmonic(grid, a, sign: int = 1):
    """Multiply grid values by ``exp(-sign <a,(i,j)>)``.

    ``sign=+1`` maps a t-harmonic function to a 1-harmonic function of the
    walk tilted by ``a``; ``sign=-1`` undoes it.  Works on any dataclass with
    a ``values`` array indexed ``[i, j]``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    vals = np.asarray(grid.values, dtype=float)
    n1, n2 = vals.shape
    i = np.arange(n1)[:, None]
    j = np.arange(n2)[None, :]
    expo = -sign * (a[0] * i + a[1] * j)
    if np.max(np.abs(expo)) > 700:
        raise errors.GridOverflow("tilt exponent exceeds the floating-point range")
    return dataclasses.replace(grid, values=vals * np.exp(expo))


def reflect_x(s: StepSet) -> StepSet:
    """Re-index ``k -> -k``."""
    return validate(s.weights[::-1, :])


def reflect_y(s: StepSet) -> StepSet:
    """Re-index ``l -> -l``."""
    return validate(s.weights[:, ::-1])


def transpose(s: StepSet) -> StepSet:
    """Swap the coordinates, ``(k, l) -> (l, k)``."""
    return validate(s.weights.T)


# a few walks that the tests, demos and CLI keep coming back to

def simple_walk(east=0.25, west=0.25, north=0.25, south=0.25) -> StepSet:
    return from_dict({(1, 0): east, (-1, 0): west, (0, 1): north, (0, -1): south})


def separable_closed_form_t0(s: StepSet) -> float:
    """t0 of a simple walk, where phi separates into two cosh terms."""
    if not s.is_simple:
        raise errors.NotSimpleWalk("closed form needs axis steps only")
    return 2 * math.sqrt(s.p(1, 0) * s.p(-1, 0)) + 2 * math.sqrt(s.p(0, 1) * s.p(0, -1))
