import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from qharmonic import errors, model
from qharmonic.kernel import (Kernel, X_branches, Y_branches, circle_bound_check, conjugate_point,
                              curve_L, curve_M, eval_L, segment_S)

from conftest import walk


@pytest.fixture
def k125(sym):
    return Kernel(sym, 1.25)


def test_kernel_rejects_nonpositive_t(sym):
    with pytest.raises(errors.DomainError):
        Kernel(sym, 0.0)


def test_eval_L_examples(k125):
    assert eval_L(k125, 0.5, 0.5) == pytest.approx(0, abs=1e-15)
    assert eval_L(k125, 1.0, 1.0) == pytest.approx(-0.25, abs=1e-15)


def test_L_matches_definition():
    # L(x, y) = xy (sum p x^-k y^-l - t); the inverse powers are the convention
    s = walk("drift")
    k = Kernel(s, 1.1)
    rng = np.random.default_rng(1)
    for x, y in rng.normal(size=(10, 2)) + 1j * rng.normal(size=(10, 2)):
        ref = x * y * (sum(s.p(a, b) * x ** -a * y ** -b for a in (-1, 0, 1) for b in (-1, 0, 1)) - 1.1)
        assert eval_L(k, x, y) == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_coefficient_polynomials(k125):
    x = 0.37
    assert k125.beta(x) == pytest.approx(x * x / 4 - 1.25 * x + 0.25, abs=1e-15)
    d = P.polyval(x, k125.delta)
    assert d == pytest.approx((x * x / 4 - 1.25 * x + 0.25) ** 2 - x * x / 4, abs=1e-15)


def test_branch_points_symmetric(k125, sym):
    bp = k125.branch
    assert np.allclose(bp.x, (0.1458980, 0.3819660, 2.6180340, 6.8541020), atol=1e-7)
    assert bp.x[0] * bp.x[3] == pytest.approx(1, abs=1e-10)
    assert bp.x[1] * bp.x[2] == pytest.approx(1, abs=1e-10)
    assert np.allclose(bp.x, bp.y, atol=1e-12)
    b1 = Kernel(sym, 1.0).branch
    assert b1.x[1] == b1.x[2] == pytest.approx(1, abs=1e-12)
    assert b1.x[0] == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-12)
    assert b1.x[3] == pytest.approx(3 + 2 * math.sqrt(2), abs=1e-12)


def test_branch_points_degree_three():
    # p_{-1,0}^2 = 4 p_{-1,-1} p_{-1,1} kills the leading coefficient of delta
    k = Kernel(walk("deg3"), 1.2)
    bp = k.branch
    assert bp.x_inf and not bp.y_inf
    assert 0 < bp.x[0] < bp.x[1] < bp.x[2]
    assert abs(k.delta[4]) <= 1e-15
    assert all(abs(P.polyval(x, k.delta)) <= 1e-12 for x in bp.x[:3])


def test_branch_points_collapse_near_t0():
    for name in ("sym", "sep", "all8", "deg3", "drift"):
        s = walk(name)
        t0 = model.solve_t0(s).t0
        bp = Kernel(s, t0 + 1e-8).branch
        assert abs(bp.x[1] - bp.x[2]) <= 1e-3
        assert abs(bp.y[1] - bp.y[2]) <= 1e-3


def test_y_branches(k125):
    y0, y1 = Y_branches(k125, 0.5)
    assert y0 == pytest.approx(0.5, abs=1e-14) and y1 == pytest.approx(2, abs=1e-14)
    x2 = k125.branch.x[1]
    y0, y1 = Y_branches(k125, x2)
    assert abs(y0 - y1) <= 1e-6
    assert y0.real == pytest.approx(k125.Y_double(x2), abs=1e-6)


def test_vieta_at_random_points():
    k = Kernel(walk("drift"), 1.05)
    rng = np.random.default_rng(2)
    xs = rng.normal(size=20) + 1j * rng.normal(size=20)
    y0, y1 = Y_branches(k, xs)
    assert np.allclose(np.abs(y0 * y1), np.abs(k.gamma(xs) / k.alpha(xs)), rtol=1e-12)
    assert np.all(np.abs(y0) <= np.abs(y1))


def test_degenerate_leading_coefficient():
    s = model.from_dict({(1, 0): .3, (-1, 0): .2, (0, 1): .2, (0, -1): .2, (1, 1): .1})
    k = Kernel(s, 1.1)
    # alpha(x) = p_{1,-1} x^2 + p_{0,-1} x + p_{-1,-1} vanishes at x = 0 here
    y0, y1 = Y_branches(k, 0.0)
    assert math.isinf(abs(y1))
    assert y0 == pytest.approx(-k.gamma(0.0) / k.beta(0.0))


def test_x_branches(sym):
    k = Kernel(sym, 1.25)
    for v in (0.3, 0.7 + 0.2j):
        assert np.allclose(X_branches(k, v), Y_branches(k, v))
    s = walk("sep")
    x0, _ = X_branches(Kernel(s, 1.0), 0.0)
    assert x0 == 0
    s = walk("drift")
    k = Kernel(s, 1.1)
    roots = np.roots([s.p(-1, 1), s.p(0, 1), s.p(1, 1)])
    assert X_branches(k, 0.0)[0] == pytest.approx(roots[np.argmin(np.abs(roots))])


def test_curve_M(k125):
    cs = curve_M(k125, 64)
    assert abs(cs.first[-1].imag) <= 1e-10 and cs.first[-1].real == pytest.approx(1, abs=1e-12)
    assert np.all(np.abs(cs.first) <= np.abs(cs.second) + 1e-12)
    assert np.allclose(cs.first[1:-1], np.conj(cs.second[1:-1]))
    with pytest.raises(ValueError):
        curve_M(k125, 4)


def test_curve_L_mirrors_M_for_symmetric_walk(k125):
    a, b = curve_M(k125, 20), curve_L(k125, 20)
    assert np.allclose(a.first, b.first) and np.allclose(a.params, b.params)
    assert len(list(a.rows())) == 20


def test_segment(k125, sym):
    lo, hi = segment_S(k125)
    assert (lo, hi) == pytest.approx((0.3819660, 1.0), abs=1e-7)
    assert segment_S(Kernel(sym, 1.0)) == pytest.approx((1, 1), abs=1e-12)
    for name in ("sep", "drift"):
        k = Kernel(walk(name), 1.1)
        lo, hi = segment_S(k)
        assert abs(P.polyval(lo, k.delta)) <= 1e-12
        assert Y_branches(k, hi)[0] == pytest.approx(k.branch.y[1], abs=1e-9)


def test_conjugate_point(k125):
    assert conjugate_point(k125, 0.5) == pytest.approx(0.5, abs=1e-14)
    lo, hi = segment_S(k125)
    assert conjugate_point(k125, lo) == pytest.approx(k125.Y_double(lo))
    for p in np.linspace(lo, hi, 7):
        assert abs(eval_L(k125, p, conjugate_point(k125, p))) <= 1e-12
    with pytest.raises(errors.OutOfSegment):
        conjugate_point(k125, 1.5)


def test_circle_bound(k125):
    assert circle_bound_check(k125, 0.5, 64) <= 1 + 1e-9
    ref = conjugate_point(k125, 0.5)
    assert abs(Y_branches(k125, 0.5)[0]) / ref == pytest.approx(1)
    assert abs(Y_branches(k125, -0.5)[0]) / ref < 1 - 1e-3
    k = Kernel(walk("drift"), 1.2)
    lo, hi = segment_S(k)
    assert circle_bound_check(k, 0.5 * (lo + hi), 128) <= 1 + 1e-9
