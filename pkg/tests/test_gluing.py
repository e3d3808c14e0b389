import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from qharmonic import errors, gluing, model
from qharmonic.gluing import (build, g_map, gluing_residual, perturbed, scaled, theta_angle,
                              w_derivs_at_0)
from qharmonic.kernel import Kernel, X_branches, curve_M

from conftest import walk

GENERIC_CASES = [("sym", 1.25), ("sep", 1.0), ("all8", 1.1), ("deg3", 1.05), ("drift", 1.0),
                 ("diag", 1.1)]
CRITICAL_CASES = ["sym", "sep", "all8", "deg3", "drift"]


def _critical(name):
    s = walk(name)
    return Kernel(s, model.solve_t0(s).t0)


@pytest.fixture(scope="module")
def gf125():
    return build(Kernel(walk("sym"), 1.25))


def _cross_ratio(a, b, c, d):
    return (a - c) * (b - d) / ((a - d) * (b - c))


def test_g_map_finite_x4(gf125):
    k = gf125.kernel
    bp = k.branch
    d2 = P.polyval(bp.x[3], P.polyder(k.delta, 2))
    assert g_map(1e8, k.delta, bp).real == pytest.approx(d2 / 6, rel=1e-6)
    assert abs(g_map(bp.x[3] + 1e-9, k.delta, bp)) > 1e6
    with pytest.raises(errors.PoleAtX4):
        g_map(bp.x[3], k.delta, bp)


def test_g_map_sends_branch_points_to_e_values(gf125):
    k, lat = gf125.kernel, gf125.lat12
    vals = g_map(np.array(k.branch.x[:3]), k.delta, k.branch)
    assert sorted(vals.real) == pytest.approx(sorted(e.real for e in lat.e), rel=1e-9)


def test_g_map_infinite_x4():
    k = Kernel(walk("deg3"), 1.1)
    assert k.branch.x_inf
    g = lambda x: g_map(x, k.delta, k.branch)  # noqa: E731
    assert g(0.0) == pytest.approx(P.polyval(0, P.polyder(k.delta, 2)) / 6)
    assert g(0.5) - g(0.0) == pytest.approx(2 * (g(0.25) - g(0.0)))


@pytest.mark.parametrize("name,t", GENERIC_CASES)
def test_generic_gluing_residual(name, t):
    gf = build(Kernel(walk(name), t))
    assert gf.mode == gluing.GENERIC
    assert gluing_residual(gf, 64) <= 1e-8


@pytest.mark.parametrize("name", CRITICAL_CASES)
def test_critical_gluing_residual(name):
    gf = build(_critical(name))
    assert gf.mode == gluing.CRITICAL
    assert gluing_residual(gf, 64) <= 1e-8


@pytest.mark.parametrize("name,t", [("sym", 1.25), ("drift", 1.1)])
def test_negative_control_perturbed_omega2(name, t):
    gf = build(Kernel(walk(name), t))
    assert gluing_residual(perturbed(gf, 1.01), 64) > 1e-3


def test_negative_control_critical():
    gf = build(_critical("drift"))
    assert gluing_residual(perturbed(gf, 1.01), 64) > 1e-3


def test_residual_stable_in_sample_count(gf125):
    a, b = gluing_residual(gf125, 8), gluing_residual(gf125, 256)
    assert max(a, b) <= 1e-8
    bad = perturbed(gf125)
    a, b = gluing_residual(bad, 8), gluing_residual(bad, 256)
    assert 0.1 <= a / b <= 10
    with pytest.raises(ValueError):
        gluing_residual(gf125, 4)


@pytest.mark.parametrize("name,t", [("sym", 1.25), ("drift", 1.05), ("drift", None)])
def test_u_real_on_segment(name, t):
    s = walk(name)
    k = Kernel(s, t if t else model.solve_t0(s).t0)
    gf = build(k)
    lo, hi = float(k.X_double(k.branch.y[0])), k.branch.x[1]
    xs = np.linspace(lo, hi, 12)[1:-1]
    xs = xs[np.abs(xs - k.branch.x[0]) > 1e-3]
    u = gf.u(xs)
    assert np.all(np.abs(u.imag) <= 1e-9 * np.abs(u))
    assert abs(gf.u(gf.x0).imag) <= 1e-9 * abs(gf.u(gf.x0))


def test_u_continuity_near_x0(gf125):
    h = 1e-4
    xs = gf125.x0 + h * np.arange(-5, 6)
    u = gf125.u(xs).real
    d = np.diff(u)
    # smooth: consecutive differences change by far less than their size
    assert np.max(np.abs(np.diff(d))) <= 1e-2 * np.max(np.abs(d))


def test_u_glues_conjugate_points(gf125):
    k = gf125.kernel
    cs = curve_M(k, 34)
    ua, ub = gf125.u(cs.first[1:-1]), gf125.u(cs.second[1:-1])
    assert np.max(np.abs(ua - ub)) <= 1e-8 * np.median(np.abs(ua))


def test_w_normalisation_and_pole(gf125):
    assert gf125(0.0) == 0
    x0 = gf125.x0
    assert abs(gf125(x0 + 1e-7)) > 1e5 * abs(gf125(0.5 * x0))
    with pytest.raises(errors.PoleAtReference):
        gf125(x0)


def test_w_real_and_monotone_on_segment():
    k = Kernel(walk("drift"), 1.05)
    gf = build(k)
    lo, hi = float(k.X_double(k.branch.y[0])), k.branch.x[1]
    for a, b in [(lo, gf.x0), (gf.x0, hi)]:
        xs = np.linspace(a, b, 40)[2:-2]
        w = gf(xs)
        assert np.all(np.abs(w.imag) <= 1e-9 * np.abs(w) + 1e-14)
        d = np.diff(w.real)
        assert np.all(d > 0) or np.all(d < 0)


def test_moebius_freedom_between_reference_points():
    k = Kernel(walk("all8"), 1.1)
    a = build(k)
    lo, hi = float(k.X_double(k.branch.y[0])), k.branch.x[1]
    b = build(k, x0=lo + 0.8 * (hi - lo))
    z = np.array([0.1 + 0.2j, -0.15 + 0.05j, 0.3 - 0.1j, 0.05 - 0.3j]) * hi
    assert _cross_ratio(*a(z)) == pytest.approx(_cross_ratio(*b(z)), rel=1e-8)
    with pytest.raises(errors.OutOfRange):
        build(k, x0=0.0)


def test_theta_symmetric_walk():
    assert theta_angle(_critical("sym")) == pytest.approx(math.pi / 2, abs=1e-14)


def test_theta_diagonal_walk_in_range():
    th = theta_angle(_critical("diag"))
    assert 0 < th < math.pi


def test_theta_transpose_invariance():
    for name in ("drift", "all8", "deg3"):
        s = walk(name)
        t0 = model.solve_t0(s).t0
        a = theta_angle(Kernel(s, t0))
        b = theta_angle(Kernel(model.transpose(s), t0))
        assert a == pytest.approx(b, abs=1e-9)


def test_theta_is_the_limit_of_the_period_ratio():
    # the trigonometric u is the degenerate form of wp on the (omega1, omega3)
    # lattice; its angle must be the limit of pi omega3 / omega2
    s = walk("drift")
    t0 = model.solve_t0(s).t0
    th = theta_angle(Kernel(s, t0))
    ratios = []
    for d in (1e-4, 1e-5, 1e-6):
        pt = build(Kernel(s, t0 + d)).periods
        ratios.append(math.pi * pt.omega3 / pt.omega2)
    assert ratios[-1] == pytest.approx(th, abs=1e-4)


def test_printed_theta_powers_fail_for_a_walk_with_mixed_steps():
    k = _critical("drift")
    good, printed = theta_angle(k), theta_angle(k, powers="printed")
    assert abs(good - printed) > 0.1
    assert gluing_residual(build(k, theta_powers="printed")) > 1e-2
    # both conventions coincide when the mixed moment vanishes
    k = _critical("sep")
    assert theta_angle(k) == pytest.approx(theta_angle(k, powers="printed"))


def test_delta_second_derivative_at_one_only_works_when_x2_is_one():
    k = _critical("sep")
    assert k.branch.x[1] == pytest.approx(2.0)
    assert gluing_residual(build(k, critical_d2="1")) > 1e-2
    assert gluing_residual(build(k, critical_d2="x2")) <= 1e-8
    k = _critical("sym")
    assert gluing_residual(build(k, critical_d2="1")) <= 1e-8


def test_g_at_double_point_matches_second_derivative():
    k = _critical("sep")
    x2 = k.branch.x[1]
    d2 = P.polyval(x2, P.polyder(k.delta, 2))
    assert g_map(x2, k.delta, k.branch).real == pytest.approx(d2 / 6, rel=1e-9)


def test_critical_is_the_limit_of_generic():
    for name in ("sym", "drift"):
        s = walk(name)
        t0 = model.solve_t0(s).t0
        gc = build(Kernel(s, t0))
        xs = np.array([-0.2, -0.1, 0.1, 0.3, 0.5]) * Kernel(s, t0).branch.x[1]
        us = [build(Kernel(s, t0 + d), x0=gc.x0).u(xs).real for d in (1e-3, 1e-4, 1e-5)]
        # linear convergence in t - t0: one Richardson step
        ext = us[2] + (us[2] - us[1]) / 9
        assert np.max(np.abs(ext - gc.u(xs).real) / np.abs(gc.u(xs).real)) <= 1e-4


def test_zero_drift_diagonal_walk_degenerates_at_t0():
    with pytest.raises(errors.DegenerateCurve):
        build(_critical("diag"))


def test_w_derivatives(gf125):
    d1, d2 = w_derivs_at_0(gf125)
    errs = [abs((gf125(h) - gf125(-h)).real / (2 * h) - d1) for h in (1e-2, 5e-3, 2.5e-3)]
    # second-order central differences: the error quarters with each halving
    assert errs[1] / errs[0] == pytest.approx(0.25, abs=0.02)
    assert errs[2] / errs[1] == pytest.approx(0.25, abs=0.02)
    e1, e2 = w_derivs_at_0(scaled(gf125, 2.0))
    assert (e1, e2) == pytest.approx((2 * d1, 2 * d2), rel=1e-8)


def test_w_derivative_nonconvergence(gf125):
    with pytest.raises(errors.DerivativeNonConvergence):
        w_derivs_at_0(gf125, levels=2)


def test_critical_simple_walk_cross_ratio():
    # at t = 1 the curve M of the symmetric walk is the unit circle, and
    # x / (1 - x)^2 takes equal values at x and 1/x = conj(x) there
    k = _critical("sym")
    cs = curve_M(k, 40)
    cand = lambda x: x / (1 - x) ** 2  # noqa: E731
    a, b = cand(cs.first[1:-1]), cand(cs.second[1:-1])
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))
    gf = build(k)
    z = np.array([-0.6, -0.25, 0.2, 0.45])
    assert _cross_ratio(*gf(z).real) == pytest.approx(_cross_ratio(*cand(z)), rel=1e-6)
    # w'(0) after aligning the Moebius maps: w = M(cand) with M(0) = 0
    d1, _ = w_derivs_at_0(gf)
    c1, c2 = cand(z[:2])
    w1, w2 = gf(z[:2]).real
    # M(c) = a c / (1 + b c) from two values
    A = np.array([[c1, -w1 * c1], [c2, -w2 * c2]])
    a_, b_ = np.linalg.solve(A, [w1, w2])
    assert d1 == pytest.approx(a_, rel=1e-6)


def test_dump_csv(tmp_path, gf125):
    path = tmp_path / "w.csv"
    gluing.dump_csv(gf125, [0.1, 0.2 + 0.1j], path)
    lines = path.read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("x_re")
