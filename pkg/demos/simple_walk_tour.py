"""A tour of the pipeline on walks with axis steps only.

For these walks the minimal harmonic functions are known in closed form,
so every number printed below can be checked by hand.
"""
import numpy as np

from qharmonic import gluing, harmonic, model, verify
from qharmonic.kernel import Kernel, segment_S

np.set_printoptions(precision=6, suppress=True, linewidth=100)

# The symmetric walk: each neighbour with probability 1/4.
s = model.simple_walk()
crit = model.solve_t0(s)
print("t0 =", crit.t0, " a* =", crit.a_star)
for t in (0.9, 1.0, 1.25):
    print(f"t = {t}: regime {model.classify(s, t).value}")

# Above t0 the minimal functions form a segment parametrised by p.
k = Kernel(s, 1.25)
print("branch points x:", np.array(k.branch.x))
print("segment [x2, X(y2)] =", segment_S(k))

# Build the function at p = 1/2 and compare with (2^i - 2^-i)(2^j - 2^-j).
fam = harmonic.build_family(k, p=0.5)
grid = harmonic.coeffs_grid(fam, 6)
print("f(i, j) / f(1, 1):")
print(grid.normalized()[1:, 1:])
print("closed form:")
print(harmonic.closed_form_grid(s, 1.25, 0.5, 6).values[1:, 1:])

# Growth along the x-axis is exponential with rate 1/p.
est, err = verify.growth_check(harmonic.coeffs_x(fam, 30), fam.p)
print(f"growth of f(i, 1): {est:.6f} (1/p = {1 / fam.p})")

# The two ends of the segment carry a polynomial factor on one axis.
for lam in (0.0, 1.0):
    f = harmonic.build_family(k, lam=lam, gf=fam.gf)
    g = harmonic.coeffs_grid(f, 8)
    cf = harmonic.closed_form_grid(s, 1.25, f.p, 8)
    print(f"lambda = {lam}: p = {f.p:.6f}, max deviation from closed form "
          f"{np.max(np.abs(g.normalized() - cf.values)):.1e}")

# A biased walk: t0 < 1 and the grid still matches its closed form.
s = model.simple_walk(0.5, 0.125, 0.25, 0.125)
t0 = model.solve_t0(s).t0
print(f"\nbiased walk: t0 = {t0:.10f} (closed form {model.separable_closed_form_t0(s):.10f})")
k = Kernel(s, 1.2 * t0)
fam = harmonic.build_family(k, lam=0.4)
g = harmonic.coeffs_grid(fam, 10)
cf = harmonic.closed_form_grid(s, 1.2 * t0, fam.p, 10)
print("relative deviation from closed form:",
      np.max(np.abs(g.normalized()[1:, 1:] / cf.values[1:, 1:] - 1)))
print("harmonicity residual:", verify.harmonicity_residual(g, s, 1.2 * t0))

# At t = t0 = 1 the family collapses to the classical i j.
k = Kernel(model.simple_walk(), 1.0)
g = harmonic.coeffs_grid(harmonic.critical_family(gluing.build(k), k), 5)
print("\ncritical grid (expect i j):")
print(g.normalized()[1:, 1:])
