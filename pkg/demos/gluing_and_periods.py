"""How the conformal gluing function is assembled and checked.

The curve M is the image of the real cut [y1, y2] under the two branches
X0, X1; the gluing function w takes equal values on the two branches.
"""
import math

import numpy as np

from qharmonic import elliptic, gluing, model
from qharmonic.kernel import Kernel, curve_M

walk = model.from_dict({(1, 1): .3, (1, 0): .1, (0, 1): .15, (-1, 0): .1, (0, -1): .15,
                        (-1, -1): .1, (1, -1): .05, (-1, 1): .05})
t0 = model.solve_t0(walk).t0
k = Kernel(walk, t0 + 0.1)
bp = k.branch
print("x branch points:", np.round(bp.x, 6))
print("y branch points:", np.round(bp.y, 6))

# Periods: integrals of dx / sqrt(delta) between consecutive roots.
gf = gluing.build(k)
pt = gf.periods
print(f"omega1 = {pt.omega1:.12f}\nomega2 = {pt.omega2:.12f}\nomega3 = {pt.omega3:.12f}")
lat = gf.lat12
print("invariants g2, g3:", lat.g2.real, lat.g3.real, " rectangular:", lat.is_rectangular)

# wp on that lattice, and its inverse through Carlson's R_F.
z = 0.3 * lat.g_a + 0.2 * lat.g_b
v = elliptic.wp(z, lat)
back = elliptic.wp_inverse(v, lat)
print("wp(z) =", v, " wp(wp_inverse(wp(z))) - wp(z) =", abs(elliptic.wp(back, lat) - v))

# w on the two branches of M.
cs = curve_M(k, 9)
print("\n   y        w(X0(y))              w(X1(y))")
for y, a, b in zip(cs.params[1:-1], gf(cs.first[1:-1]), gf(cs.second[1:-1])):
    print(f"{y:.4f}  {a.real:+.10f}{a.imag:+.2e}j  {b.real:+.10f}{b.imag:+.2e}j")
print("gluing residual:", gluing.gluing_residual(gf))
print("with omega2 off by 1%:", gluing.gluing_residual(gluing.perturbed(gf)))

# At t0 the periods degenerate and a trigonometric formula takes over.
kc = Kernel(walk, t0)
gc = gluing.build(kc)
print(f"\nat t0: theta = {gc.theta:.6f}, residual {gluing.gluing_residual(gc):.1e}")
for d in (1e-3, 1e-5, 1e-7):
    p = gluing.build(Kernel(walk, t0 + d)).periods
    print(f"  t0 + {d:g}: pi omega3 / omega2 = {math.pi * p.omega3 / p.omega2:.6f}")
