"""Walks with diagonal steps: the families across the segment, the
exponential change of measure, and the critical point.
"""
import numpy as np

from qharmonic import errors, gluing, harmonic, model, verify
from qharmonic.kernel import Kernel

np.set_printoptions(precision=5, suppress=True, linewidth=100)

walks = {
    "all eight steps": model.from_dict({(k, l): 1 / 8 for k in (-1, 0, 1) for l in (-1, 0, 1)
                                        if (k, l) != (0, 0)}),
    "drifting walk": model.from_dict({(1, 1): .3, (1, 0): .1, (0, 1): .15, (-1, 0): .1,
                                      (0, -1): .15, (-1, -1): .1, (1, -1): .05, (-1, 1): .05}),
}

for name, s in walks.items():
    crit = model.solve_t0(s)
    print(f"{name}: drift {np.round(model.drift(s), 4)}, t0 = {crit.t0:.8f}")
    for t in (crit.t0, 1.1 * crit.t0):
        k = Kernel(s, t)
        gf = gluing.build(k)
        for lam in (0.0, 0.5, 1.0):
            rep_grid = harmonic.coeffs_grid(harmonic.build_family(k, lam=lam, gf=gf), 12)
            res = verify.harmonicity_residual(rep_grid, s, t)
            print(f"  t = {t:.5f} lambda = {lam}: f(2,2)/f(1,1) = {rep_grid.normalized()[2, 2]:.6f}, "
                  f"residual {res:.1e}")

# Tilting by a point on the level set turns t-harmonic into 1-harmonic.
s = walks["drifting walk"]
t = 1.2
a = model.level_point(s, t, (1.0, 1.0))
tilted = model.tilt(s, a, t)
grid = harmonic.coeffs_grid(harmonic.build_family(Kernel(s, t), lam=0.5), 10)
print("\ntilt a =", np.round(a, 6), " tilted drift:", np.round(model.drift(tilted), 6))
print("1-harmonicity of the transferred grid:",
      verify.harmonicity_residual(model.transfer_harmonic(grid, a), tilted, 1.0))

# The full report bundles every check.
rep = verify.full_report(s, t, lam=0.5, N=12)
for c in rep.checks:
    print(f"  {c.name:12s} {'ok  ' if c.passed else 'FAIL'} {c.value}")

# The zero-drift walk on the four diagonals never leaves its parity class,
# so at t0 = 1 uniqueness fails and the construction refuses.
diag = model.from_dict({(1, 1): .25, (1, -1): .25, (-1, 1): .25, (-1, -1): .25})
i, j = np.meshgrid(np.arange(10), np.arange(10), indexing="ij")
for c in (0.0, 0.5):
    f = i * j * (1 + c * (-1.0) ** (i + j))
    print(f"\ndiagonal walk, f = ij(1 + {c}(-1)^(i+j)): residual {verify.harmonicity_residual(f, diag, 1.0)}")
try:
    gluing.build(Kernel(diag, 1.0))
except errors.DegenerateCurve as e:
    print("build at t0:", e)
