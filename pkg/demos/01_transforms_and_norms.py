"""Sine transforms, Parseval norms and the discrete H1 equivalence."""

import numpy as np

from semismooth_nlse import Grid1D, NodalField, SpectralField, dst_analyze, dst_synthesize, h1_seminorm, l2_norm
from semismooth_nlse.grid import direct_analyze
from semismooth_nlse.observables import norm_equivalence_check

grid = Grid1D(-1.0, 1.0, 32)
x = grid.nodes

# A field that vanishes at both ends, sampled at the nodes.
u = NodalField(grid, (1 - x**2) * np.exp(2j * x))
c = dst_analyze(u)
print("fast vs direct analysis:", np.max(np.abs(c.coefficients - direct_analyze(u).coefficients)))
print("round trip:", np.max(np.abs(dst_synthesize(c).values - u.values)))

# Parseval: the nodal trapezoid sum and the coefficient sum agree exactly.
print("h sum |u_j|^2     =", grid.h * np.sum(np.abs(u.values) ** 2))
print("(L/2) sum |c_l|^2 =", l2_norm(c) ** 2)
print("|u'|_L2           =", h1_seminorm(c))

# The forward-difference norm never exceeds the spectral one, and is at
# most a factor pi/2 smaller; the worst case is the top mode.
rng = np.random.default_rng(0)
ratios = []
for _ in range(500):
    w = SpectralField(grid, rng.standard_normal(grid.N - 1) + 1j * rng.standard_normal(grid.N - 1))
    lhs, mid, rhs, ok = norm_equivalence_check(w)
    assert ok
    ratios.append(mid / lhs)
top = norm_equivalence_check(SpectralField.single_mode(grid, grid.N - 1))
print(f"random fields: ratio in [{min(ratios):.4f}, {max(ratios):.4f}]; top mode {top[1] / top[0]:.4f}; "
      f"pi/2 = {np.pi / 2:.4f}")
