"""The C^3 regularization of beta rho^sigma below rho = eps^2."""

import numpy as np

from semismooth_nlse import SemiSmoothNonlinearity
from semismooth_nlse.selftest import rho_samples

beta = -1.0
print(f"{'sigma':>6} {'eps':>7} {'max|f-f_eps|':>13} {'bound':>10} {'junction jumps (k=0..3)':>30}")
for sigma in (0.1, 0.25, 0.4):
    for eps in (1e-1, 1e-2, 1e-3):
        nl = SemiSmoothNonlinearity(beta, sigma)
        reg = nl.regularize(eps)
        rho = rho_samples(eps)
        gap = np.max(np.abs(nl.f(rho) - reg.f(rho)))
        bound = reg.approximation_constant() * eps ** (2 * sigma)
        jumps = [abs(reg.lower_branch(eps**2, k) / reg.upper_branch(eps**2, k) - 1) for k in range(4)]
        print(f"{sigma:>6} {eps:>7.0e} {gap:>13.3e} {bound:>10.3e}   " + " ".join(f"{j:.0e}" for j in jumps))

# Below the junction f_eps is rho times a cubic; above it is f itself.
reg = SemiSmoothNonlinearity(beta, 0.25).regularize(0.1)
for r in (0.0, 1e-4, 5e-3, 1e-2, 2e-2):
    print(f"rho={r:<7g} f={reg.base.f(r):+.6f}  f_eps={reg.f(r):+.6f}  f_eps'={reg.derivative(r, 1):+.4f}")
