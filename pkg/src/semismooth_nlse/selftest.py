"""Certification suite run by ``semismooth-nlse selftest``.

Hard checks (pass/fail) cover the transforms, conservation, the
regularization bounds with explicit constants and the discrete norm
equivalence.  Inequalities whose constants are not explicit are reported
as observed sup ratios only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .experiments import InitialData, StudyConfig, energy_drift_study
from .grid import (
    Grid1D,
    NodalField,
    SpectralField,
    direct_analyze,
    direct_synthesize,
    dst_analyze,
    dst_synthesize,
)
from .nonlinearity import RegularizedNonlinearity, SemiSmoothNonlinearity
from .observables import embedding_ratio, gagliardo_nirenberg_ratio, norm_equivalence_check

__all__ = [
    "Check",
    "rho_samples",
    "check_transforms",
    "check_conservation",
    "check_regularization",
    "check_regularization_derivatives",
    "check_G_bound",
    "check_norm_equivalence",
    "regularization_diagnostics",
    "inequality_diagnostics",
    "run_selftest",
    "SIGMAS",
    "EPSILONS",
]

SIGMAS = (0.1, 0.25, 0.4)
EPSILONS = (1e-1, 1e-2, 1e-3)
FAULTS = ("q_coeff",)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _rng(seed):
    return np.random.default_rng(seed)


def _random_nodal(grid: Grid1D, rng) -> NodalField:
    return NodalField.from_interior(grid, rng.standard_normal(grid.N - 1) + 1j * rng.standard_normal(grid.N - 1))


def _random_spectral(grid: Grid1D, rng) -> SpectralField:
    decay = rng.choice([0.0, 1.0, 2.0, 3.0])
    c = rng.standard_normal(grid.N - 1) + 1j * rng.standard_normal(grid.N - 1)
    return SpectralField(grid, c / grid.modes.astype(float) ** decay)


def _rel(a, b) -> float:
    scale = max(np.max(np.abs(b)), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b)) / scale)


def rho_samples(eps: float) -> np.ndarray:
    """Log-spaced densities on [1e-16, 1e2] plus ``eps^2 (1 +- 2^-k)``."""
    k = np.arange(1, 21)
    near = eps * eps * np.concatenate([1 - 2.0**-k, 1 + 2.0**-k, [1.0]])
    return np.unique(np.concatenate([np.logspace(-16, 2, 400), near, [0.0]]))


def check_transforms(n_fields: int = 200, sizes=(8, 16, 32), seed: int = 1) -> Check:
    rng = _rng(seed)
    worst_a = worst_s = worst_rt = 0.0
    for i in range(n_fields):
        grid = Grid1D(0.0, 1.0, sizes[i % len(sizes)])
        v = _random_nodal(grid, rng)
        c = dst_analyze(v)
        worst_a = max(worst_a, _rel(c.coefficients, direct_analyze(v).coefficients))
        worst_s = max(worst_s, _rel(dst_synthesize(c).values, direct_synthesize(c).values))
        worst_rt = max(worst_rt, _rel(dst_synthesize(c).values, v.values))
    ok = max(worst_a, worst_s, worst_rt) <= 1e-12
    return Check("transforms vs direct sums", ok,
                 f"{n_fields} fields; analyze {worst_a:.1e}, synthesize {worst_s:.1e}, round trip {worst_rt:.1e} (tol 1e-12)")


def check_conservation(N: int = 512, taus=(0.05, 0.01, 0.002), T: float = 8.0) -> Check:
    cfg = StudyConfig(sigma=0.1, beta=-10.0, domain=(-16.0, 16.0))
    res = energy_drift_study(cfg, InitialData(), taus, T, N=N, sample_every=0.05)
    drift = max(res.mass_drift.values())
    spread = res.spread()
    ok = drift <= 1e-10 and spread <= 2.0
    sups = ", ".join(f"tau={t:g}: {res.sup(t):.3e}" for t in res.taus)
    return Check("mass and energy drift", ok,
                 f"max mass drift {drift:.1e} (tol 1e-10); sup |dE|/(|E0| tau) {sups}; spread {spread:.2f} (tol 2)")


def _regularized(beta, sigma, eps, fault):
    rnl = RegularizedNonlinearity(SemiSmoothNonlinearity(beta, sigma), eps)
    if fault == "q_coeff":
        q = list(rnl.q_coeffs)
        q[2] *= 1.001
        rnl = replace(rnl, q_coeffs=tuple(q))
    return rnl


def check_regularization(beta: float = -1.0, sigmas=SIGMAS, epsilons=EPSILONS, fault=None) -> list[Check]:
    exact = approx = growth = junction = True
    worst_approx = worst_growth = worst_junction = 0.0
    for sigma in sigmas:
        for eps in epsilons:
            rnl = _regularized(beta, sigma, eps, fault)
            base = rnl.base
            rho = rho_samples(eps)
            f, fe = base.f(rho), rnl.f(rho)
            above = rho >= rnl.junction
            exact &= bool(np.all(f[above] == fe[above]))
            bound = rnl.approximation_constant() * eps ** (2 * sigma)
            r_a = np.max(np.abs(f - fe)[~above]) / bound
            worst_approx = max(worst_approx, r_a)
            approx &= bool(r_a <= 1.0)
            pos = rho > 0
            r_g = np.max(np.abs(fe[pos]) / (rnl.growth_constant() * rho[pos] ** sigma))
            worst_growth = max(worst_growth, r_g)
            growth &= bool(r_g <= 1.0) and fe[~pos].tolist() == [0.0]
            for k in range(4):
                lo = rnl.lower_branch(rnl.junction, k)
                hi = rnl.upper_branch(rnl.junction, k)
                r_j = abs(lo - hi) / abs(hi)
                if r_j > worst_junction:
                    worst_junction, where = r_j, f"derivative {k}, sigma={sigma}, eps={eps:g}"
                junction &= bool(r_j <= 1e-8)
    tag = f"beta={beta:g}"
    grid = f"sigma in {list(sigmas)}, eps in {list(epsilons)}"
    return [
        Check(f"f_eps equals f above eps^2 ({tag})", exact, grid),
        Check(f"approximation bound |f - f_eps| <= |beta|(1+S) eps^(2 sigma) ({tag})", approx,
              f"max ratio {worst_approx:.3f}"),
        Check(f"growth bound |f_eps| <= |beta| max(1,S) rho^sigma ({tag})", growth,
              f"max ratio {worst_growth:.3f}"),
        Check(f"C3 junction at rho = eps^2 ({tag})", junction,
              f"max relative jump {worst_junction:.1e} at {where} (tol 1e-8)"),
    ]


def check_regularization_derivatives(beta: float = -1.0, sigmas=SIGMAS, epsilons=EPSILONS) -> Check:
    worst = 0.0
    for sigma in sigmas:
        for eps in epsilons:
            rnl = RegularizedNonlinearity(SemiSmoothNonlinearity(beta, sigma), eps)
            pts = rnl.junction * np.array([0.1, 0.3, 0.5, 0.7, 2.0, 5.0, 10.0, 100.0])
            for k in (1, 2, 3):
                d = 1e-5 * pts
                prev = rnl.f if k == 1 else (lambda r, k=k: rnl.derivative(r, k - 1))
                fd = (prev(pts + d) - prev(pts - d)) / (2 * d)
                exact = rnl.derivative(pts, k)
                worst = max(worst, float(np.max(np.abs(fd - exact) / np.abs(exact))))
    return Check("f_eps derivatives vs central differences", worst <= 1e-5, f"max relative error {worst:.1e} (tol 1e-5)")


def check_G_bound(n: int = 2000, seed: int = 3) -> Check:
    rng = _rng(seed)
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * 10.0 ** rng.uniform(-8, 2, n)
    z = np.concatenate([z, [0.0]])
    worst = 0.0
    for beta in (-10.0, -1.0, 1.0):
        for sigma in (0.1, 0.25, 0.5, 0.75, 1.0, 1.5):
            nl = SemiSmoothNonlinearity(beta, sigma)
            g = np.abs(nl.G(z))
            bound = abs(beta) * sigma * np.abs(z) ** (2 * sigma)
            worst = max(worst, float(np.max(g[:-1] / bound[:-1])))
            if g[-1] != 0:
                return Check("|G(z)| <= |beta| sigma |z|^(2 sigma)", False, "G(0) != 0")
    return Check("|G(z)| <= |beta| sigma |z|^(2 sigma)", worst <= 1 + 1e-12, f"max ratio {worst:.15f}")


def check_norm_equivalence(n_fields: int = 1000, sizes=(8, 16, 32, 64), seed: int = 2) -> Check:
    rng = _rng(seed)
    passed = 0
    lo_ratio, hi_ratio = np.inf, 0.0
    for i in range(n_fields):
        grid = Grid1D(-1.0, 1.0, sizes[i % len(sizes)])
        lhs, mid, rhs, ok = norm_equivalence_check(_random_spectral(grid, rng))
        passed += ok
        lo_ratio, hi_ratio = min(lo_ratio, mid / lhs), max(hi_ratio, mid / lhs)
    return Check("|d+ phi| <= |(I_N phi)'| <= (pi/2)|d+ phi|", passed == n_fields,
                 f"{passed}/{n_fields} pass; observed ratio range [{lo_ratio:.4f}, {hi_ratio:.4f}]")


def regularization_diagnostics(beta: float = -1.0, sigmas=SIGMAS, epsilons=EPSILONS) -> list[tuple]:
    """Sup ratios for bounds whose constants are not explicit.

    Columns per ``(sigma, eps)``:

    * growth: ``sup |rho f_eps'| / rho^sigma``
    * mixed: ``sup (|rho^(1/2) f_eps'| + |rho^(3/2) f_eps''|)`` divided by
      ``eps^(2 sigma - 1)`` (or by ``rho^(sigma - 1/2)`` when ``sigma > 1/2``)
    * eps-scaled: ``sup (|f_eps'| + |rho f_eps''| + |rho^2 f_eps'''|) eps^(2 - 2 sigma)``
    """
    rows = []
    for sigma in sigmas:
        for eps in epsilons:
            rnl = RegularizedNonlinearity(SemiSmoothNonlinearity(beta, sigma), eps)
            rho = rho_samples(eps)
            rho = rho[rho > 0]
            d1, d2, d3 = (rnl.derivative(rho, k) for k in (1, 2, 3))
            c1 = np.max(np.abs(rho * d1) / rho**sigma)
            lhs2 = np.abs(np.sqrt(rho) * d1) + np.abs(rho**1.5 * d2)
            rhs2 = eps ** (2 * sigma - 1) if sigma <= 0.5 else rho ** (sigma - 0.5)
            c2 = np.max(lhs2 / rhs2)
            lhs3 = np.abs(d1) + np.abs(rho * d2) + np.abs(rho**2 * d3)
            c3 = np.max(lhs3 * eps ** (2 - 2 * sigma))
            rows.append((sigma, eps, float(c1), float(c2), float(c3)))
    return rows


def inequality_diagnostics(n_fields: int = 200, sizes=(16, 32, 64, 128, 256), seed: int = 4) -> list[tuple]:
    """Max observed discrete Gagliardo-Nirenberg and W^{1,4} embedding ratios per N."""
    rng = _rng(seed)
    rows = []
    for N in sizes:
        grid = Grid1D(-1.0, 1.0, N)
        gn = emb = 0.0
        for _ in range(n_fields):
            phi = _random_spectral(grid, rng)
            gn = max(gn, gagliardo_nirenberg_ratio(dst_synthesize(phi)))
            emb = max(emb, embedding_ratio(phi))
        rows.append((N, gn, emb))
    return rows


def run_selftest(fault: str | None = None, quick: bool = False, out=print) -> bool:
    """Run every hard check, print a report and return True iff all pass."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")
    checks = [check_transforms()]
    if not quick:
        checks.append(check_conservation())
    checks += check_regularization(fault=fault)
    checks += check_regularization(beta=1.0, fault=fault)
    checks += [check_regularization_derivatives(), check_G_bound(), check_norm_equivalence()]
    for c in checks:
        out(c.line())

    out("")
    out("monitored ratios (no threshold): regularized nonlinearity, beta = -1")
    out(f"{'sigma':>6} {'eps':>8} {'growth':>10} {'mixed':>10} {'eps-scaled':>11}")
    for sigma, eps, c1, c2, c3 in regularization_diagnostics():
        out(f"{sigma:>6} {eps:>8.0e} {c1:>10.4f} {c2:>10.4f} {c3:>11.4f}")
    out("")
    out("monitored ratios (no threshold): discrete inequalities on random X_N members")
    out(f"{'N':>6} {'l4 / GN':>10} {'|d+ phi|_l4 / |phi|_H2':>24}")
    for N, gn, emb in inequality_diagnostics():
        out(f"{N:>6} {gn:>10.4f} {emb:>24.4f}")

    failed = [c.name for c in checks if not c.passed]
    out("")
    if failed:
        out("FAILED: " + "; ".join(failed))
    else:
        out(f"all {len(checks)} checks passed")
    return not failed
