"""Mass is conserved to rounding; the energy error is O(tau) and stays bounded.

Writes the curves to results/energy_drift.csv.
"""

from pathlib import Path

from semismooth_nlse.experiments import InitialData, StudyConfig, energy_drift_study

cfg = StudyConfig(sigma=0.1, beta=-10.0, domain=(-16.0, 16.0))
res = energy_drift_study(cfg, InitialData(), (0.05, 0.01, 0.002), 8.0, N=512, sample_every=0.05)

for tau in res.taus:
    print(f"tau={tau:<6g} sup |E_k - E_0| / (|E_0| tau) = {res.sup(tau):.4f}   mass drift {res.mass_drift[tau]:.1e}")
print(f"largest / smallest sup = {res.spread():.2f}")

out = Path("results")
out.mkdir(exist_ok=True)
(out / "energy_drift.csv").write_text(res.to_csv({"sigma": cfg.sigma, "beta": cfg.beta, "N": 512}))
