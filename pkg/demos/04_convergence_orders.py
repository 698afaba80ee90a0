"""Desk-light temporal and spatial sweeps for the random H^2 datum, sigma = 1/2.

The reference here is much coarser than in the acceptance studies
(configs/type2_sigma0.5.ini), so this runs in seconds.  Plots go to
results/demo_time.svg and results/demo_space.svg.
"""

from pathlib import Path

from semismooth_nlse.experiments import DataKind, InitialData, StudyConfig, spatial_sweep, temporal_sweep
from semismooth_nlse.svgplot import loglog_svg

cfg = StudyConfig(sigma=0.5, domain=(-1.0, 1.0), T=0.25,
                  tau_list=(0.025, 0.0125, 0.00625, 0.003125), N_list=(32, 64, 128, 256),
                  N_ref=1024, tau_ref=1e-4)
init = InitialData(DataKind.TYPE_II, seed=0)
out = Path("results")
out.mkdir(exist_ok=True)

for sweep, axis, guides in ((temporal_sweep, "time", (0.5, 1.0)), (spatial_sweep, "space", (1.0, 2.0))):
    res = sweep(cfg, init)
    print(res.to_csv())
    series = {n: (res.resolutions, res.errors[n]) for n in ("l2", "h1")}
    (out / f"demo_{axis}.svg").write_text(loglog_svg(series, guides, title=f"{axis} errors, sigma = 0.5",
                                                     xlabel="tau" if axis == "time" else "h"))
