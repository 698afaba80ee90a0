"""``semismooth-nlse`` command line.

Exit codes: 0 success, 2 configuration error, 3 assertion failure
(slope thresholds, degenerate fits, self-test properties), 4 runtime
failure (blow-up, I/O).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import CACHE_ENV, OUT_ENV, RunConfig, StudyFile
from .experiments import (
    NORMS,
    reference_self_convergence,
    reference_solution,
    spatial_sweep,
    temporal_sweep,
)
from .fieldio import load_field, save_field
from .grid import ConfigurationError, NodalField, dst_analyze, dst_synthesize, h1_norm, l2_norm
from .observables import ObservableRecord, energy, mass, records_to_csv
from .propagators import SimulationState, StepError, evolve
from .svgplot import loglog_svg

EXIT_OK, EXIT_CONFIG, EXIT_ASSERT, EXIT_RUNTIME = 0, 2, 3, 4


def _out_dir(args, configured: str | None = None, base: Path | None = None) -> Path:
    """``--out`` beats the environment variable, which beats the config file."""
    if args.out:
        path = Path(args.out)
    elif os.environ.get(OUT_ENV):
        path = Path(os.environ[OUT_ENV])
    elif configured:
        path = Path(configured)
        if base is not None and not path.is_absolute():
            path = base / path
    else:
        path = Path("results")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cache_dir(out: Path) -> Path:
    return Path(os.environ.get(CACHE_ENV) or out / "refcache")


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _record(psi: NodalField, t: float, pot, nl) -> ObservableRecord:
    c = dst_analyze(psi)
    return ObservableRecord(t, mass(psi), energy(psi, pot, nl), l2_norm(c), h1_norm(c),
                            float(np.max(np.abs(psi.values))))


def _load_run(args) -> tuple[RunConfig, Path]:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"{path}: {exc.strerror}") from None
    cfg = RunConfig.from_text(text)
    if args.seed is not None:
        cfg = replace(cfg, initial=replace(cfg.initial, seed=args.seed))
    return cfg, path.parent


def _load_study(args) -> StudyFile:
    path = Path(args.config)
    try:
        study = StudyFile.from_text(path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"{path}: {exc.strerror}") from None
    if args.seed is not None:
        study = replace(study, initial=replace(study.initial, seed=args.seed), seeds=())
    if args.paper_scale:
        study = replace(study, study=study.study.paper_scale())
    return study


# -- commands -----------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg, base = _load_run(args)
    split = cfg.split_config(base)
    out = _out_dir(args, cfg.out, base)
    grid = cfg.grid
    nl, pot = split.nonlinearity, split.potential
    meta = {"config_hash": _digest(cfg.to_text()), "version": __version__}

    records = []
    ck_every = cfg.checkpoint_every
    cadence = math.gcd(cfg.observe_every, ck_every) if ck_every else cfg.observe_every

    def observe(s: SimulationState):
        k = s.step_index
        if k % cfg.observe_every == 0 or k == cfg.n_steps:
            records.append(_record(s.field, s.time, pot, nl))
        if ck_every and k % ck_every == 0 and 0 < k < cfg.n_steps:
            save_field(out / f"checkpoint-{k:08d}.ckpt", s.field, _ck_header(cfg, s, meta))

    t0 = time.perf_counter()
    final = evolve(SimulationState(cfg.initial.sample(grid)), split, cfg.n_steps,
                   observers=[observe], every=cadence)
    wall = time.perf_counter() - t0

    save_field(out / "final.ckpt", final.field, _ck_header(cfg, final, meta))
    if "csv" in cfg.formats:
        (out / "observables.csv").write_text(records_to_csv(records, meta))
    summary = {
        "final_time": final.time,
        "steps": final.step_index,
        "final_mass": records[-1].mass,
        "final_energy": records[-1].energy,
        "initial_mass": records[0].mass,
        "initial_energy": records[0].energy,
        "wall_time_s": wall,
        **meta,
    }
    if "json" in cfg.formats:
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{cfg.n_steps} steps in {wall:.2f} s; mass {summary['final_mass']:.15g}, "
          f"energy {summary['final_energy']:.15g}; output in {out}")
    return EXIT_OK


def _ck_header(cfg: RunConfig, s: SimulationState, meta: dict) -> dict:
    return {"step_index": s.step_index, "time": s.time, "scheme": cfg.scheme.value,
            "tau": cfg.tau, **meta}


def cmd_observables(args) -> int:
    """Observables of a checkpoint (``--checkpoint``) or of the configured initial datum."""
    cfg, base = _load_run(args)
    split = cfg.split_config(base)
    out = _out_dir(args, cfg.out, base)
    if args.checkpoint:
        field, head = load_field(args.checkpoint)
        if not isinstance(field, NodalField):
            field = dst_synthesize(field)
        if field.grid != cfg.grid:
            raise ConfigurationError("checkpoint grid does not match discretization.N / problem.a,b")
        t = float(head.get("time", 0.0))
        name = Path(args.checkpoint).stem + "-observables.csv"
    else:
        field, t, name = cfg.initial.sample(cfg.grid), 0.0, "initial-observables.csv"
    rec = _record(field, t, split.potential, split.nonlinearity)
    meta = {"config_hash": _digest(cfg.to_text()), "version": __version__}
    (out / name).write_text(records_to_csv([rec], meta))
    for k in ("time", "mass", "energy", "l2", "h1", "linf"):
        print(f"{k:>7} {getattr(rec, k):.15g}")
    return EXIT_OK


def _guides(args, axis: str):
    if args.guide:
        return tuple(args.guide)
    return (0.5, 1.0) if axis == "time" else (1.0, 2.0)


def cmd_converge(args) -> int:
    study = _load_study(args)
    axis = args.axis
    out = _out_dir(args)
    cache = _cache_dir(out)
    sweep = temporal_sweep if axis == "time" else spatial_sweep
    thresholds = study.assert_time if axis == "time" else study.assert_space
    inits = study.initials()

    results = []
    for init in inits:
        res = sweep(study.study, init, cache_dir=cache, threads=args.threads)
        suffix = f"_seed{init.seed}" if len(inits) > 1 else ""
        (out / f"sweep_{axis}{suffix}.csv").write_text(res.to_csv())
        results.append((init, res))
        pretty = ", ".join(f"{n} {res.slope(n):.3f}" for n in NORMS)
        print(f"{axis} sweep{suffix or ''}: slopes {pretty}")

    if args.svg:
        series = {}
        for init, res in results:
            tag = f" seed {init.seed}" if len(inits) > 1 else ""
            for n in NORMS:
                series[f"{n}{tag}"] = (list(res.resolutions), list(res.errors[n]))
        xlabel = "tau" if axis == "time" else "h"
        svg = loglog_svg(series, guides=_guides(args, axis), title=f"{axis} convergence",
                         xlabel=xlabel, ylabel="error at T")
        (out / f"sweep_{axis}.svg").write_text(svg)

    degenerate = [n for _, r in results for n in NORMS if r.fits[n].degenerate]
    if degenerate:
        print(f"degenerate fit: errors at rounding level in {sorted(set(degenerate))}; "
              "no convergence order can be measured", file=sys.stderr)
        return EXIT_ASSERT

    failed = []
    for norm, floor in thresholds.items():
        worst = min(r.slope(norm) for _, r in results)
        ok = worst >= floor
        print(f"[{'PASS' if ok else 'FAIL'}] {axis} {norm} slope {worst:.3f} >= {floor}"
              + (" (minimum over seeds)" if len(inits) > 1 else ""))
        if not ok:
            failed.append(norm)
    if failed:
        print(f"slope assertion failed for {failed}", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def cmd_reference(args) -> int:
    study = _load_study(args)
    out = _out_dir(args)
    cache = _cache_dir(out) if args.build_cache else None
    bound = 1e-7
    failed = False
    for init in study.initials():
        t0 = time.perf_counter()
        ref = reference_solution(study.study, init, cache_dir=cache)
        line = f"seed {init.seed}: reference |psi(T)| = {l2_norm(ref):.12f} ({time.perf_counter() - t0:.1f} s)"
        if args.self_check:
            diff = reference_self_convergence(study.study, init, cache_dir=cache)
            ok = diff <= bound
            failed |= not ok
            line += f"; self-convergence {diff:.2e} [{'PASS' if ok else 'FAIL'} <= {bound:g}]"
        print(line)
    if cache is not None:
        print(f"cache: {cache}")
    return EXIT_ASSERT if failed else EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return EXIT_OK if run_selftest(fault=args.inject_fault, quick=args.quick) else EXIT_ASSERT


# -- parser ---------------------------------------------------------------------------

def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semismooth-nlse", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH")
    common.add_argument("--out", metavar="DIR", help=f"output directory (overrides ${OUT_ENV})")
    common.add_argument("--seed", type=_u64, metavar="U64", help="override the initial-data seed")

    study = argparse.ArgumentParser(add_help=False)
    study.add_argument("--paper-scale", action="store_true",
                       help="reference at h = 2^-9, tau = 1e-6 (overnight run)")
    study.add_argument("--threads", type=int, default=1, metavar="K")

    s = sub.add_parser("simulate", parents=[common], help="run one simulation")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("observables", parents=[common], help="mass, energy and norms of a field")
    s.add_argument("--checkpoint", metavar="FILE")
    s.set_defaults(func=cmd_observables)

    s = sub.add_parser("converge", parents=[common, study], help="temporal or spatial order study")
    s.add_argument("--axis", choices=("time", "space"), required=True)
    s.add_argument("--svg", action="store_true", help="also write a log-log plot")
    s.add_argument("--guide", type=float, action="append", metavar="ORDER",
                   help="reference-slope guide line in the plot (repeatable)")
    s.set_defaults(func=cmd_converge)

    s = sub.add_parser("reference", parents=[common, study], help="compute reference solutions")
    s.add_argument("--build-cache", action="store_true", help="store results in the reference cache")
    s.add_argument("--self-check", action="store_true",
                   help="compare against a reference with 2N_ref and tau_ref/2")
    s.set_defaults(func=cmd_reference)

    s = sub.add_parser("selftest", help="run the certification suite")
    s.add_argument("--quick", action="store_true", help="skip the conservation run")
    s.add_argument("--inject-fault", choices=("q_coeff",), help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepError, FloatingPointError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
