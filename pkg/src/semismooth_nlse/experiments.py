"""Convergence and conservation studies for the TSSP scheme.

Errors are measured at the final time against a fine-grid reference,
always through exact coefficient embedding (see
:func:`semismooth_nlse.observables.error_norms`).
"""

from __future__ import annotations

import enum
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .fieldio import load_field, save_field
from .grid import (
    ConfigurationError,
    Grid1D,
    NodalField,
    SpectralField,
    dst_analyze,
    dst_synthesize,
    embed_into,
    evaluate_series,
    l2_norm,
)
from .nonlinearity import SemiSmoothNonlinearity
from .observables import energy, error_norms, mass
from .propagators import Potential, Scheme, SimulationState, SplitConfig, evolve

__all__ = [
    "DataKind",
    "InitialData",
    "StudyConfig",
    "OrderFit",
    "SweepResult",
    "EnergyDriftResult",
    "make_type1",
    "make_type2",
    "type2_coefficients",
    "fit_order",
    "reference_solution",
    "reference_self_convergence",
    "temporal_sweep",
    "spatial_sweep",
    "energy_drift_study",
    "strang_temporal_order",
    "PAPER_MESH",
    "PAPER_TAU",
]

PAPER_MESH = 2.0**-9
PAPER_TAU = 1e-6
NORMS = ("l2", "h1", "linf")


# -- initial data --------------------------------------------------------------

def make_type1(grid: Grid1D) -> NodalField:
    """Samples of ``x exp(-x^2/2)``; the endpoints are set to exactly zero."""
    x = grid.nodes[1:-1]
    return NodalField.from_interior(grid, x * np.exp(-0.5 * x * x))


def type2_coefficients(grid: Grid1D, seed: int, decay: float = 2.5) -> SpectralField:
    """Random H^2 datum in sine space, normalized to unit L2 norm.

    Even modes get ``(U + iU') / mu_l^decay`` with ``U, U'`` uniform on
    ``(-1, 1)``; odd modes vanish.  Draws come from numpy's Philox
    counter-based generator keyed by ``seed``, consumed as (real, imag)
    pairs in increasing ``l``, so a finer grid extends rather than reshuffles
    the coefficient sequence.
    """
    rng = np.random.Generator(np.random.Philox(int(seed)))
    even = grid.modes % 2 == 0
    draws = rng.uniform(-1.0, 1.0, size=(int(even.sum()), 2))
    c = np.zeros(grid.N - 1, dtype=complex)
    c[even] = (draws[:, 0] + 1j * draws[:, 1]) / grid.frequencies[even] ** decay
    raw = SpectralField(grid, c)
    return SpectralField(grid, c / l2_norm(raw))


def make_type2(grid: Grid1D, seed: int, decay: float = 2.5) -> NodalField:
    return dst_synthesize(type2_coefficients(grid, seed, decay))


class DataKind(str, enum.Enum):
    TYPE_I = "type1"
    TYPE_II = "type2"
    MODE = "mode"


@dataclass(frozen=True)
class InitialData:
    """Recipe for an initial wave function on any grid of a given interval.

    For Type II data the random coefficients are drawn on a grid with
    ``n_data`` subintervals (default: the grid being sampled).  Pinning
    ``n_data`` makes every resolution in a study see the same function.
    ``MODE`` is the single sine mode ``amplitude * sin(mu_mode (x - a))``.
    """

    kind: DataKind = DataKind.TYPE_I
    seed: int = 0
    decay: float = 2.5
    n_data: int | None = None
    mode: int = 1
    amplitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DataKind(self.kind))
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def pinned(self, n_data: int) -> "InitialData":
        if self.kind is DataKind.TYPE_II and self.n_data is None:
            return replace(self, n_data=n_data)
        return self

    def key(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        if self.kind is DataKind.TYPE_I:
            d = {"kind": d["kind"]}
        elif self.kind is DataKind.MODE:
            d = {"kind": d["kind"], "mode": self.mode, "amplitude": self.amplitude}
        return d

    def spectral(self, grid: Grid1D) -> SpectralField:
        return dst_analyze(self.sample(grid))

    def sample(self, grid: Grid1D) -> NodalField:
        if self.kind is DataKind.TYPE_I:
            return make_type1(grid)
        if self.kind is DataKind.MODE:
            return dst_synthesize(SpectralField.single_mode(grid, self.mode, self.amplitude))
        n = self.n_data or grid.N
        data_grid = Grid1D(grid.a, grid.b, n)
        coeffs = type2_coefficients(data_grid, self.seed, self.decay)
        if n == grid.N:
            return dst_synthesize(coeffs)
        if n % grid.N == 0:
            return NodalField(grid, dst_synthesize(coeffs).values[:: n // grid.N])
        if grid.N % n == 0:
            return dst_synthesize(embed_into(coeffs, grid))
        values = np.zeros(grid.N + 1, dtype=complex)
        values[1:-1] = evaluate_series(coeffs, grid.nodes[1:-1])
        return NodalField(grid, values)


# -- study configuration -----------------------------------------------------------

def _is_dyadic(seq, increasing: bool) -> bool:
    ratio = 2.0 if increasing else 0.5
    return all(math.isclose(b / a, ratio, rel_tol=1e-12) for a, b in zip(seq, seq[1:]))


@dataclass(frozen=True)
class StudyConfig:
    sigma: float
    beta: float = -1.0
    domain: tuple = (-16.0, 16.0)
    T: float = 1.0
    scheme: Scheme = Scheme.LIE_KINETIC_LAST
    tau_list: tuple = ()
    N_list: tuple = ()
    N_ref: int = 4096
    tau_ref: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "domain", tuple(float(x) for x in self.domain))
        object.__setattr__(self, "tau_list", tuple(float(t) for t in self.tau_list))
        object.__setattr__(self, "N_list", tuple(int(n) for n in self.N_list))
        SemiSmoothNonlinearity(self.beta, self.sigma)
        Grid1D(*self.domain, self.N_ref)
        if not self.T > 0:
            raise ConfigurationError(f"final time must be positive, got {self.T}")
        if not _is_dyadic(self.tau_list, increasing=False):
            raise ConfigurationError("tau_list must halve from one entry to the next")
        if not _is_dyadic(self.N_list, increasing=True):
            raise ConfigurationError("N_list must double from one entry to the next")
        for tau in self.tau_list:
            self.n_steps(tau)
        if self.N_list and max(self.N_list) >= self.N_ref:
            raise ConfigurationError("N_ref must be finer than every N in N_list")
        if self.tau_list and min(self.tau_list) <= self.tau_ref:
            raise ConfigurationError("tau_ref must be smaller than every tau in tau_list")

    @property
    def nonlinearity(self) -> SemiSmoothNonlinearity:
        return SemiSmoothNonlinearity(self.beta, self.sigma)

    def grid(self, N: int | None = None) -> Grid1D:
        return Grid1D(*self.domain, N or self.N_ref)

    def n_steps(self, tau: float, field_name: str = "tau_list") -> int:
        n = round(self.T / tau)
        if n < 1 or not math.isclose(n * tau, self.T, rel_tol=1e-9):
            raise ConfigurationError(f"{field_name}: T/tau = {self.T / tau!r} is not an integer")
        return n

    def paper_scale(self) -> "StudyConfig":
        """Reference resolution of the original protocol: h = 2^-9, tau = 1e-6."""
        n_ref = round((self.domain[1] - self.domain[0]) / PAPER_MESH)
        return replace(self, N_ref=n_ref, tau_ref=PAPER_TAU)

    def refined_reference(self) -> "StudyConfig":
        """Reference with twice the nodes and half the step."""
        return replace(self, N_ref=2 * self.N_ref, tau_ref=0.5 * self.tau_ref, tau_list=(), N_list=())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scheme"] = self.scheme.value
        d["domain"] = list(self.domain)
        d["tau_list"] = list(self.tau_list)
        d["N_list"] = list(self.N_list)
        return d

    def digest(self, init: InitialData) -> str:
        blob = json.dumps({"study": self.to_dict(), "init": init.key()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- order fitting ----------------------------------------------------------------

@dataclass(frozen=True)
class OrderFit:
    """Least-squares slope of log2(error) against log2(resolution).

    ``slope`` is NaN when the fit is degenerate, i.e. some error sits at
    rounding level and carries no convergence information.
    """

    resolutions: tuple
    errors: tuple
    slope: float
    pair_slopes: tuple
    degenerate: bool = False


_EPS = np.finfo(float).eps
# Errors below this many ulps of the solution scale are rounding noise
# accumulated over the reference run, not discretization error.
ROUNDING_FLOOR = 1e4 * _EPS


def fit_order(resolutions, errors, scale: float = 1.0) -> OrderFit:
    r = np.asarray(resolutions, dtype=float)
    e = np.asarray(errors, dtype=float)
    if r.shape != e.shape or r.size < 3:
        raise ValueError("need at least three (resolution, error) pairs")
    if not np.all(e > 0):
        raise ValueError("errors must be positive")
    if not np.all(r > 0):
        raise ValueError("resolutions must be positive")
    degenerate = bool(np.any(e < ROUNDING_FLOOR * scale))
    lr, le = np.log2(r), np.log2(e)
    pairs = tuple(float(s) for s in np.diff(le) / np.diff(lr))
    slope = float("nan") if degenerate else float(np.polyfit(lr, le, 1)[0])
    return OrderFit(tuple(r.tolist()), tuple(e.tolist()), slope, pairs, degenerate)


def _fit_or_flag(resolutions, errors, scale) -> OrderFit:
    e = np.asarray(errors, dtype=float)
    if np.any(e < ROUNDING_FLOOR * scale):
        return OrderFit(tuple(resolutions), tuple(e.tolist()), float("nan"), (), True)
    return fit_order(resolutions, errors, scale)


# -- reference solutions --------------------------------------------------------------

def _evolve_to(cfg: StudyConfig, init: InitialData, N: int, tau: float, scheme: Scheme,
               field_name: str = "tau") -> NodalField:
    grid = cfg.grid(N)
    split = SplitConfig(scheme, tau, cfg.nonlinearity, Potential.zero(grid))
    n = cfg.n_steps(tau, field_name)
    return evolve(SimulationState(init.sample(grid)), split, n, fuse=True).field


def _cache_key(cfg: StudyConfig, init: InitialData, scheme: Scheme) -> dict:
    return {
        "format": 1,
        "domain": list(cfg.domain),
        "sigma": cfg.sigma,
        "beta": cfg.beta,
        "T": cfg.T,
        "N": cfg.N_ref,
        "tau": cfg.tau_ref,
        "scheme": scheme.value,
        "potential": "zero",
        "init": init.key(),
    }


def reference_solution(cfg: StudyConfig, init: InitialData, scheme: Scheme = Scheme.STRANG,
                       cache_dir=None) -> SpectralField:
    """Solution at ``cfg.T`` on the ``N_ref`` grid with step ``tau_ref``.

    The default integrator is Strang splitting.  When ``cache_dir`` is given,
    results are stored there under a hash of the full problem description and
    reused on later calls.
    """
    scheme = Scheme(scheme)
    init = init.pinned(cfg.N_ref)
    key = _cache_key(cfg, init, scheme)
    path = None
    if cache_dir is not None:
        digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()
        path = Path(cache_dir) / f"ref-{digest[:24]}.ckpt"
        if path.exists():
            field, head = load_field(path)
            if head.get("key") == key:
                return field
    final = _evolve_to(cfg, init, cfg.N_ref, cfg.tau_ref, scheme, "tau_ref")
    ref = dst_analyze(final)
    if path is not None:
        save_field(path, ref, {"key": key})
    return ref


def reference_self_convergence(cfg: StudyConfig, init: InitialData, cache_dir=None) -> float:
    """L2 change of the Strang reference when N_ref doubles and tau_ref halves."""
    init = init.pinned(cfg.N_ref)
    coarse = reference_solution(cfg, init, cache_dir=cache_dir)
    fine = reference_solution(cfg.refined_reference(), init, cache_dir=cache_dir)
    return l2_norm(fine - embed_into(coarse, fine.grid))


# -- sweeps ---------------------------------------------------------------------------

@dataclass
class SweepResult:
    axis: str
    resolutions: tuple
    errors: dict
    fits: dict
    metadata: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return any(f.degenerate for f in self.fits.values())

    def slope(self, norm: str) -> float:
        return self.fits[norm].slope

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("resolution,e_l2,e_h1,e_linf\n")
        for i, r in enumerate(self.resolutions):
            buf.write(",".join(repr(float(x)) for x in (r, *(self.errors[n][i] for n in NORMS))))
            buf.write("\n")
        buf.write("slope," + ",".join(repr(self.fits[n].slope) for n in NORMS) + "\n")
        meta = {"axis": self.axis, **self.metadata, "version": __version__}
        buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        return buf.getvalue()


def _scales(ref: SpectralField) -> dict:
    """Per-norm size of rounding noise: white noise in H1 is amplified by max mu."""
    s = max(l2_norm(ref), 1.0)
    return {"l2": s, "h1": s * ref.grid.frequencies[-1], "linf": s}


def _collect(axis, resolutions, rows, ref, metadata) -> SweepResult:
    errors = {n: tuple(float(row[i]) for row in rows) for i, n in enumerate(NORMS)}
    scales = _scales(ref)
    fits = {n: _fit_or_flag(resolutions, errors[n], scales[n]) for n in NORMS}
    return SweepResult(axis, tuple(resolutions), errors, fits, metadata)


def _map(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def temporal_sweep(cfg: StudyConfig, init: InitialData, cache_dir=None, threads: int = 1) -> SweepResult:
    """Errors on the reference mesh for each step size in ``cfg.tau_list``."""
    if len(cfg.tau_list) < 3:
        raise ConfigurationError("temporal sweep needs at least three step sizes")
    init = init.pinned(cfg.N_ref)
    ref = reference_solution(cfg, init, cache_dir=cache_dir)

    def run(tau):
        return error_norms(_evolve_to(cfg, init, cfg.N_ref, tau, cfg.scheme), ref)

    rows = _map(run, cfg.tau_list, threads)
    meta = {"config_hash": cfg.digest(init), "reference": f"strang/N={cfg.N_ref}/tau={cfg.tau_ref:g}"}
    return _collect("time", cfg.tau_list, rows, ref, meta)


def spatial_sweep(cfg: StudyConfig, init: InitialData, cache_dir=None, threads: int = 1) -> SweepResult:
    """Errors at step ``tau_ref`` for each mesh in ``cfg.N_list``.

    The reference is computed with the study's own scheme at the same step
    on the ``N_ref`` mesh, so the time discretization error cancels and only
    the spatial error remains.
    """
    if len(cfg.N_list) < 3:
        raise ConfigurationError("spatial sweep needs at least three meshes")
    init = init.pinned(cfg.N_ref)
    ref = reference_solution(cfg, init, scheme=cfg.scheme, cache_dir=cache_dir)

    def run(N):
        return error_norms(_evolve_to(cfg, init, N, cfg.tau_ref, cfg.scheme, "tau_ref"), ref)

    rows = _map(run, cfg.N_list, threads)
    hs = tuple(cfg.grid(N).h for N in cfg.N_list)
    meta = {"config_hash": cfg.digest(init),
            "reference": f"{cfg.scheme.value}/N={cfg.N_ref}/tau={cfg.tau_ref:g}"}
    return _collect("space", hs, rows, ref, meta)


def strang_temporal_order(cfg: StudyConfig, init: InitialData, N: int, ref_divisor: int = 16) -> OrderFit:
    """L2 order of the Strang scheme on one mesh against a ``tau/ref_divisor`` run."""
    taus = cfg.tau_list
    ref = dst_analyze(_evolve_to(cfg, init, N, taus[-1] / ref_divisor, Scheme.STRANG))
    errs = [error_norms(_evolve_to(cfg, init, N, t, Scheme.STRANG), ref)[0] for t in taus]
    return fit_order(taus, errs, scale=max(l2_norm(ref), 1.0))


# -- energy drift ------------------------------------------------------------------------

@dataclass
class EnergyDriftResult:
    """Per step size: sample times, ``|E_k - E_0| / (|E_0| tau)`` and mass drift."""

    taus: tuple
    times: dict
    normalized: dict
    mass_drift: dict

    def sup(self, tau: float) -> float:
        return float(np.max(self.normalized[tau]))

    def spread(self) -> float:
        """Ratio of the largest to the smallest sup over step sizes."""
        sups = [self.sup(t) for t in self.taus]
        return max(sups) / min(sups)

    def to_csv(self, metadata: dict | None = None) -> str:
        buf = io.StringIO()
        buf.write("tau,time,rel_energy_error_over_tau\n")
        for tau in self.taus:
            for t, v in zip(self.times[tau], self.normalized[tau]):
                buf.write(f"{tau!r},{float(t)!r},{float(v)!r}\n")
        meta = {**(metadata or {}), "version": __version__}
        sups = ";".join(f"{tau!r}:{self.sup(tau)!r}" for tau in self.taus)
        buf.write(f"# sup={sups} " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        return buf.getvalue()


def energy_drift_study(cfg: StudyConfig, init: InitialData, tau_list, T_long: float,
                       N: int | None = None, sample_every: float | None = None,
                       threads: int = 1) -> EnergyDriftResult:
    """Relative energy error divided by tau along trajectories up to ``T_long``."""
    grid = cfg.grid(N)
    nl = cfg.nonlinearity
    pot = Potential.zero(grid)
    psi0 = init.sample(grid)
    e0 = energy(psi0, pot, nl)
    m0 = mass(psi0)
    horizon = replace(cfg, T=T_long, tau_list=(), N_list=())

    def run(tau):
        n = horizon.n_steps(tau)
        every = 1 if sample_every is None else max(1, round(sample_every / tau))
        times, errs, drift = [], [], []

        def observe(s):
            times.append(s.time)
            errs.append(abs(energy(s.field, pot, nl) - e0) / (abs(e0) * tau))
            drift.append(abs(mass(s.field) - m0) / m0)

        split = SplitConfig(cfg.scheme, tau, nl, pot)
        evolve(SimulationState(psi0), split, n, observers=[observe], every=every)
        return np.array(times), np.array(errs), float(max(drift))

    out = _map(run, list(tau_list), threads)
    taus = tuple(float(t) for t in tau_list)
    return EnergyDriftResult(
        taus,
        {t: o[0] for t, o in zip(taus, out)},
        {t: o[1] for t, o in zip(taus, out)},
        {t: o[2] for t, o in zip(taus, out)},
    )
