"""Declarative run and study configuration files (INI syntax).

A run file::

    [problem]
    a = -16
    b = 16
    sigma = 0.5
    beta = -1
    potential = zero            ; or harmonic(2.0), samples(V.txt)

    [initial]
    kind = type1                ; type1 | type2 | mode
    seed = 0

    [discretization]
    N = 512
    tau = 0.001
    scheme = lie_kinetic_last   ; lie_kinetic_first | strang

    [horizon]
    T = 1
    observe_every = 10

    [io]
    out = results
    checkpoint_every = 0
    formats = csv, json

A study file replaces ``discretization``/``horizon`` by ``[study]`` (``T``,
``scheme``, ``tau_list``, ``N_list``, ``N_ref``, ``tau_ref``, ``seeds``)
and may add ``[assert_time]`` / ``[assert_space]`` sections giving minimum
slopes per norm (``l2``, ``h1``, ``linf``).
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .experiments import DataKind, InitialData, StudyConfig
from .grid import ConfigurationError, Grid1D
from .nonlinearity import SemiSmoothNonlinearity
from .propagators import Potential, Scheme, SplitConfig

__all__ = ["RunConfig", "StudyFile", "parse_potential", "OUT_ENV", "CACHE_ENV"]

OUT_ENV = "SEMISMOOTH_NLSE_OUT"
CACHE_ENV = "SEMISMOOTH_NLSE_CACHE"

_POT_RE = re.compile(r"^\s*(zero|harmonic|samples)\s*(?:\(\s*(.*?)\s*\))?\s*$")


def parse_potential(spec: str, grid: Grid1D, base_dir: Path | None = None) -> Potential:
    m = _POT_RE.match(spec)
    if not m:
        raise ConfigurationError(f"problem.potential: cannot parse {spec!r}")
    kind, arg = m.groups()
    if kind == "zero":
        return Potential.zero(grid)
    if kind == "harmonic":
        try:
            return Potential.harmonic(grid, float(arg))
        except (TypeError, ValueError):
            raise ConfigurationError(f"problem.potential: harmonic needs a number, got {arg!r}") from None
    path = Path(arg or "")
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    try:
        values = np.loadtxt(path, dtype=float, ndmin=1)
    except OSError as exc:
        raise ConfigurationError(f"problem.potential: {exc}") from None
    return Potential(grid, values)


class _Reader:
    def __init__(self, text: str):
        self.cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        self.cp.optionxform = str
        try:
            self.cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigurationError(f"config syntax: {exc}") from None

    def get(self, section, key, conv=str, default=...):
        name = f"{section}.{key}"
        if not self.cp.has_option(section, key):
            if default is ...:
                raise ConfigurationError(f"{name}: missing")
            return default
        raw = self.cp.get(section, key).strip()
        if raw == "" and default is not ...:
            return default
        try:
            return conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"{name}: {exc}") from None

    def has(self, section):
        return self.cp.has_section(section)


def _floats(raw: str):
    return tuple(float(x) for x in raw.replace(",", " ").split())


def _ints(raw: str):
    return tuple(int(x) for x in raw.replace(",", " ").split())


def _names(raw: str):
    return tuple(x.strip() for x in raw.split(",") if x.strip())


def _opt_int(raw: str):
    return None if raw in ("", "none") else int(raw)


def _read_initial(r: _Reader) -> InitialData:
    if not r.has("initial"):
        return InitialData()
    try:
        return InitialData(
            kind=r.get("initial", "kind", DataKind, DataKind.TYPE_I),
            seed=r.get("initial", "seed", int, 0),
            decay=r.get("initial", "decay", float, 2.5),
            n_data=r.get("initial", "n_data", _opt_int, None),
            mode=r.get("initial", "mode", int, 1),
            amplitude=r.get("initial", "amplitude", float, 1.0),
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"initial: {exc}") from None


def _write_initial(init: InitialData) -> list[str]:
    return [
        "[initial]",
        f"kind = {init.kind.value}",
        f"seed = {init.seed}",
        f"decay = {init.decay!r}",
        f"n_data = {'' if init.n_data is None else init.n_data}",
        f"mode = {init.mode}",
        f"amplitude = {init.amplitude!r}",
        "",
    ]


def _fmt_list(values) -> str:
    return ", ".join(repr(v) for v in values)


@dataclass(frozen=True)
class RunConfig:
    a: float
    b: float
    sigma: float
    beta: float
    N: int
    tau: float
    T: float
    scheme: Scheme = Scheme.LIE_KINETIC_LAST
    potential: str = "zero"
    initial: InitialData = field(default_factory=InitialData)
    observe_every: int = 1
    out: str = "results"
    checkpoint_every: int = 0
    formats: tuple = ("csv", "json")

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        Grid1D(self.a, self.b, self.N)
        SemiSmoothNonlinearity(self.beta, self.sigma)
        if not self.tau > 0:
            raise ConfigurationError(f"discretization.tau: must be positive, got {self.tau}")
        n = round(self.T / self.tau)
        if n < 1 or not math.isclose(n * self.tau, self.T, rel_tol=1e-9):
            raise ConfigurationError(
                f"discretization.tau: T/tau = {self.T / self.tau!r} is not a positive integer"
            )
        if self.observe_every < 1:
            raise ConfigurationError("horizon.observe_every: must be >= 1")
        if self.checkpoint_every < 0:
            raise ConfigurationError("io.checkpoint_every: must be >= 0")
        unknown = set(self.formats) - {"csv", "json"}
        if unknown:
            raise ConfigurationError(f"io.formats: unknown format(s) {sorted(unknown)}")

    @property
    def n_steps(self) -> int:
        return round(self.T / self.tau)

    @property
    def grid(self) -> Grid1D:
        return Grid1D(self.a, self.b, self.N)

    def split_config(self, base_dir: Path | None = None) -> SplitConfig:
        grid = self.grid
        pot = parse_potential(self.potential, grid, base_dir)
        return SplitConfig(self.scheme, self.tau, SemiSmoothNonlinearity(self.beta, self.sigma), pot)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        r = _Reader(text)
        return cls(
            a=r.get("problem", "a", float),
            b=r.get("problem", "b", float),
            sigma=r.get("problem", "sigma", float),
            beta=r.get("problem", "beta", float),
            potential=r.get("problem", "potential", str, "zero"),
            initial=_read_initial(r),
            N=r.get("discretization", "N", int),
            tau=r.get("discretization", "tau", float),
            scheme=r.get("discretization", "scheme", Scheme, Scheme.LIE_KINETIC_LAST),
            T=r.get("horizon", "T", float),
            observe_every=r.get("horizon", "observe_every", int, 1),
            out=r.get("io", "out", str, "results"),
            checkpoint_every=r.get("io", "checkpoint_every", int, 0),
            formats=r.get("io", "formats", _names, ("csv", "json")),
        )

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        lines = [
            "[problem]",
            f"a = {self.a!r}",
            f"b = {self.b!r}",
            f"sigma = {self.sigma!r}",
            f"beta = {self.beta!r}",
            f"potential = {self.potential}",
            "",
            *_write_initial(self.initial),
            "[discretization]",
            f"N = {self.N}",
            f"tau = {self.tau!r}",
            f"scheme = {self.scheme.value}",
            "",
            "[horizon]",
            f"T = {self.T!r}",
            f"observe_every = {self.observe_every}",
            "",
            "[io]",
            f"out = {self.out}",
            f"checkpoint_every = {self.checkpoint_every}",
            f"formats = {', '.join(self.formats)}",
            "",
        ]
        return "\n".join(lines)


@dataclass(frozen=True)
class StudyFile:
    study: StudyConfig
    initial: InitialData = field(default_factory=InitialData)
    seeds: tuple = ()
    assert_time: dict = field(default_factory=dict)
    assert_space: dict = field(default_factory=dict)

    def initials(self) -> list[InitialData]:
        """One initial datum per seed (Type II), else just ``initial``."""
        if self.initial.kind is DataKind.TYPE_II and self.seeds:
            return [replace(self.initial, seed=s) for s in self.seeds]
        return [self.initial]

    @classmethod
    def from_text(cls, text: str) -> "StudyFile":
        r = _Reader(text)
        s = "study"
        study = StudyConfig(
            sigma=r.get("problem", "sigma", float),
            beta=r.get("problem", "beta", float, -1.0),
            domain=(r.get("problem", "a", float), r.get("problem", "b", float)),
            T=r.get(s, "T", float, 1.0),
            scheme=r.get(s, "scheme", Scheme, Scheme.LIE_KINETIC_LAST),
            tau_list=r.get(s, "tau_list", _floats, ()),
            N_list=r.get(s, "N_list", _ints, ()),
            N_ref=r.get(s, "N_ref", int, 4096),
            tau_ref=r.get(s, "tau_ref", float, 1e-5),
        )
        potential = r.get("problem", "potential", str, "zero")
        if potential != "zero":
            raise ConfigurationError("problem.potential: convergence studies use V = 0")
        asserts = {}
        for sec in ("assert_time", "assert_space"):
            asserts[sec] = {}
            if r.has(sec):
                for key in r.cp.options(sec):
                    if key not in ("l2", "h1", "linf"):
                        raise ConfigurationError(f"{sec}.{key}: unknown norm")
                    asserts[sec][key] = r.get(sec, key, float)
        return cls(study, _read_initial(r), r.get(s, "seeds", _ints, ()),
                   asserts["assert_time"], asserts["assert_space"])

    @classmethod
    def from_file(cls, path) -> "StudyFile":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        st = self.study
        lines = [
            "[problem]",
            f"a = {st.domain[0]!r}",
            f"b = {st.domain[1]!r}",
            f"sigma = {st.sigma!r}",
            f"beta = {st.beta!r}",
            "potential = zero",
            "",
            *_write_initial(self.initial),
            "[study]",
            f"T = {st.T!r}",
            f"scheme = {st.scheme.value}",
            f"tau_list = {_fmt_list(st.tau_list)}",
            f"N_list = {_fmt_list(st.N_list)}",
            f"N_ref = {st.N_ref}",
            f"tau_ref = {st.tau_ref!r}",
            f"seeds = {_fmt_list(self.seeds)}",
            "",
        ]
        for sec, d in (("assert_time", self.assert_time), ("assert_space", self.assert_space)):
            if d:
                lines += [f"[{sec}]", *(f"{k} = {v!r}" for k, v in d.items()), ""]
        return "\n".join(lines)
