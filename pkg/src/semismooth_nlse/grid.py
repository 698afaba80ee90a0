"""Sine-spectral discretization of an interval with homogeneous Dirichlet ends.

A wave function lives in two equivalent forms:

* :class:`NodalField` -- values ``v_0 .. v_N`` at the grid nodes, with
  ``v_0 = v_N = 0``;
* :class:`SpectralField` -- sine coefficients ``c_1 .. c_{N-1}`` of the
  interpolant ``sum_l c_l sin(mu_l (x - a))``.

The forward transform uses the normalization ``c_l = (2/N) sum_j v_j
sin(j pi l / N)`` and the inverse carries no factor, so that
``dst_synthesize(dst_analyze(v)) == v``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

__all__ = [
    "ConfigurationError",
    "Grid1D",
    "NodalField",
    "SpectralField",
    "build_grid",
    "dst_analyze",
    "dst_synthesize",
    "direct_analyze",
    "direct_synthesize",
    "evaluate_series",
    "truncate_to",
    "embed_into",
    "l2_norm",
    "h1_seminorm",
    "h1_norm",
    "lp_norm_nodal",
]


class ConfigurationError(ValueError):
    """Invalid grid, field or run parameters."""


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid ``x_j = a + j h`` on ``[a, b]`` with ``N`` subintervals."""

    a: float
    b: float
    N: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.b <= self.a:
            raise ConfigurationError(f"need a < b, got a={self.a}, b={self.b}")
        if int(self.N) != self.N or self.N < 2:
            raise ConfigurationError(f"need integer N >= 2, got N={self.N}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "N", int(self.N))

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.N

    @cached_property
    def nodes(self) -> np.ndarray:
        return _frozen(self.a + self.h * np.arange(self.N + 1))

    @cached_property
    def modes(self) -> np.ndarray:
        """Mode indices ``l = 1 .. N-1``."""
        return _frozen(np.arange(1, self.N))

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Sine frequencies ``mu_l = pi l / (b - a)``."""
        return _frozen(np.pi * self.modes / self.length)

    def same_interval(self, other: "Grid1D") -> bool:
        return self.a == other.a and self.b == other.b

    def refines(self, coarse: "Grid1D") -> bool:
        """True if ``coarse`` nodes are a subset of this grid's nodes."""
        return self.same_interval(coarse) and self.N % coarse.N == 0


def build_grid(a: float, b: float, N: int) -> Grid1D:
    return Grid1D(a, b, N)


@dataclass(frozen=True, eq=False)
class NodalField:
    """Complex nodal values on a grid, vanishing at both endpoints."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.N + 1,):
            raise ConfigurationError(
                f"nodal field needs {self.grid.N + 1} values, got shape {v.shape}"
            )
        if v[0] != 0 or v[-1] != 0:
            raise ConfigurationError("nodal field must vanish at both endpoints")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_interior(cls, grid: Grid1D, interior) -> "NodalField":
        v = np.zeros(grid.N + 1, dtype=complex)
        v[1:-1] = interior
        return cls(grid, v)

    @classmethod
    def zeros(cls, grid: Grid1D) -> "NodalField":
        return cls(grid, np.zeros(grid.N + 1, dtype=complex))

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1]


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Sine coefficients ``c_l``, ``l = 1 .. N-1``, of a member of X_N."""

    grid: Grid1D
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.shape != (self.grid.N - 1,):
            raise ConfigurationError(
                f"spectral field needs {self.grid.N - 1} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coefficients", _frozen(c))

    @classmethod
    def zeros(cls, grid: Grid1D) -> "SpectralField":
        return cls(grid, np.zeros(grid.N - 1, dtype=complex))

    @classmethod
    def single_mode(cls, grid: Grid1D, l: int, amplitude: complex = 1.0) -> "SpectralField":
        if not 1 <= l <= grid.N - 1:
            raise ConfigurationError(f"mode {l} not in 1..{grid.N - 1}")
        c = np.zeros(grid.N - 1, dtype=complex)
        c[l - 1] = amplitude
        return cls(grid, c)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if self.grid != other.grid:
            raise ConfigurationError("cannot subtract fields on different grids")
        return SpectralField(self.grid, self.coefficients - other.coefficients)


# Fast transforms.  DST-I of the N-1 interior values computes
# 2 sum_j w_j sin(pi j l / N); both directions are rescaled to the
# interpolation convention.

def _analyze(interior: np.ndarray, N: int) -> np.ndarray:
    return scipy.fft.dst(interior, type=1) / N


def _synthesize(coefficients: np.ndarray) -> np.ndarray:
    return scipy.fft.dst(coefficients, type=1) * 0.5


def dst_analyze(v: NodalField) -> SpectralField:
    """Interpolation coefficients of ``I_N v``."""
    return SpectralField(v.grid, _analyze(v.interior, v.grid.N))


def dst_synthesize(c: SpectralField) -> NodalField:
    """Nodal values of the sine series; endpoints are exactly zero."""
    return NodalField.from_interior(c.grid, _synthesize(c.coefficients))


def _sine_matrix(N: int) -> np.ndarray:
    j = np.arange(1, N)
    return np.sin(np.pi * np.outer(j, j) / N)


def direct_analyze(v: NodalField) -> SpectralField:
    """O(N^2) evaluation of the analysis sum (reference path)."""
    N = v.grid.N
    return SpectralField(v.grid, (2.0 / N) * (_sine_matrix(N) @ v.interior))


def direct_synthesize(c: SpectralField) -> NodalField:
    """O(N^2) evaluation of the synthesis sum (reference path)."""
    return NodalField.from_interior(c.grid, _sine_matrix(c.grid.N) @ c.coefficients)


def evaluate_series(c: SpectralField, x):
    """Value of the sine series at point(s) ``x`` in ``[a, b]``."""
    g = c.grid
    xs = np.asarray(x, dtype=float)
    if np.any(xs < g.a) or np.any(xs > g.b):
        raise ConfigurationError(f"evaluation point outside [{g.a}, {g.b}]")
    vals = np.sin(np.multiply.outer(xs - g.a, g.frequencies)) @ c.coefficients
    return complex(vals) if vals.ndim == 0 else vals


def truncate_to(c_fine: SpectralField, coarse: Grid1D) -> SpectralField:
    """Project a fine-grid series onto the coarse space X_N by dropping modes."""
    if not c_fine.grid.refines(coarse):
        raise ConfigurationError(
            f"grid N={coarse.N} is not a coarsening of N={c_fine.grid.N} on the same interval"
        )
    return SpectralField(coarse, c_fine.coefficients[: coarse.N - 1])


def embed_into(c_coarse: SpectralField, fine: Grid1D) -> SpectralField:
    """Exact inclusion X_{N_coarse} into X_{N_fine} (zero padding)."""
    if not fine.refines(c_coarse.grid):
        raise ConfigurationError(
            f"grid N={fine.N} does not refine N={c_coarse.grid.N} on the same interval"
        )
    out = np.zeros(fine.N - 1, dtype=complex)
    out[: c_coarse.grid.N - 1] = c_coarse.coefficients
    return SpectralField(fine, out)


def l2_norm(c: SpectralField) -> float:
    """Continuous L2 norm of the series, by Parseval."""
    w = c.coefficients
    return float(np.sqrt(0.5 * c.grid.length * np.vdot(w, w).real))


def h1_seminorm(c: SpectralField) -> float:
    """L2 norm of the derivative of the series."""
    w = c.grid.frequencies * c.coefficients
    return float(np.sqrt(0.5 * c.grid.length * np.vdot(w, w).real))


def h1_norm(c: SpectralField) -> float:
    return float(np.hypot(l2_norm(c), h1_seminorm(c)))


def lp_norm_nodal(v: NodalField, p=2) -> float:
    """Discrete norm ``(h sum_{j<N} |v_j|^p)^(1/p)``, or the max for ``p = inf``."""
    if not p >= 1:
        raise ConfigurationError(f"need p >= 1, got {p}")
    a = np.abs(v.values[:-1])
    if np.isinf(p):
        return float(a.max())
    if p == 2:
        return float(np.sqrt(v.grid.h * np.dot(a, a)))
    return float((v.grid.h * np.sum(a**p)) ** (1.0 / p))
