"""Power-law nonlinearity ``f(rho) = beta rho^sigma`` and its local C^3 regularization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import ConfigurationError

__all__ = [
    "SemiSmoothNonlinearity",
    "RegularizedNonlinearity",
    "gen_binom",
    "density_power",
]


def density_power(rho, p: float):
    """``rho**p`` for ``rho >= 0`` and ``p > 0``, computed as ``exp(p log rho)``.

    Zero densities never reach the logarithm: they map to ``exp(-inf) = 0``.
    """
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0):
        raise ValueError("density must be non-negative")
    lg = np.log(r, out=np.full_like(r, -np.inf), where=r > 0)
    out = np.exp(p * lg)
    return float(out) if out.ndim == 0 else out


def _falling(s: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= s - i
    return out


def gen_binom(j: int, sigma: float) -> float:
    """Generalized binomial coefficient ``binom(j - sigma, j)`` for ``j = 0..3``."""
    if j not in (0, 1, 2, 3):
        raise ValueError(f"j must be in 0..3, got {j}")
    return _falling(j - sigma, j) / math.factorial(j)


@dataclass(frozen=True)
class SemiSmoothNonlinearity:
    beta: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")

    def f(self, rho):
        """``beta rho^sigma``, exactly 0 at ``rho = 0``."""
        return self.beta * density_power(rho, self.sigma)

    def F(self, rho):
        """Interaction energy density ``beta/(sigma+1) rho^(sigma+1)``."""
        return self.beta / (self.sigma + 1.0) * density_power(rho, self.sigma + 1.0)

    def G(self, z):
        """``f'(|z|^2) z^2 = beta sigma |z|^(2 sigma - 2) z^2``, with ``G(0) = 0``.

        Evaluated as ``beta sigma |z|^(2 sigma) e^{2 i arg z}`` to avoid the
        negative power at small ``|z|``.
        """
        zz = np.asarray(z, dtype=complex)
        mod = np.abs(zz)
        unit = np.divide(zz, mod, out=np.zeros_like(zz), where=mod > 0)
        out = self.beta * self.sigma * density_power(mod * mod, self.sigma) * unit * unit
        return complex(out) if out.ndim == 0 else out

    def derivative(self, rho, k: int):
        """k-th derivative of ``f`` for ``rho > 0``."""
        r = np.asarray(rho, dtype=float)
        if np.any(r <= 0):
            raise ValueError("power-law derivatives need rho > 0")
        out = self.beta * _falling(self.sigma, k) * np.exp((self.sigma - k) * np.log(r))
        return float(out) if out.ndim == 0 else out

    def regularize(self, eps: float) -> "RegularizedNonlinearity":
        return RegularizedNonlinearity(self, eps)


def _default_q(base: SemiSmoothNonlinearity, eps: float):
    scale = base.beta * eps ** (2 * base.sigma - 2)
    return tuple(scale * gen_binom(j, base.sigma) for j in range(4))


@dataclass(frozen=True)
class RegularizedNonlinearity:
    """``f_eps = f`` for ``rho >= eps^2`` and ``rho Q_eps(rho)`` below.

    ``Q_eps(rho) = sum_j q_j (1 - rho/eps^2)^j`` with
    ``q_j = beta eps^(2 sigma - 2) binom(j - sigma, j)``; this is the cubic
    Taylor polynomial of ``beta rho^(sigma-1)`` at ``eps^2``, so ``f_eps`` is
    C^3 across the junction.  Only needed for ``0 < sigma < 1``; for larger
    exponents the formulas stay valid but the solver never uses them.

    ``q_coeffs`` may be overridden, which the self-test uses for fault
    injection.
    """

    base: SemiSmoothNonlinearity
    eps: float
    q_coeffs: tuple = field(default=None)

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ConfigurationError(f"eps must lie in (0, 1), got {self.eps}")
        if self.q_coeffs is None:
            object.__setattr__(self, "q_coeffs", _default_q(self.base, self.eps))
        elif len(self.q_coeffs) != 4:
            raise ConfigurationError("q_coeffs needs four entries")

    @property
    def junction(self) -> float:
        return self.eps * self.eps

    def Q(self, rho, k: int = 0):
        """k-th derivative of the cubic ``Q_eps`` (any real ``rho``)."""
        r = np.asarray(rho, dtype=float)
        u = 1.0 - r / self.junction
        out = np.zeros_like(u)
        for j in range(k, 4):
            out = out + self.q_coeffs[j] * _falling(j, k) * u ** (j - k)
        out = out * (-1.0 / self.junction) ** k
        return float(out) if out.ndim == 0 else out

    def lower_branch(self, rho, k: int = 0):
        """k-th derivative of ``rho Q_eps(rho)`` (``k = 0..3``)."""
        if k == 0:
            return np.asarray(rho) * self.Q(rho) + 0.0
        return k * self.Q(rho, k - 1) + np.asarray(rho) * self.Q(rho, k)

    def upper_branch(self, rho, k: int = 0):
        """k-th derivative of the unregularized ``f`` (``rho > 0``)."""
        if k == 0:
            return self.base.f(rho)
        return self.base.derivative(rho, k)

    def f(self, rho):
        r = np.asarray(rho, dtype=float)
        if np.any(r < 0):
            raise ValueError("density must be non-negative")
        below = r < self.junction
        out = np.where(below, self.lower_branch(np.where(below, r, 0.0)), 0.0)
        out = np.where(below, out, self.base.f(np.where(below, self.junction, r)))
        return float(out) if out.ndim == 0 else out

    def derivative(self, rho, k: int):
        """Analytic k-th derivative of ``f_eps``, ``k = 1..3``."""
        if k not in (1, 2, 3):
            raise ValueError(f"k must be in 1..3, got {k}")
        r = np.asarray(rho, dtype=float)
        if np.any(r < 0):
            raise ValueError("density must be non-negative")
        below = r < self.junction
        lo = self.lower_branch(np.where(below, r, 0.0), k)
        hi = self.upper_branch(np.where(below, self.junction, r), k)
        out = np.where(below, lo, hi)
        return float(out) if out.ndim == 0 else out

    def S_sigma(self) -> float:
        """``sum_j |binom(j - sigma, j)|``."""
        return sum(abs(gen_binom(j, self.base.sigma)) for j in range(4))

    def approximation_constant(self) -> float:
        """C in ``|f - f_eps| <= C eps^(2 sigma)`` below the junction."""
        return abs(self.base.beta) * (1.0 + self.S_sigma())

    def growth_constant(self) -> float:
        """C in ``|f_eps(rho)| <= C rho^sigma`` for all ``rho >= 0``."""
        return abs(self.base.beta) * max(1.0, self.S_sigma())
