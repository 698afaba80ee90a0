"""Conserved quantities, error norms and discrete difference operators."""

from __future__ import annotations

import csv
import io
from dataclasses import astuple, dataclass, fields

import numpy as np

from .grid import (
    ConfigurationError,
    NodalField,
    SpectralField,
    dst_analyze,
    dst_synthesize,
    embed_into,
    h1_seminorm,
    l2_norm,
    lp_norm_nodal,
)
from .nonlinearity import SemiSmoothNonlinearity
from .propagators import Potential

__all__ = [
    "ObservableRecord",
    "mass",
    "energy",
    "error_norms",
    "forward_diff",
    "central_second_diff",
    "norm_equivalence_check",
    "gagliardo_nirenberg_ratio",
    "embedding_ratio",
    "records_to_csv",
    "records_from_csv",
]


@dataclass(frozen=True)
class ObservableRecord:
    time: float
    mass: float
    energy: float
    l2: float = float("nan")
    h1: float = float("nan")
    linf: float = float("nan")


def mass(v: NodalField) -> float:
    """``int |I_N v|^2 dx``, exact by Parseval."""
    return l2_norm(dst_analyze(v)) ** 2


def energy(v: NodalField, pot: Potential, nl: SemiSmoothNonlinearity) -> float:
    """Discrete energy: spectral kinetic term plus node sums for V and F."""
    if pot.grid != v.grid:
        raise ConfigurationError("field and potential live on different grids")
    kinetic = h1_seminorm(dst_analyze(v)) ** 2
    rho = np.abs(v.interior) ** 2
    local = v.grid.h * np.sum(pot.values[1:-1] * rho + nl.F(rho))
    return float(kinetic + local)


def error_norms(numeric: NodalField, reference: SpectralField):
    """L2, H1 and nodal max errors of ``I_N numeric`` against a reference series.

    The reference may live on a finer grid of the same interval; the numeric
    interpolant is embedded exactly into the reference space before taking
    differences.  The max error is taken at the numeric grid's nodes.
    """
    coarse, fine = numeric.grid, reference.grid
    if not fine.refines(coarse):
        raise ConfigurationError(
            f"reference grid N={fine.N} does not refine numeric grid N={coarse.N}"
        )
    diff = reference - embed_into(dst_analyze(numeric), fine)
    l2 = l2_norm(diff)
    h1 = float(np.hypot(l2, h1_seminorm(diff)))
    stride = fine.N // coarse.N
    ref_nodes = dst_synthesize(reference).values[::stride]
    linf = float(np.max(np.abs(numeric.values - ref_nodes)))
    return l2, h1, linf


def forward_diff(v: NodalField) -> np.ndarray:
    """``(v_{j+1} - v_j) / h`` for ``j = 0 .. N-1``."""
    return np.diff(v.values) / v.grid.h


def central_second_diff(v: NodalField) -> np.ndarray:
    """``(v_{j+1} - 2 v_j + v_{j-1}) / h^2`` for ``j = 1 .. N-1``."""
    w = v.values
    return (w[2:] - 2.0 * w[1:-1] + w[:-2]) / v.grid.h**2


def _l2_discrete(seq, h: float) -> float:
    return float(np.sqrt(h * np.sum(np.abs(seq) ** 2)))


def norm_equivalence_check(phi: SpectralField, rtol: float = 1e-12):
    """Check ``|d+ phi|_l2 <= |(I_N phi)'|_L2 <= (pi/2) |d+ phi|_l2``.

    Returns ``(lhs, mid, rhs, passed)``.
    """
    v = dst_synthesize(phi)
    lhs = _l2_discrete(forward_diff(v), phi.grid.h)
    mid = h1_seminorm(phi)
    rhs = 0.5 * np.pi * lhs
    passed = lhs <= mid * (1 + rtol) and mid <= rhs * (1 + rtol)
    return lhs, mid, rhs, bool(passed)


def gagliardo_nirenberg_ratio(v: NodalField) -> float:
    """``|v|_l4 / (|v|_l2^(3/4) |d+ v|_l2^(1/4))``; a monitored quantity."""
    dv = _l2_discrete(forward_diff(v), v.grid.h)
    den = lp_norm_nodal(v, 2) ** 0.75 * dv**0.25
    return float(lp_norm_nodal(v, 4) / den) if den > 0 else 0.0


def embedding_ratio(phi: SpectralField) -> float:
    """``|d+ phi|_l4 / |phi|_H2``; a monitored quantity."""
    g = phi.grid
    d = forward_diff(dst_synthesize(phi))
    l4 = float((g.h * np.sum(np.abs(d) ** 4)) ** 0.25)
    w = phi.coefficients
    mu = g.frequencies
    h2 = np.sqrt(0.5 * g.length * np.sum((1 + mu**2 + mu**4) * np.abs(w) ** 2))
    return l4 / h2 if h2 > 0 else 0.0


_CSV_FIELDS = [f.name for f in fields(ObservableRecord)]


def records_to_csv(records, metadata: dict | None = None) -> str:
    """CSV text with header ``time,mass,energy,l2,h1,linf``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_CSV_FIELDS)
    for r in records:
        w.writerow([repr(float(x)) for x in astuple(r)])
    if metadata:
        buf.write("# " + " ".join(f"{k}={v}" for k, v in metadata.items()) + "\n")
    return buf.getvalue()


def records_from_csv(text: str) -> list[ObservableRecord]:
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.DictReader(rows)
    return [ObservableRecord(**{k: float(v) for k, v in row.items()}) for row in reader]
