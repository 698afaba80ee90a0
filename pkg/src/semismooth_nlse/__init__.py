"""Time-splitting sine pseudospectral solver for the nonlinear Schroedinger
equation ``i psi_t = -psi_xx + V psi + beta |psi|^(2 sigma) psi`` on an
interval with homogeneous Dirichlet boundary conditions.
"""

__version__ = "0.1.0"

from .grid import (  # noqa: E402
    ConfigurationError,
    Grid1D,
    NodalField,
    SpectralField,
    build_grid,
    dst_analyze,
    dst_synthesize,
    evaluate_series,
    h1_norm,
    h1_seminorm,
    l2_norm,
    lp_norm_nodal,
    truncate_to,
)
from .nonlinearity import RegularizedNonlinearity, SemiSmoothNonlinearity, gen_binom  # noqa: E402
from .propagators import (  # noqa: E402
    Potential,
    Scheme,
    SimulationState,
    SplitConfig,
    evolve,
    kinetic_flow,
    phase_flow,
    strang_step,
    tssp_step,
    tssp_step_alt,
)
from .observables import energy, error_norms, mass  # noqa: E402
