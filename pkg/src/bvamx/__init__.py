"""Pseudospectral simulation and bifurcation analysis of a two-species
reaction-diffusion model augmented with self- and cross-diffusion.

The pipeline: Fourier collocation on a periodic domain, RK4 time stepping
in Fourier space, Jacobian-free Newton-Krylov for steady states, single
shooting with Floquet analysis for periodic orbits, and naive parameter
continuation in the single control parameter C, tracing the route from
Turing patterns through Hopf bifurcations and period doubling to chaos.
"""

__version__ = "0.1.0"

from .model import (
    FieldPair,
    ModelParameters,
    REGIME_LABELS,
    chemical_potentials,
    energy,
    energy_dissipation_rhs,
    potential_jacobian,
    reaction_jacobian,
    reaction_terms,
    regime_parameters,
)
from .spectral import (
    DivergenceError,
    SpectralError,
    SpectralGrid,
    amplitude_spectrum,
    forward_transform,
    inverse_transform,
    rhs_fourier,
    spectral_laplacian,
    truncation_error_estimate,
)
from .integrate import IntegratorConfig, Trajectory, flow_map, integrate, rk4_step
from .equilibrium import (
    EquilibriumResult,
    StabilityReport,
    assemble_linearization,
    cosine_guess,
    laplacian_matrix,
    newton_krylov_solve,
    residual,
    stability_spectrum,
)
from .orbits import (
    DegenerateOrbitError,
    MonodromyResult,
    OrbitBifurcation,
    PeriodicOrbit,
    classify_orbit_bifurcation,
    monodromy_matrix,
    shooting_residual,
    solve_orbit,
)
from .continuation import (
    Branch,
    BranchPoint,
    ContinuationConfig,
    NoPeriodicityError,
    continue_equilibria,
    continue_orbits,
    hopf_seed_orbit,
)
from .diagnostics import (
    AttractorSample,
    ChaosReport,
    chaos_indicator,
    energy_attractor,
    export_attractor,
    export_branch,
    export_state,
    export_trajectory,
    local_attractor,
    read_state,
)
from .config import ConfigError, RunConfig, load_config, parse_config
from .cli import cli_dispatch
