"""
relaxjunction
=============

Steady-state electronic currents through non-interacting junctions attached
to finite reservoirs whose modes relax toward Fermi occupations (the
single-particle Lindblad / driven Liouville-von Neumann setting).

Provides the general trace-integral current, the identical-reservoir pole
sum, the Landauer and non-Markovian references, the large- and small-
relaxation asymptotes, and a brute-force steady-state oracle on the full
system + reservoir space.  Units: hbar = e = k_B = 1.
"""

from .analysis import (
    ConstantGamma,
    GammaOverN,
    SpacingGamma,
    SweepParameter,
    SweepSpec,
    gless_error_bound,
    gless_error_norm,
    landauer_convergence_report,
    run_sweep,
)
from .currents import (
    current_compact_integral,
    current_landauer_semiinfinite,
    current_large_gamma,
    current_nonmarkovian,
    current_pole_sum,
    current_small_gamma,
    current_trace_integral,
    effective_transmission,
    landauer_transmission,
    lead_self_energy_semiinfinite,
    transmission,
)
from .errors import (
    AccuracyError,
    ComputationError,
    ConsistencyError,
    DomainError,
    JunctionError,
    ModelError,
    StepSizeError,
    UsageError,
)
from .model import (
    ChainGeometry,
    CurrentResult,
    FermiParameters,
    JunctionModel,
    Lead,
    LeadAttachment,
    Method,
    ProportionalToSpacing,
    ReservoirMode,
    SystemHamiltonian,
    Uniform,
    build_single_site_junction,
    build_two_site_interference_junction,
    discretize_lead_chain,
    fermi,
)
from .oracle import (
    assemble_full_space,
    current_from_state,
    oracle_current,
    solve_steady_state,
    time_evolve,
)
from .quadrature import QuadratureConfig, integrate_omega
from .spectral import (
    LesserKind,
    g_mode_lesser,
    g_mode_ret,
    green_ret,
    self_energy_ret,
    spectral_density,
    verify_identical_reservoir_identity,
    verify_resolvent_identity,
    weighted_spectral_density,
)

__version__ = "0.1.0"
