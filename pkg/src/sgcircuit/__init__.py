"""Sine-Gordon description of a Josephson-junction array with SQUID sites.

Maps circuit parameters to the field theory, enumerates the exact
excitation spectrum, evaluates edge profiles and supercurrents, solves the
classical static problem on the continuum and on the lattice, and searches
the design space for a large boundary/bulk breather separation.
"""

from .design import (
    DesignCandidate,
    DesignSpace,
    ParamRange,
    SweepResult,
    breather_separation,
    evaluate_design,
    optimize_delta,
    sweep,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DegeneracyNotFoundError,
    DomainError,
    GaplessRegimeError,
    SgCircuitError,
    UnsupportedPhaseError,
)
from .mapping import (
    CircuitParams,
    Margin,
    Phase,
    RegimeReport,
    SgParams,
    classify_phase,
    map_circuit_to_sg,
    sg_params,
    validate_regime,
)
from .profiles import (
    CurrentProfile,
    EdgeProfile,
    FilterWarning,
    GroundState,
    Regime,
    current_profile,
    edge_profile,
    sigma_accumulation,
)
from .solver import (
    Branch,
    BvpSolution,
    ContinuumComparison,
    LatticeMode,
    LatticeState,
    Scheme,
    compare_lattice_to_continuum,
    edge_decay_rate,
    relax_lattice,
    solve_continuum_kink,
    solve_lattice_ground_states,
)
from .spectrum import (
    GroundManifoldAlgebra,
    SpectrumCatalog,
    StabilityReport,
    bulk_breather_masses,
    boundary_breather_energies,
    enumerate_spectrum,
    ground_manifold_algebra,
    midgap_separation,
    mott_cdw_stability,
    soliton_mass,
)

__version__ = "0.1.0"
