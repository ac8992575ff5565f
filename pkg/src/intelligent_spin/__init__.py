"""Intelligent spin states, exponential coherent packets on the sphere, and rigid-rotor revivals."""

from .angular_core import (
    CGKey,
    clebsch_gordan,
    legendre_table,
    log_factorial,
    operator_matrix,
    spherical_harmonic,
)
from .dynamics import (
    EvolutionClock,
    RevivalReport,
    autocorrelation,
    count_lumps,
    evolve,
    fractional_snapshot,
    revival_scan,
)
from .errors import (
    DegeneracyError,
    DomainError,
    EmptyPacketError,
    ParametrizationError,
    SingularEtaError,
    TruncationError,
)
from .intelligent_states import (
    IntelligentState,
    SqueezeParameter,
    StateClass,
    UncertaintyReport,
    build_nonnormal_operator,
    classify,
    expectations,
    radcliffe_eta,
    solve_intelligent,
    su2_generators,
)
from .wavepacket import (
    AngularWavePacket,
    SphereGrid,
    density_grid,
    family_member,
    parent_amplitude,
    parent_coefficients,
    partial_wave_table,
    raise_family,
    vplus,
)

__version__ = "0.1.0"
