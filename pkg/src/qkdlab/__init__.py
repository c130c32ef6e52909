"""Certified BB84 keyrates from imperfect sources, plus an attack laboratory."""

from .attacks import (
    AttackDiagnostics,
    AttackIsometry,
    BoundCheck,
    OptimizationResult,
    PropagatedStates,
    ZvxFinding,
    apply_attack,
    break_zvx_search,
    build_tightness_attack,
    diagnostics,
    full_copy_attack,
    identity_attack,
    load_attack,
    minimize_conditional_entropy,
    minimize_fidelity,
    save_attack,
    swap_attack,
    verify_bounds,
)
from .bounds import (
    f2_phi,
    f_theta,
    fidelity_bound_arbitrary,
    fidelity_bound_qubit,
    fidelity_bound_qubit_dim2,
    fuchs_relation_check,
    g_alpha,
    helstrom_lower,
)
from .errors import (
    CertificationUnavailableError,
    DegenerateSourceError,
    DimensionError,
    DomainError,
    QkdLabError,
    ValidationError,
)
from .keyrate import (
    DisturbanceBounds,
    KeyrateReport,
    ObservedStats,
    entropy_bound_from_fidelity,
    keyrate_arbitrary,
    keyrate_qubit,
    keyrate_qubit_dim2,
    keyrate_uncertainty_comparison,
    minentropy_rate,
)
from .quantum import (
    BipartiteLabel,
    PureState,
    binary_entropy,
    fidelity,
    haar_random_isometry,
    optimal_distinguishing_unitary,
    partial_trace,
    trace_distance,
    trace_norm,
    von_neumann_entropy,
)
from .simulate import (
    DetectorSpec,
    RunConfig,
    RunResult,
    helstrom_detector,
    ideal_qubit_detector,
    round_generator,
    simulate,
    theoretical_rates,
)
from .source import (
    OverlapCharacterization,
    QubitSourceAngles,
    SourceSpec,
    build_qubit_source,
    compute_delta,
    compute_theta,
    extract_qubit_angles,
    ideal_bb84_source,
    load_source,
    save_source,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
