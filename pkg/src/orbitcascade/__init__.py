"""Stability, simulation and data analysis of cascaded satellite collision avoidance."""
from .conjunction import (
    CdmRecord,
    ConjunctionGeometry,
    StateVector,
    collision_probability,
    is_high_risk,
    pc_monte_carlo,
    project_to_conjunction_plane,
)
from .errors import (
    DataError,
    DegenerateGeometryError,
    DomainError,
    HorizonError,
    InferenceError,
    NumericalError,
    OrbitCascadeError,
    PoleError,
    SingularityError,
)
from .orbital import (
    EquilibriumState,
    RingState,
    ShellConfig,
    equilibrium,
    mean_motion,
    walker_min_spacing,
)
from .simulator import (
    ManeuverEvent,
    Perturbation,
    SimConfig,
    SimResult,
    amplification_factor,
    derivative,
    inject_perturbation,
    run_cascade,
    step,
)
from .stability import (
    ComplexGain,
    PolicyParams,
    StabilityVerdict,
    bilateral_transfer_gain,
    blowup_horizon,
    capacity_bound,
    lifetime_time_of_nth,
    maneuver_count,
    max_real_part,
    ring_eigenvalues,
    safe_distance_bound,
    stability_verdict,
    sup_gain_imag_axis,
    transfer_gain,
)

__version__ = "0.1.0"

__all__ = [
    "CdmRecord",
    "ConjunctionGeometry",
    "StateVector",
    "collision_probability",
    "is_high_risk",
    "pc_monte_carlo",
    "project_to_conjunction_plane",
    "DataError",
    "DegenerateGeometryError",
    "DomainError",
    "HorizonError",
    "InferenceError",
    "NumericalError",
    "OrbitCascadeError",
    "PoleError",
    "SingularityError",
    "EquilibriumState",
    "RingState",
    "ShellConfig",
    "equilibrium",
    "mean_motion",
    "walker_min_spacing",
    "ManeuverEvent",
    "Perturbation",
    "SimConfig",
    "SimResult",
    "amplification_factor",
    "derivative",
    "inject_perturbation",
    "run_cascade",
    "step",
    "ComplexGain",
    "PolicyParams",
    "StabilityVerdict",
    "bilateral_transfer_gain",
    "blowup_horizon",
    "capacity_bound",
    "lifetime_time_of_nth",
    "maneuver_count",
    "max_real_part",
    "ring_eigenvalues",
    "safe_distance_bound",
    "stability_verdict",
    "sup_gain_imag_axis",
    "transfer_gain",
]
