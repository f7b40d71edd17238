"""Optimal antipodal lawn colorings of the sphere for the grasshopper problem.

The library discretizes the sphere into antipodal point pairs, expresses the
grasshopper success probability as a fixed-range Ising energy over lawn
colorings, and anneals it under the conserved equal-area constraint.  Both
the single-lawn setup (one coloring scored against itself) and the two-lawn
setup (independent colorings) are supported, along with cog counting,
reflection-symmetry checks, and jump-angle sweeps that quantify the gap to
the quantum bound cos^2(theta/2).
"""

from .grid import (
    GridError,
    SphericalGrid,
    generate_fibonacci_antipodal,
    geodesic_angle,
    load_grid,
    save_grid,
)
from .kernel import (
    DEFAULT_KERNEL,
    KERNEL_SHAPES,
    DeltaKernel,
    GridMismatchError,
    InteractionTable,
    ResolutionError,
    admissible_theta_range,
    build_interaction,
    load_table,
    save_table,
)
from .lawn import (
    Lawn,
    TwoLawnConfig,
    apply_pair_toggle,
    cogwheel_lawn,
    complement,
    delta_pair_toggle,
    hemisphere_lawn,
    load_lawn,
    random_lawn,
    save_lawn,
    success_probability_one,
    success_probability_two,
)
from .anneal import (
    AnnealResult,
    AnnealSchedule,
    CheckpointError,
    anneal,
    default_schedule,
    replica_search,
)
from .analysis import (
    COG_CONFIDENCE_THRESHOLD,
    CurveRow,
    ProbabilityCurve,
    boundary_sites,
    classified_cogs,
    count_cogs,
    default_sweep_thetas,
    gap_maximizer_landmark,
    hemisphere_probability,
    one_lawn_initializers,
    predicted_cogs,
    quantum_probability,
    read_curve_csv,
    special_angles,
    sweep,
    two_lawn_initializers,
    verify_reflection_symmetry,
    write_curve_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealResult",
    "AnnealSchedule",
    "COG_CONFIDENCE_THRESHOLD",
    "CheckpointError",
    "CurveRow",
    "DEFAULT_KERNEL",
    "DeltaKernel",
    "GridError",
    "GridMismatchError",
    "InteractionTable",
    "KERNEL_SHAPES",
    "Lawn",
    "ProbabilityCurve",
    "ResolutionError",
    "SphericalGrid",
    "TwoLawnConfig",
    "admissible_theta_range",
    "anneal",
    "apply_pair_toggle",
    "boundary_sites",
    "build_interaction",
    "classified_cogs",
    "cogwheel_lawn",
    "complement",
    "count_cogs",
    "default_schedule",
    "default_sweep_thetas",
    "delta_pair_toggle",
    "gap_maximizer_landmark",
    "generate_fibonacci_antipodal",
    "geodesic_angle",
    "hemisphere_lawn",
    "hemisphere_probability",
    "load_grid",
    "load_lawn",
    "load_table",
    "one_lawn_initializers",
    "predicted_cogs",
    "quantum_probability",
    "random_lawn",
    "read_curve_csv",
    "replica_search",
    "save_grid",
    "save_lawn",
    "save_table",
    "special_angles",
    "success_probability_one",
    "success_probability_two",
    "sweep",
    "two_lawn_initializers",
    "verify_reflection_symmetry",
    "write_curve_csv",
]
