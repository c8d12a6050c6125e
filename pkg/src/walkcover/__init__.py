"""walkcover: covered-disc statistics of planar simple random walks.

The package simulates nearest-neighbour walks on the square lattice and
measures how discs get covered: the largest fully covered disc around
the origin and anywhere, multiplicity-k and multi-walk variants, the
waiting time for fresh territory, multiscale excursion counts, and the
exact potential-theory oracles (Green functions, hitting probabilities,
exit times) the asymptotics are checked against.
"""

from .cover import (
    CoveredDiscResult,
    CoverField,
    cover_time,
    distance_field,
    inside_covered_disc,
    largest_covered_disc,
    largest_covered_disc_multi,
    new_site_times,
    origin_covered_radius,
    origin_covered_radius_sq,
    v_after,
    v_at_samples,
    v_of_n,
)
from .edt import squared_distance_transform
from .errors import (
    DivergentTransformError,
    IncompleteTraceError,
    InsufficientDataError,
    InsufficientPathError,
    InvalidThresholdError,
    MalformedFileError,
    SaturationError,
    SnapshotFormatError,
    StepBudgetExceeded,
    WalkcoverError,
)
from .excursions import (
    CountWindowSchedule,
    ExcursionTrace,
    RadiiSchedule,
    annulus_levels,
    count_excursions,
    factorial_radii,
    is_multi_successful,
    is_successful,
    pack_region,
    scale_index,
    sluggish_target_count,
    successful,
    successful_multi,
    successful_verdict,
    target_count,
    visits_during_excursions,
    visits_within_excursions,
    window_schedule,
)
from .geometry import (
    bounding_box,
    closed_radius_threshold,
    disc_boundary,
    disc_offsets,
    disc_sites,
    dist_sq,
    open_radius_threshold,
)
from .harness import (
    RunConfig,
    RunRecord,
    estimate_exponent,
    export_csv,
    import_csv,
    multiplicity_sweep,
    run_ensemble,
    survival_vs_limit,
)
from .occupancy import VisitGrid
from .potential import (
    DiscOracle,
    approx_hit_center,
    disc_oracle,
    exact_expected_exit_time,
    exact_green,
    exact_hit_prob,
    export_oracle_csv,
    geometric_visit_law,
    green_origin_values,
    hit_before_exit_prob,
    laplace_visits,
    tail_rate,
    tail_rate_numeric,
    visit_shortfall_bound,
)
from .rng import replica_seed
from .walk import (
    ExitRecord,
    Walk,
    default_step_budget,
    direction_counts,
    exit_time_batch,
    walk_positions,
)

__version__ = "0.1.0"

__all__ = [
    "CountWindowSchedule",
    "CoverField",
    "CoveredDiscResult",
    "DiscOracle",
    "DivergentTransformError",
    "ExcursionTrace",
    "ExitRecord",
    "IncompleteTraceError",
    "InsufficientDataError",
    "InsufficientPathError",
    "InvalidThresholdError",
    "MalformedFileError",
    "RadiiSchedule",
    "RunConfig",
    "RunRecord",
    "SaturationError",
    "SnapshotFormatError",
    "StepBudgetExceeded",
    "VisitGrid",
    "Walk",
    "WalkcoverError",
    "annulus_levels",
    "approx_hit_center",
    "bounding_box",
    "closed_radius_threshold",
    "count_excursions",
    "cover_time",
    "default_step_budget",
    "direction_counts",
    "disc_boundary",
    "disc_offsets",
    "disc_oracle",
    "disc_sites",
    "dist_sq",
    "distance_field",
    "estimate_exponent",
    "exact_expected_exit_time",
    "exact_green",
    "exact_hit_prob",
    "exit_time_batch",
    "export_csv",
    "export_oracle_csv",
    "factorial_radii",
    "geometric_visit_law",
    "green_origin_values",
    "hit_before_exit_prob",
    "import_csv",
    "inside_covered_disc",
    "is_multi_successful",
    "is_successful",
    "laplace_visits",
    "largest_covered_disc",
    "largest_covered_disc_multi",
    "multiplicity_sweep",
    "new_site_times",
    "open_radius_threshold",
    "origin_covered_radius",
    "origin_covered_radius_sq",
    "pack_region",
    "replica_seed",
    "run_ensemble",
    "scale_index",
    "sluggish_target_count",
    "squared_distance_transform",
    "successful",
    "successful_multi",
    "successful_verdict",
    "survival_vs_limit",
    "target_count",
    "tail_rate",
    "tail_rate_numeric",
    "v_after",
    "v_at_samples",
    "v_of_n",
    "visit_shortfall_bound",
    "visits_during_excursions",
    "visits_within_excursions",
    "walk_positions",
    "window_schedule",
]
