"""Hurricane trajectory clustering and temporal-association testing.

Parses HURDAT2 best-track data, registers storm tracks at a latitude
upcrossing, clusters them with cosine-barycentre k-means on the unit
sphere, and tests whether consecutive storms within a season fall in the
same cluster more often than chance allows.
"""

from .hurdat import (
    BadCoordinate,
    MalformedDataRow,
    MalformedHeader,
    NonMonotoneTime,
    ParseError,
    RowCountMismatch,
    Storm,
    TrackPoint,
    count_by_year,
    parse_hurdat2,
    serialize_hurdat2,
)
from .kmeans import (
    Clustering,
    GridMismatch,
    TooFewTrajectories,
    barycentre_trajectory,
    lloyd_kmeans,
    order_west_to_east,
    rms_distances,
    traj_distance,
)
from .registration import (
    CrossingSpec,
    EmptyOverlap,
    RegisteredTrajectory,
    crop_common,
    find_upcrossings,
    select_and_register,
)
from .sphere import (
    EARTH_RADIUS_KM,
    AntipodalError,
    DegenerateMean,
    DomainError,
    cosine_barycentre,
    cosine_energy,
    from_latlon,
    gc_distance,
    slerp,
    to_latlon,
)
from .stats import (
    DegenerateRow,
    LabelTable,
    NoYears,
    TestReport,
    ZeroVariance,
    build_label_table,
    conditional_moments,
    lag_agreement_counts,
    normal_test,
    partition_function,
    permutation_test,
    qq_data,
    run_statistic,
    run_statistic_decayed,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # hurdat
    "ParseError",
    "MalformedHeader",
    "MalformedDataRow",
    "RowCountMismatch",
    "BadCoordinate",
    "NonMonotoneTime",
    "TrackPoint",
    "Storm",
    "parse_hurdat2",
    "serialize_hurdat2",
    "count_by_year",
    # sphere
    "EARTH_RADIUS_KM",
    "DomainError",
    "AntipodalError",
    "DegenerateMean",
    "from_latlon",
    "to_latlon",
    "cosine_energy",
    "gc_distance",
    "slerp",
    "cosine_barycentre",
    # registration
    "CrossingSpec",
    "RegisteredTrajectory",
    "EmptyOverlap",
    "find_upcrossings",
    "select_and_register",
    "crop_common",
    # kmeans
    "Clustering",
    "GridMismatch",
    "TooFewTrajectories",
    "traj_distance",
    "barycentre_trajectory",
    "lloyd_kmeans",
    "order_west_to_east",
    "rms_distances",
    # stats
    "LabelTable",
    "TestReport",
    "DegenerateRow",
    "ZeroVariance",
    "NoYears",
    "build_label_table",
    "run_statistic",
    "run_statistic_decayed",
    "lag_agreement_counts",
    "conditional_moments",
    "normal_test",
    "permutation_test",
    "partition_function",
    "qq_data",
]
