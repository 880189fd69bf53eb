"""Generalized diagonals, indexed partitions and periodic orbits in right-triangle and rhombus billiards."""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    DEFAULT_TOL,
    GeometryError,
    PlanarIsometry,
    Rhombus,
    RightTriangle,
    SideHit,
    Tolerances,
    VertexHit,
    ray_exit,
    reflect_across_segment,
    triangle_to_rhombus,
)
from .unfolding import (  # noqa: F401
    BudgetExceeded,
    GeneralizedDiagonal,
    complexity,
    count_P,
    count_Q,
    propagate_beams,
    trace_orbit,
)
from .triangle import triangle_complexity_bound_check  # noqa: F401
from .partition import (  # noqa: F401
    GoodInterval,
    IndexedPartition,
    build_partition,
    critical_gamma,
    find_good_interval,
    fit_growth_exponent,
    partition_diameter,
)
from .rotation import cf_expand, hitting_bound, hitting_exact, khintchin_diagnostic  # noqa: F401
from .development import (  # noqa: F401
    BeamInterval,
    DevPoint,
    OrbitCertificate,
    RotatedFamily,
    certificate_to_billiard_orbit,
    dev_step,
    evolve_interval,
    find_periodic_in_beam,
    gap_extents,
    inverse_step,
    lambda_measure,
)
from .drag import drag_orbit  # noqa: F401
