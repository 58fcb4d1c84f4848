"""obslat: double obstacle problems on finite vector lattices.

Solve min E(u) over an order interval [lo, hi] for convex submodular
energies (graph Dirichlet forms, discrete fractional kernels), and verify
the solutions with machine-checkable Lewy-Stampacchia certificates.  On
graph-induced metric spaces, the same machinery builds cut-off functions
and regularized Kantorovich potentials with certified Laplacian bounds.
"""

from .certificates import (
    LSCertificate,
    certificate_report,
    free_set_harmonicity,
    harmonic_extension,
    laplacian_bound,
    lipschitz_ratio,
    ls_certificate,
    maximum_principle_check,
)
from .energies import (
    CheckResult,
    KernelEnergy,
    QuadraticEnergy,
    fractional_kernel_1d,
    graph_dirichlet,
    scalar_submodularity_inequality,
    submodularity_check,
    t_monotonicity_check,
    z_matrix_violation,
)
from .errors import (
    CertificateError,
    ConstructionError,
    DimensionMismatch,
    NondifferentiableError,
    ObslatError,
    ObstacleOrderError,
    PreconditionError,
    SolverError,
)
from .lattice import (
    UNBOUNDED,
    OrderInterval,
    as_vector,
    clamp,
    join,
    meet,
    negative_part,
    positive_part,
    rk_join,
    rk_meet,
)
from .metric import (
    FiniteMetricSpace,
    GraphSpace,
    PotentialPair,
    build_cutoff,
    c_transform,
    coincidence_cc_report,
    cutoff_obstacles,
    hopf_lax,
    interpolation_duality_check,
    is_c_concave,
    kantorovich_regularize,
    metric_space_from_json_dict,
)
from .solvers import (
    Solution,
    brute_force_active_set,
    classify_active,
    kkt_residual,
    solve_projected_gradient,
    solve_psor,
)
from .suite import run_suite

__version__ = "0.1.0"

__all__ = [
    "CertificateError",
    "CheckResult",
    "ConstructionError",
    "DimensionMismatch",
    "FiniteMetricSpace",
    "GraphSpace",
    "KernelEnergy",
    "LSCertificate",
    "NondifferentiableError",
    "ObslatError",
    "ObstacleOrderError",
    "OrderInterval",
    "PotentialPair",
    "PreconditionError",
    "QuadraticEnergy",
    "Solution",
    "SolverError",
    "UNBOUNDED",
    "as_vector",
    "brute_force_active_set",
    "build_cutoff",
    "c_transform",
    "certificate_report",
    "clamp",
    "classify_active",
    "coincidence_cc_report",
    "cutoff_obstacles",
    "fractional_kernel_1d",
    "free_set_harmonicity",
    "graph_dirichlet",
    "harmonic_extension",
    "hopf_lax",
    "interpolation_duality_check",
    "is_c_concave",
    "join",
    "kantorovich_regularize",
    "kkt_residual",
    "laplacian_bound",
    "lipschitz_ratio",
    "ls_certificate",
    "maximum_principle_check",
    "meet",
    "metric_space_from_json_dict",
    "negative_part",
    "positive_part",
    "rk_join",
    "rk_meet",
    "run_suite",
    "scalar_submodularity_inequality",
    "solve_projected_gradient",
    "solve_psor",
    "submodularity_check",
    "t_monotonicity_check",
    "z_matrix_violation",
]
