"""Exact solvers for hybrid discrete/continuous maximal covering location.

Place a fixed number of facilities per type -- some chosen from finite
candidate sites, some anywhere in the plane (or R^d under L2) -- to maximize
the total weight of demand points within coverage radius.  Includes a lazy
branch-and-cut over an incompatibility formulation, a finite candidate-set
formulation, sequential baselines, an exhaustive oracle and a benchmark
harness.
"""

from .bench import BenchmarkRow, aggregate_rows, aggregate_to_csv, rows_to_csv, run_benchmark
from .errors import (
    CapabilityError,
    CapacityError,
    ContractError,
    HybridCoverError,
    InputError,
    SolverError,
)
from .figures import emit_svg
from .geometry import (
    L1,
    L2,
    LINF,
    TOL,
    Ball,
    FeasibilityCertificate,
    NormSpec,
    circle_boundary_intersection,
    cluster_feasible,
    distance,
    min_enclosing_ball,
)
from .instance_io import (
    emit_instance,
    emit_solution,
    generate_instance,
    instance_from_csv,
    parse_instance,
    parse_solution,
)
from .milp import BnBResult, Constraint, LinearModel, SolveLimits, branch_and_bound, solve_lp
from .model import (
    Assignment,
    ContinuousTypeSpec,
    Cut,
    DiscreteTypeSpec,
    Instance,
    Solution,
    add_symmetry_breaking,
    build_bips,
    build_bips_ip,
    build_incomplete_ip,
    coverage_table,
    evaluate,
    make_instance,
)
from .separation import (
    CutPool,
    certify_cluster,
    filter_dominated,
    initial_cut_pool,
    separate,
    two_wise_cuts,
)
from .solvers import (
    SolveOptions,
    SolveReport,
    SolveStats,
    brute_force,
    recover_centers,
    solve_bips,
    solve_bnc,
    solve_sequential,
)

__version__ = "0.1.0"
