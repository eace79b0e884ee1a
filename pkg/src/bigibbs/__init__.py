"""Two-species Gibbs point processes in bounded windows.

Simulation via birth-death Metropolis chains driven by single-point
insertion costs, exact small-instance oracles (rejection sampling and
truncated expansions), and Monte Carlo verification of the integral
identities that define the law.
"""

__version__ = "0.1.0"

from .analysis import (
    EstimateWithError,
    IdentityReport,
    TestFunction,
    check_ruelle_bound,
    estimate_correlation,
    estimate_marginal_correlation,
    verify_cm_full,
    verify_cm_minus,
    verify_cm_plus,
    verify_ruelle,
)
from .energy import (
    LogDensity,
    PairPotential,
    PotentialModel,
    R_full,
    R_minus,
    R_plus,
    hard_core,
    no_interaction,
    phi_sum,
    r_full,
    r_minus,
    r_plus,
    soft_core,
    step_potential,
)
from .errors import (
    BiGibbsError,
    CoincidentPoint,
    DuplicatePoint,
    InfeasibleBoundary,
    NotNonnegativeModel,
    ParseError,
    SubwindowNotContained,
    ValidationError,
    WrongArity,
)
from .geometry import (
    Configuration,
    Point,
    TwoComponentConfiguration,
    Window,
    check_disjoint,
    empty_two_component,
    project,
    pt,
    union_disjoint,
)
from .intensity import IntensityMeasure, draw_sigma_point, mass, sample_poisson
from .oracle import (
    OracleResult,
    SeriesTruncation,
    exact_correlation,
    partition_function,
    rejection_sample,
    rejection_sample_batch,
)
from .randomness import RngState
from .sampler import ChainSpec, ChainState, init, run, run_detailed, step

__all__ = [name for name in dir() if not name.startswith("_")]
