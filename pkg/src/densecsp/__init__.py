"""Dense Max k-CSP approximation via conditioned linear-programming
relaxations, two-prover game transformations, information metrics, and
exact brute-force oracles, all at desk scale."""

from .csp import (
    Constraint,
    CspInstance,
    Density,
    density,
    make_instance,
    mix,
    random_3xor,
    random_fully_dense,
    random_instance,
    validate,
    value,
)
from .dksh import (
    DkshResult,
    Hypergraph,
    Partition,
    densest_k_subhypergraph,
    extract_subhypergraph,
    hypergraph_density,
    make_hypergraph,
    reduce_to_csp,
)
from .errors import CapExceeded, DenseCspError, InputError, InternalInvariantError
from .games import (
    GameStrategy,
    TwoProverGame,
    birthday_kcsp,
    birthday_repetition,
    clause_variable_game,
    edge_tail_estimate,
    game_value,
    is_projection,
    make_game,
    parallel_repetition,
)
from .hierarchy import (
    SacResult,
    SaSolution,
    build_sa_lp,
    check_consistency,
    condition,
    conditioned_correlation_sum,
    point_mass_solution,
    sa_value,
    solution_from_global,
    solve_sa,
    solve_sac,
)
from .info import (
    FiniteDistribution,
    JointDistribution,
    conditional_mutual_information,
    conditional_total_correlation,
    entropy,
    kl_divergence,
    mutual_information,
    solution_total_correlation,
    total_correlation,
)
from .lp import LinearProgram, LpOutcome, lp_format, maximize, solve_feasibility
from .oracle import OracleResult, exact_csp_opt, exact_densest, exact_game_value
from .rounding import (
    RoundingTrace,
    approximate,
    funcbound_lower,
    guaranteed_bound,
    independent_rounding,
)

__version__ = "0.1.0"
