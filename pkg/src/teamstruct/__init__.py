"""Solvers and information-structure design for static LQ teams and games."""

from .errors import (
    InvalidInputError,
    NoUniqueSolutionError,
    SchemaError,
    TeamstructError,
    TooLargeError,
)
from .model import (
    CandidateLink,
    CandidateSet,
    Channel,
    EstimationGain,
    GaussianPrior,
    InformationStructure,
    Modification,
    TeamObjective,
    TeamStrategy,
    apply_modification,
    conditional_mean,
    posterior_gain,
)
from .team_solver import (
    TeamProblem,
    monte_carlo_value,
    optimal_team_value,
    solve_team,
    solve_team_with_diagnostics,
    team_residuals,
    team_value,
)
from .game_solver import (
    GameObjective,
    GameProblem,
    GameStrategy,
    best_response_blue,
    best_response_red,
    game_residuals,
    game_values,
    nash_values,
    solve_game,
    solve_game_with_diagnostics,
    zero_sum_game,
    zero_sum_values,
)
from .design import (
    DesignProblem,
    DesignResult,
    SupermodularityReport,
    check_supermodularity,
    evaluate_modification,
    exhaustive_design,
    greedy_design,
)
from .experiments import (
    BenchmarkConfig,
    ExperimentStats,
    TrialRecord,
    aggregate_records,
    benchmark_records,
    counterexample_instance,
    random_instance,
    run_benchmark,
)

__version__ = "0.1.0"
