"""Two-player grid reference game: engine, agents, simulator, and evaluation.

The package root re-exports the stable surface of each module so callers can
write ``from gridtalk import Scenario, Planner, evaluate_policy`` without
memorising the internal layout.
"""

from gridtalk.agents import (
    Agent,
    GreedyAgent,
    PipAgent,
    POLICY_NAMES,
    RandomAgent,
    make_agent,
)
from gridtalk.belief import (
    belief_marginals,
    format_marginals,
    literal_posterior,
    pragmatic_posterior,
    prior_vector,
)
from gridtalk.core import (
    COLORS,
    DIGITS,
    GRID_SHAPES,
    LETTERS,
    SHAPES,
    Click,
    GridObject,
    Message,
    PolicyDistribution,
    Role,
    Scenario,
    Turn,
    abandon_utility,
    action_universe,
    active_player,
    apply_action,
    is_terminal,
    legal_actions,
    parse_message,
    uniform_distribution,
    utility,
    validate_history,
)
from gridtalk.errors import (
    ContradictionError,
    GameError,
    GameOverError,
    GenerationError,
    MalformedHistoryError,
    PolicyUndefinedError,
    RuleViolationError,
    UnknownWordError,
)
from gridtalk.evaluation import (
    EvalReport,
    Outcome,
    Transcript,
    action_log_likelihood,
    action_rank,
    bootstrap_ci,
    canonicalize_message,
    evaluate_policy,
    filter_dataset,
    first_step_entropy,
    read_transcripts,
    score_stats,
    write_transcripts,
)
from gridtalk.baselines import greedy_policy, random_policy
from gridtalk.harness import (
    BatchResult,
    marginals_demo,
    render_marginals_demo,
    run_batch,
    run_game,
)
from gridtalk.planning import (
    ABLATIONS,
    FULL_CONFIG,
    PipConfig,
    Planner,
    ablation_config,
    expected_value,
    pip_policy,
)
from gridtalk.scenario_gen import check_criteria, generate, generate_many

__version__ = "0.1.0"

__all__ = [
    "ABLATIONS",
    "Agent",
    "BatchResult",
    "COLORS",
    "Click",
    "ContradictionError",
    "DIGITS",
    "EvalReport",
    "FULL_CONFIG",
    "GRID_SHAPES",
    "GameError",
    "GameOverError",
    "GenerationError",
    "GreedyAgent",
    "GridObject",
    "LETTERS",
    "MalformedHistoryError",
    "Message",
    "Outcome",
    "POLICY_NAMES",
    "PipAgent",
    "PipConfig",
    "Planner",
    "PolicyDistribution",
    "PolicyUndefinedError",
    "RandomAgent",
    "Role",
    "RuleViolationError",
    "SHAPES",
    "Scenario",
    "Transcript",
    "Turn",
    "UnknownWordError",
    "abandon_utility",
    "ablation_config",
    "action_log_likelihood",
    "action_rank",
    "action_universe",
    "active_player",
    "apply_action",
    "belief_marginals",
    "bootstrap_ci",
    "canonicalize_message",
    "check_criteria",
    "evaluate_policy",
    "expected_value",
    "filter_dataset",
    "first_step_entropy",
    "format_marginals",
    "generate",
    "generate_many",
    "greedy_policy",
    "is_terminal",
    "legal_actions",
    "literal_posterior",
    "make_agent",
    "marginals_demo",
    "parse_message",
    "pip_policy",
    "pragmatic_posterior",
    "prior_vector",
    "random_policy",
    "read_transcripts",
    "render_marginals_demo",
    "run_batch",
    "run_game",
    "score_stats",
    "uniform_distribution",
    "utility",
    "validate_history",
    "write_transcripts",
]
