"""Bipartite export networks, product recommendation, fitness ranking, and
counterfactual basket simulations."""

from .counterfactual import (
    CounterfactualReport,
    Scenario,
    apply_recommendations,
    evaluate_scenario,
    tier_report,
    virtual_network,
    virtual_report,
)
from .diffusion import (
    ALGORITHMS,
    RecommendationList,
    ScoreMatrix,
    degree_increase_scores,
    degree_scores,
    heats_matrix,
    heats_scores,
    probs_matrix,
    probs_scores,
    recommend_all,
    score_matrix,
    top_l,
    tprobs_scores,
)
from .errors import ConfigError, ConvergenceError, DataError, ScenarioSkipped, TradefitError
from .evaluation import EvaluationRun, new_exports, precision_recall, sweep
from .fitness import (
    FitnessResult,
    TierAssignment,
    assign_tiers,
    complexity_step,
    fitness_step,
    solve_fitness,
)
from .output import VERSION as __version__
from .trade_graph import (
    BipartiteSnapshot,
    ExportTable,
    RcaMatrix,
    build_snapshot,
    build_snapshots,
    compute_rca,
    load_exports,
    load_snapshot,
    save_snapshot,
)

__all__ = [
    "ALGORITHMS",
    "BipartiteSnapshot",
    "ConfigError",
    "ConvergenceError",
    "CounterfactualReport",
    "DataError",
    "EvaluationRun",
    "ExportTable",
    "FitnessResult",
    "RcaMatrix",
    "RecommendationList",
    "Scenario",
    "ScenarioSkipped",
    "ScoreMatrix",
    "TierAssignment",
    "TradefitError",
    "apply_recommendations",
    "assign_tiers",
    "build_snapshot",
    "build_snapshots",
    "complexity_step",
    "compute_rca",
    "degree_increase_scores",
    "degree_scores",
    "evaluate_scenario",
    "fitness_step",
    "heats_matrix",
    "heats_scores",
    "load_exports",
    "load_snapshot",
    "new_exports",
    "precision_recall",
    "probs_matrix",
    "probs_scores",
    "recommend_all",
    "save_snapshot",
    "score_matrix",
    "solve_fitness",
    "sweep",
    "tier_report",
    "top_l",
    "tprobs_scores",
    "virtual_network",
    "virtual_report",
]
