"""Fair multi-attribute consensus ranking.

Aggregates a set of base rankings into one consensus ranking while keeping
every protected group's share of favorable pairwise outcomes within a
tunable threshold, per attribute and for the intersection of attributes.
Includes exact and polynomial aggregation methods, a swap-based repair
procedure, fairness metrics over exact rationals, and a seeded synthetic
ranking generator.
"""

from .consensus import (
    DEFAULT_MAX_EXACT_N,
    KemenySolution,
    borda,
    borda_streamed,
    copeland,
    fairness_sort_key,
    kemeny_exact,
    kemeny_weighted,
    pick_fairest,
    prefix_branch_and_bound,
    ranking_objective,
    schulze,
)
from .errors import (
    BudgetExceeded,
    DegenerateAttribute,
    DegenerateGroup,
    DegenerateIntersection,
    FairConsensusError,
    Infeasible,
    InconsistentCandidateSet,
    InstanceTooLarge,
    ParseError,
    RepairStalled,
    ScenarioUnreachable,
    UnknownAttribute,
)
from .fair import (
    PipelineResult,
    RepairTrace,
    brute_force_fair_kemeny,
    fair_kemeny,
    fair_pipeline,
    repair_ranking,
)
from .mallows import (
    MallowsConfig,
    ScenarioTargets,
    SplitMix64,
    build_scenario,
    derive_seed,
    iter_ranking_batches,
    mixed_block_modal,
    sample_mallows,
    scenario_targets,
)
from .metrics import (
    FairnessReport,
    FairnessSpec,
    arp,
    evaluate_fairness,
    favored_pair_counts,
    fpr,
    irp,
    kendall_tau,
    pd_loss,
    price_of_fairness,
)
from .model import (
    ALL,
    CandidateTable,
    GroupIndex,
    PrecedenceMatrix,
    Ranking,
    RankingSet,
    build_group_index,
    build_precedence_matrix,
    mixed_pair_count,
    ranking_from_indices,
    total_mixed_pair_count,
    total_pair_count,
)

__version__ = "0.1.0"

__all__ = [
    "ALL",
    "BudgetExceeded",
    "CandidateTable",
    "DEFAULT_MAX_EXACT_N",
    "DegenerateAttribute",
    "DegenerateGroup",
    "DegenerateIntersection",
    "FairConsensusError",
    "FairnessReport",
    "FairnessSpec",
    "GroupIndex",
    "Infeasible",
    "InconsistentCandidateSet",
    "InstanceTooLarge",
    "KemenySolution",
    "MallowsConfig",
    "ParseError",
    "PipelineResult",
    "PrecedenceMatrix",
    "Ranking",
    "RankingSet",
    "RepairStalled",
    "RepairTrace",
    "ScenarioTargets",
    "ScenarioUnreachable",
    "SplitMix64",
    "UnknownAttribute",
    "arp",
    "borda",
    "borda_streamed",
    "brute_force_fair_kemeny",
    "build_group_index",
    "build_precedence_matrix",
    "build_scenario",
    "copeland",
    "derive_seed",
    "evaluate_fairness",
    "fair_kemeny",
    "fair_pipeline",
    "fairness_sort_key",
    "favored_pair_counts",
    "fpr",
    "irp",
    "iter_ranking_batches",
    "kemeny_exact",
    "kemeny_weighted",
    "kendall_tau",
    "mixed_block_modal",
    "mixed_pair_count",
    "pd_loss",
    "pick_fairest",
    "prefix_branch_and_bound",
    "price_of_fairness",
    "ranking_from_indices",
    "ranking_objective",
    "repair_ranking",
    "sample_mallows",
    "scenario_targets",
    "schulze",
    "total_mixed_pair_count",
    "total_pair_count",
]
