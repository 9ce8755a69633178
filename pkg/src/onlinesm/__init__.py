"""Online two-stage and multi-stage stable matching with minimal divorces."""
from .core import (
    CycleKind,
    DiffGraph,
    Instance,
    Matching,
    MultiStageProblem,
    Person,
    Side,
    TwoStageProblem,
    Variant,
    blocking_pairs,
    classify_components,
    diff_graph,
    divorces,
    is_stable,
    make_matching,
    men_dominates,
)
from .lattice import (
    build_rotation_poset,
    deferred_acceptance,
    enumerate_stable,
    max_weight_stable,
    men_optimal,
    women_optimal,
)
from .multistage import brute_force_multistage, greedy_chain, run_adversary_experiment
from .twostage import brute_force_optimum, dominance_transform, opt_two_stage

__version__ = "0.1.0"

__all__ = [
    "CycleKind",
    "DiffGraph",
    "Instance",
    "Matching",
    "MultiStageProblem",
    "Person",
    "Side",
    "TwoStageProblem",
    "Variant",
    "blocking_pairs",
    "brute_force_multistage",
    "brute_force_optimum",
    "build_rotation_poset",
    "classify_components",
    "deferred_acceptance",
    "diff_graph",
    "divorces",
    "dominance_transform",
    "enumerate_stable",
    "greedy_chain",
    "is_stable",
    "make_matching",
    "max_weight_stable",
    "men_dominates",
    "men_optimal",
    "opt_two_stage",
    "run_adversary_experiment",
    "women_optimal",
]
