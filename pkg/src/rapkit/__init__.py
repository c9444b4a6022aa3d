"""Solvers for the robust assignment problem on bipartite multigraphs."""

from rapkit.decompose import (
    ConvexCombination,
    DecomposeError,
    birkhoff_decompose,
    make_combination,
    sample,
)
from rapkit.ear import (
    Ear,
    EarDecomposition,
    ear_decomposition,
    format_ears,
    parse_ear_order,
    solve_ear,
)
from rapkit.exact import BnbConfig, ExactError, lower_bounds, solve_exact
from rapkit.graph_core import (
    BipartiteMultigraph,
    Component,
    GraphError,
    Matching,
    allowed_edges,
    components,
    has_pm_avoiding,
    matching_covered_components,
    max_matching,
)
from rapkit.instance import (
    NOMINAL_SCENARIO,
    Certificate,
    InfeasibleSolutionError,
    InstanceError,
    InstanceMapping,
    RapInstance,
    Solution,
    balanced_completion,
    check_feasible,
    format_instance,
    format_solution,
    is_feasible_set,
    make_instance,
    parse_instance,
    parse_solution,
    prune_to_minimal,
    solution_for,
    uniform_instance,
    uniformize,
    verify_solution,
)
from rapkit.lp import FractionalSolution, LpError, RapLp, build_lp, dump_lp, solve_lp
from rapkit.reductions import (
    VARIANTS,
    ReducedInstance,
    SetCoverInstance,
    decode_cover,
    format_reduced,
    format_set_cover,
    from_set_cover,
    from_snpp,
    gk_family,
    make_set_cover,
    parse_set_cover,
    random_instance,
)
from rapkit.rounding import (
    IterationRecord,
    RoundPlan,
    RoundTrace,
    format_trace,
    prepare,
    solve_lp_round,
)

__all__ = [
    "BipartiteMultigraph",
    "BnbConfig",
    "Certificate",
    "Component",
    "ConvexCombination",
    "DecomposeError",
    "Ear",
    "EarDecomposition",
    "ExactError",
    "FractionalSolution",
    "GraphError",
    "InfeasibleSolutionError",
    "InstanceError",
    "InstanceMapping",
    "IterationRecord",
    "LpError",
    "Matching",
    "NOMINAL_SCENARIO",
    "RapInstance",
    "RapLp",
    "ReducedInstance",
    "RoundPlan",
    "RoundTrace",
    "SetCoverInstance",
    "Solution",
    "VARIANTS",
    "allowed_edges",
    "balanced_completion",
    "birkhoff_decompose",
    "build_lp",
    "check_feasible",
    "components",
    "decode_cover",
    "dump_lp",
    "ear_decomposition",
    "format_ears",
    "format_instance",
    "format_reduced",
    "format_set_cover",
    "format_solution",
    "format_trace",
    "from_set_cover",
    "from_snpp",
    "gk_family",
    "has_pm_avoiding",
    "is_feasible_set",
    "lower_bounds",
    "make_combination",
    "make_instance",
    "make_set_cover",
    "matching_covered_components",
    "max_matching",
    "parse_ear_order",
    "parse_instance",
    "parse_set_cover",
    "parse_solution",
    "prepare",
    "prune_to_minimal",
    "random_instance",
    "sample",
    "solution_for",
    "solve_ear",
    "solve_exact",
    "solve_lp",
    "solve_lp_round",
    "uniform_instance",
    "uniformize",
    "verify_solution",
]
