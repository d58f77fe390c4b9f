"""Exact minimum-cost two-way comparison decision trees.

Given distinct weighted integer values, overlapping classes covering
them, and a set of key values usable in tests, find the binary tree of
``< k`` / ``= k`` tests of minimum total weighted depth that classifies
every value correctly — in polynomial time.
"""

from .errors import (
    CostOverflowError,
    DtoptError,
    MalformedTreeError,
    ParseError,
    ResourceLimitError,
    ValidationError,
)
from .estimator import TwoWayDecisionTreeClassifier
from .fileio import parse_instance, parse_tree, print_instance, print_tree, to_dot
from .generator import generate_instance, generate_search_instance
from .model import (
    EQUAL,
    LESS,
    Instance,
    Internal,
    Leaf,
    Outcome,
    SearchResult,
    Test,
    VerifyReport,
    check_feasibility,
    derive_weight_rank,
    legal_tests,
    search,
    tree_cost,
    verify_tree,
)
from .oracle import subset_dp_cost, subset_dp_tree
from .signatures import (
    AdmissibleDictionary,
    Signature,
    canonicalize,
    enumerate_admissible,
    identify_leaves,
    is_admissible,
    set_of_signature,
    signature_of,
)
from .solver import (
    SolveMode,
    SolveResult,
    SolveStats,
    cost_of,
    greedy_baseline,
    solve,
    stage1_less_splits,
    stage2_eq_splits,
)
from .transforms import (
    PathDescriptor,
    check_laminarity,
    outcomes_consistent,
    outcomes_consistent_fast,
    prune_empty_branches,
    split_subtree,
    tests_equivalent,
    x_consistent_path,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleDictionary",
    "CostOverflowError",
    "DtoptError",
    "EQUAL",
    "Instance",
    "Internal",
    "LESS",
    "Leaf",
    "MalformedTreeError",
    "Outcome",
    "ParseError",
    "PathDescriptor",
    "ResourceLimitError",
    "SearchResult",
    "Signature",
    "SolveMode",
    "SolveResult",
    "SolveStats",
    "Test",
    "TwoWayDecisionTreeClassifier",
    "ValidationError",
    "VerifyReport",
    "canonicalize",
    "check_feasibility",
    "check_laminarity",
    "cost_of",
    "derive_weight_rank",
    "enumerate_admissible",
    "generate_instance",
    "generate_search_instance",
    "greedy_baseline",
    "identify_leaves",
    "is_admissible",
    "legal_tests",
    "outcomes_consistent",
    "outcomes_consistent_fast",
    "parse_instance",
    "parse_tree",
    "print_instance",
    "print_tree",
    "prune_empty_branches",
    "search",
    "set_of_signature",
    "signature_of",
    "solve",
    "split_subtree",
    "stage1_less_splits",
    "stage2_eq_splits",
    "subset_dp_cost",
    "subset_dp_tree",
    "tests_equivalent",
    "to_dot",
    "tree_cost",
    "verify_tree",
    "x_consistent_path",
]
