"""Exact probabilistic explanations for decision-tree classifiers.

Error and precision of partial instances are computed as exact rationals,
so relevance tests at a threshold ``delta`` never suffer rounding.
"""
from .enumeration import (
    DualitySession,
    DualityVerdict,
    EnumerationResult,
    enumerate_min_duals,
    enumerate_min_idrs,
    minimal_hitting_sets,
    verify_duality,
)
from .estimator import IDRSExplainer, MinCardinalityExplainer
from .explain import (
    BudgetExhaustedError,
    DeletionStep,
    Explanation,
    IDRSCheck,
    InfeasibleSeedError,
    check_idrs,
    explain_instance,
    min_cardinality_drs,
    min_cdrs,
    min_idrs,
)
from .measure import (
    MeasureEngine,
    MeasureReport,
    epsilon,
    fix_probability,
    measure_report,
    partition_paths,
    path_measure,
    precision,
)
from .model import (
    DecisionTree,
    FeatureSpace,
    FeatureSpec,
    Instance,
    Path,
    TreeError,
    TreeSchemaError,
    TreeSyntaxError,
    TreeValidationError,
    classify,
    enumerate_paths,
    load_tree,
    parse_tree,
    serialize_tree,
    tree_from_dict,
    tree_to_dict,
    validate_tree,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExhaustedError",
    "DecisionTree",
    "DeletionStep",
    "DualitySession",
    "DualityVerdict",
    "EnumerationResult",
    "Explanation",
    "FeatureSpace",
    "FeatureSpec",
    "IDRSCheck",
    "IDRSExplainer",
    "InfeasibleSeedError",
    "Instance",
    "MeasureEngine",
    "MeasureReport",
    "MinCardinalityExplainer",
    "Path",
    "TreeError",
    "TreeSchemaError",
    "TreeSyntaxError",
    "TreeValidationError",
    "check_idrs",
    "classify",
    "enumerate_min_duals",
    "enumerate_min_idrs",
    "enumerate_paths",
    "epsilon",
    "explain_instance",
    "fix_probability",
    "load_tree",
    "measure_report",
    "min_cardinality_drs",
    "min_cdrs",
    "min_idrs",
    "minimal_hitting_sets",
    "parse_tree",
    "partition_paths",
    "path_measure",
    "precision",
    "serialize_tree",
    "tree_from_dict",
    "tree_to_dict",
    "validate_tree",
    "verify_duality",
    "example_tree",
]


def example_tree(name: str = "fig1") -> DecisionTree:
    """Load a tree bundled with the package (``fig1``, ``fig1_weighted``, ``random8``)."""
    from importlib.resources import files

    return parse_tree(files(__package__).joinpath("data", f"{name}.json").read_text(encoding="utf-8"))
