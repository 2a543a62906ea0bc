"""Multi-scale clustering from systems of neighbourhoods in extended pseudo-metric spaces."""

from .epspace import EPS, INF, EpSpace, Surjection, amalgamate, coproduct, quotient, validate, wedge
from .estimators import NeighborhoodClustering
from .exceptions import (
    AxiomViolation,
    ConfigError,
    DomainError,
    EmptyInputError,
    EnumerationLimitError,
    EpClusterError,
    InsufficientPointsError,
    NotSubcomplexError,
    ShapeError,
)
from .filtration import FilteredGraph, MergeTree, merge_tree, pi0, ray_complex, rips_graph
from .neighborhoods import Neighborhood, NeighborhoodSystem, k_complete, k_complete_system
from .patch import WeightedRaySystem, global_metric, verify_excision

__version__ = "0.1.0"

__all__ = [
    "EPS",
    "INF",
    "AxiomViolation",
    "ConfigError",
    "DomainError",
    "EmptyInputError",
    "EnumerationLimitError",
    "EpClusterError",
    "EpSpace",
    "FilteredGraph",
    "InsufficientPointsError",
    "MergeTree",
    "Neighborhood",
    "NeighborhoodClustering",
    "NeighborhoodSystem",
    "NotSubcomplexError",
    "ShapeError",
    "Surjection",
    "WeightedRaySystem",
    "amalgamate",
    "coproduct",
    "global_metric",
    "k_complete",
    "k_complete_system",
    "merge_tree",
    "pi0",
    "quotient",
    "ray_complex",
    "rips_graph",
    "validate",
    "verify_excision",
    "wedge",
]
