from .engine import (
    PrefixAnalysis,
    Recognition,
    enumerate_language,
    longest_valid_prefix,
    recognize,
    shortest_completion,
    valid_continuations,
)
from .kernel import backend_name
from .trees import DerivationTree, linearize_derivation, parse

__all__ = [
    "DerivationTree",
    "PrefixAnalysis",
    "Recognition",
    "backend_name",
    "enumerate_language",
    "linearize_derivation",
    "longest_valid_prefix",
    "parse",
    "recognize",
    "shortest_completion",
    "valid_continuations",
]
