"""grammar-steer: specialized BNF grammars, grammar-augmented prompts, and
Earley-corrected constrained decoding against a pluggable LM gateway."""

from .grammar import (
    AltRef,
    Diagnostic,
    Grammar,
    Repeat,
    Rule,
    SeqItem,
    Symbol,
    SymbolSeq,
    desugar,
    is_subset,
    parse_bnf,
    serialize,
    validate,
)
from .earley import (
    DerivationTree,
    PrefixAnalysis,
    Recognition,
    enumerate_language,
    linearize_derivation,
    longest_valid_prefix,
    parse,
    recognize,
    shortest_completion,
    valid_continuations,
)

__version__ = "0.1.0"
