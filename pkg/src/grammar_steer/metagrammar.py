"""The grammar of serialized specialized grammars.

Its language is exactly the text forms of rule subsets of a source grammar:
blocks in source definition order (each optional, at least one present),
each block offering an ordered non-empty subset of that rule's alternatives,
where extended alternatives admit both their original text and fixed-count
instantiations up to a configured repetition bound.  Matching is byte-exact,
so recognizing a candidate under the metagrammar certifies it parses to a
subset of the source grammar.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from .earley import DerivationTree
from .errors import RepetitionBoundRequired
from .grammar import (
    NT,
    Grammar,
    Repeat,
    Rule,
    SymbolSeq,
    SeqItem,
    Symbol,
    T,
    concretize_alternative,
    format_alternative,
    parse_bnf,
)

ALT_SEPARATOR = " | "


@dataclass(frozen=True, slots=True)
class MetaGrammar:
    grammar: Grammar  # whitespace policy "exact"
    source: Grammar
    max_reps: int | None


def _alternative_variants(alt: SymbolSeq, max_reps: int | None) -> list[str]:
    """Text forms this alternative may take inside a specialized grammar."""
    if alt.is_concrete:
        return [format_alternative(alt)]
    if max_reps is None:
        raise RepetitionBoundRequired(
            "source grammar has extended alternatives; a repetition bound is required"
        )
    variants = [format_alternative(alt)]  # the extended rule may be kept as-is
    ranges = []
    for it in alt.items:
        if it.repeat is Repeat.ONCE:
            ranges.append((1,))
        elif it.repeat is Repeat.OPTIONAL:
            ranges.append((0, 1))
        elif it.repeat is Repeat.STAR:
            ranges.append(tuple(range(0, max_reps + 1)))
        else:
            ranges.append(tuple(range(1, max_reps + 1)))
    for counts in itertools.product(*ranges):
        concrete = concretize_alternative(alt, counts)
        text = format_alternative(concrete)
        if text not in variants:
            variants.append(text)
    return variants


def build_metagrammar(g_full: Grammar, max_reps: int | None = 8) -> MetaGrammar:
    """Construct the metagrammar for ``g_full``.

    Meta nonterminals are namespaced with ``__m_`` so they cannot collide
    with source rule names; alternatives of the source become multi-character
    terminals of the metagrammar.
    """
    if g_full.rules[0].lhs != g_full.start:
        raise ValueError("metagrammar construction expects the start rule to be defined first")
    rules: list[Rule] = []
    m = len(g_full.rules)

    def seq(*items: Symbol | tuple[Symbol, Repeat]) -> SymbolSeq:
        out = []
        for it in items:
            if isinstance(it, tuple):
                out.append(SeqItem(it[0], it[1]))
            else:
                out.append(SeqItem(it))
        return SymbolSeq(tuple(out))

    # block chain in definition order; every block is optional except the
    # start symbol's (a grammar without its start rule is not a grammar)
    start_idx = next(i for i, r in enumerate(g_full.rules) if r.lhs == g_full.start)
    for i in range(m):
        block = seq(NT(f"__m_rule_{i}"), NT(f"__m_opt_{i + 1}"))
        if i == start_idx:
            alts = [block]
        else:
            alts = [block, seq(NT(f"__m_opt_{i + 1}"))]
        rules.append(Rule(NT(f"__m_opt_{i}"), tuple(alts)))
    rules.append(Rule(NT(f"__m_opt_{m}"), (SymbolSeq(()),)))

    for i, rule in enumerate(g_full.rules):
        k = len(rule.alternatives)
        header = T(f"{rule.lhs.text} ::= ")
        rules.append(
            Rule(NT(f"__m_rule_{i}"), (seq(header, NT(f"__m_first_{i}_0"), T("\n")),))
        )
        # ordered non-empty subset of alternatives, joined by " | "
        for j in range(k):
            picked = seq(NT(f"__m_alt_{i}_{j}"), NT(f"__m_more_{i}_{j + 1}"))
            alts = [picked]
            if j + 1 < k:
                alts.append(seq(NT(f"__m_first_{i}_{j + 1}")))
            rules.append(Rule(NT(f"__m_first_{i}_{j}"), tuple(alts)))
        for j in range(1, k + 1):
            alts = []
            if j < k:
                alts.append(seq(T(ALT_SEPARATOR), NT(f"__m_alt_{i}_{j}"), NT(f"__m_more_{i}_{j + 1}")))
                alts.append(seq(NT(f"__m_more_{i}_{j + 1}")))
            else:
                alts.append(SymbolSeq(()))
            rules.append(Rule(NT(f"__m_more_{i}_{j}"), tuple(alts)))
        for j, alt in enumerate(rule.alternatives):
            variants = _alternative_variants(alt, max_reps)
            rules.append(
                Rule(
                    NT(f"__m_alt_{i}_{j}"),
                    tuple(seq(T(v)) for v in variants),
                )
            )

    meta = Grammar(tuple(rules), NT("__m_opt_0"), whitespace="exact")
    return MetaGrammar(grammar=meta, source=g_full, max_reps=max_reps)


@functools.lru_cache(maxsize=128)
def cached_metagrammar(g_full: Grammar, max_reps: int | None = 8) -> MetaGrammar:
    return build_metagrammar(g_full, max_reps)


def extract_grammar(meta_parse: DerivationTree) -> Grammar:
    """Grammar denoted by a metagrammar derivation (inverse of serialization)."""
    return parse_bnf("".join(meta_parse.leaves()))
