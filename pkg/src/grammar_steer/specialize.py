"""Minimal specialized grammars: the rules a program actually uses.

Specializing a program against the full grammar keeps exactly the
alternatives on its (deterministic first) derivation, with extended
alternatives instantiated to the occurrence counts actually used.  The
result satisfies two properties: the program is a member of the specialized
grammar's language, and removing any single alternative breaks membership.
"""

from __future__ import annotations

from dataclasses import dataclass

from .earley import Recognition, parse, recognize
from .errors import NoParse
from .grammar import AltRef, Grammar, Rule, SymbolSeq, concretize_alternative


@dataclass(frozen=True, slots=True)
class SpecializationResult:
    grammar: Grammar
    used_alts: frozenset[AltRef]
    # extended alternative -> instantiation count tuples seen on the derivation
    concretized: dict[AltRef, tuple[tuple[int, ...], ...]]


def specialize(y: str, g_full: Grammar, keep_extended: bool = False) -> SpecializationResult:
    """Derive the minimal specialized grammar of ``y`` under ``g_full``.

    Rules and alternatives keep the full grammar's definition order (the
    same canonical order the metagrammar enforces, so specialized grammars
    are always members of the metagrammar's language); a concretized
    alternative sits in its source alternative's position.  With
    ``keep_extended`` the original extended alternative is kept instead of
    its fixed-count instantiation.
    """
    if recognize(y, g_full) is not Recognition.COMPLETE:
        raise NoParse(f"program is not a member of the full grammar: {y!r}")
    tree = parse(y, g_full)

    used: set[AltRef] = set()
    concretized: dict[AltRef, list[tuple[int, ...]]] = {}

    def visit(node):
        if node.is_leaf:
            return
        ref: AltRef = node.alt
        used.add(ref)
        if not ref.resolve(g_full).is_concrete:
            counts = concretized.setdefault(ref, [])
            if node.counts not in counts:
                counts.append(node.counts)
        for child in node.children:
            visit(child)

    visit(tree)

    rules = []
    for rule in g_full.rules:
        alts: list[SymbolSeq] = []
        for idx, alt in enumerate(rule.alternatives):
            ref = AltRef(rule.lhs.text, idx)
            if ref not in used:
                continue
            if ref in concretized and not keep_extended:
                for counts in concretized[ref]:
                    out = concretize_alternative(alt, counts)
                    if out not in alts:
                        alts.append(out)
            elif alt not in alts:
                alts.append(alt)
        if alts:
            rules.append(Rule(rule.lhs, tuple(alts)))
    grammar = Grammar(tuple(rules), g_full.start, whitespace=g_full.whitespace)
    return SpecializationResult(
        grammar=grammar,
        used_alts=frozenset(used),
        concretized={ref: tuple(counts) for ref, counts in concretized.items()},
    )


def check_property1(spec: SpecializationResult, y: str) -> bool:
    """The program is a member of its specialized grammar's language."""
    return recognize(y, spec.grammar) is Recognition.COMPLETE


def check_property2(spec: SpecializationResult, y: str) -> bool:
    """No single alternative can be removed without losing the program.

    Removing an alternative may empty its rule, in which case the whole rule
    is dropped; dropping the start rule trivially breaks membership.
    """
    g = spec.grammar
    for rule_idx, rule in enumerate(g.rules):
        for alt_idx in range(len(rule.alternatives)):
            reduced = _remove_alternative(g, rule_idx, alt_idx)
            if reduced is None:
                continue  # start rule emptied: removal certainly breaks y
            if recognize(y, reduced) is Recognition.COMPLETE:
                return False
    return True


def _remove_alternative(g: Grammar, rule_idx: int, alt_idx: int) -> Grammar | None:
    rules = []
    for i, rule in enumerate(g.rules):
        if i != rule_idx:
            rules.append(rule)
            continue
        alts = rule.alternatives[:alt_idx] + rule.alternatives[alt_idx + 1 :]
        if alts:
            rules.append(Rule(rule.lhs, alts))
        elif rule.lhs == g.start:
            return None
    return Grammar(tuple(rules), g.start, whitespace=g.whitespace)
