"""Integer-encoded grammar form consumed by the chart kernels.

The engine works on the desugared grammar (repetitions expanded into
auxiliary rules) with unproductive alternatives pruned away, so that a
non-empty item set is equivalent to "some extension of the input lies in
the language".  Pruning never changes the language: an alternative whose
remaining symbols cannot derive any terminal string contributes nothing.
"""

from __future__ import annotations

import functools

from ..grammar import AltRef, Grammar, RepExpansion, desugar_with_origins

TERM = 1
NONTERM = 0


class EncodedGrammar:
    """Kernel-ready view of a grammar.  Hashable by identity."""

    def __init__(self, grammar: Grammar, start_name: str | None = None):
        self.grammar = grammar
        self.flexible = grammar.whitespace == "flexible"
        desugared, _origins, aux_info = desugar_with_origins(grammar)
        self.desugared = desugared
        self.aux_info: dict[str, RepExpansion] = aux_info
        self.start_name = start_name or grammar.start.text
        if not desugared.has_rule(self.start_name):
            raise ValueError(f"no rule for start symbol {self.start_name}")

        self.nt_names: list[str] = [r.lhs.text for r in desugared.rules]
        self.nt_index: dict[str, int] = {n: i for i, n in enumerate(self.nt_names)}
        self.start: int = self.nt_index[self.start_name]

        productive = self._productive()
        term_index: dict[str, int] = {}
        alt_lhs: list[int] = []
        alt_rhs: list[tuple[tuple[int, int], ...]] = []
        alt_source: list[tuple[str, int]] = []  # (lhs name, desugared alt index)
        nt_alts: list[list[int]] = [[] for _ in self.nt_names]
        for r in desugared.rules:
            lhs_id = self.nt_index[r.lhs.text]
            for ai, alt in enumerate(r.alternatives):
                rhs: list[tuple[int, int]] = []
                keep = True
                for it in alt.items:
                    if it.symbol.is_terminal:
                        tid = term_index.setdefault(it.symbol.text, len(term_index))
                        rhs.append((TERM, tid))
                    else:
                        name = it.symbol.text
                        if name not in productive:
                            keep = False
                            break
                        rhs.append((NONTERM, self.nt_index[name]))
                if not keep:
                    continue
                aid = len(alt_lhs)
                alt_lhs.append(lhs_id)
                alt_rhs.append(tuple(rhs))
                alt_source.append((r.lhs.text, ai))
                nt_alts[lhs_id].append(aid)

        self.alt_lhs = tuple(alt_lhs)
        self.alt_rhs = tuple(alt_rhs)
        self.alt_source = tuple(alt_source)
        self.nt_alts = tuple(tuple(a) for a in nt_alts)
        self.terminals = tuple(term_index)
        self.nullable = self._nullable()
        self.empty_language = not self.nt_alts[self.start]
        self._min_strings: tuple[str | None, ...] | None = None

    def _productive(self) -> set[str]:
        defined = {r.lhs.text for r in self.desugared.rules}
        productive: set[str] = set()
        changed = True
        while changed:
            changed = False
            for r in self.desugared.rules:
                if r.lhs.text in productive:
                    continue
                for alt in r.alternatives:
                    if all(
                        it.symbol.is_terminal
                        or (it.symbol.text in productive and it.symbol.text in defined)
                        for it in alt.items
                    ):
                        productive.add(r.lhs.text)
                        changed = True
                        break
        return productive

    def _nullable(self) -> tuple[bool, ...]:
        nullable = [False] * len(self.nt_names)
        changed = True
        while changed:
            changed = False
            for aid, lhs in enumerate(self.alt_lhs):
                if nullable[lhs]:
                    continue
                if all(kind == NONTERM and nullable[val] for kind, val in self.alt_rhs[aid]):
                    nullable[lhs] = True
                    changed = True
        return tuple(nullable)

    def min_strings(self) -> tuple[str | None, ...]:
        """Per-nonterminal minimal derivable string, ties lexicographic."""
        if self._min_strings is not None:
            return self._min_strings
        best: list[str | None] = [None] * len(self.nt_names)

        def key(s: str) -> tuple[int, str]:
            return (len(s), s)

        changed = True
        while changed:
            changed = False
            for aid, lhs in enumerate(self.alt_lhs):
                parts = []
                ok = True
                for kind, val in self.alt_rhs[aid]:
                    if kind == TERM:
                        parts.append(self.terminals[val])
                    elif best[val] is not None:
                        parts.append(best[val])
                    else:
                        ok = False
                        break
                if not ok:
                    continue
                cand = "".join(parts)
                if best[lhs] is None or key(cand) < key(best[lhs]):
                    best[lhs] = cand
                    changed = True
        self._min_strings = tuple(best)
        return self._min_strings

    def source_alt_ref(self, alt_id: int) -> tuple[str, int]:
        return self.alt_source[alt_id]

    def original_alt_ref(self, lhs: str, desugared_index: int) -> AltRef | None:
        """AltRef into the source grammar, or None for auxiliary rules."""
        if lhs in self.aux_info:
            return None
        return AltRef(lhs, desugared_index)


@functools.lru_cache(maxsize=512)
def encode(grammar: Grammar, start_name: str | None = None) -> EncodedGrammar:
    return EncodedGrammar(grammar, start_name)


def normalize(text: str, flexible: bool) -> str:
    """Collapse whitespace runs to single spaces under the flexible policy."""
    if not flexible:
        return text
    return " ".join(text.split())
