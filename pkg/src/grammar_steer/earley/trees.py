"""Derivation trees: reconstruction from the chart, and linearization.

Trees are expressed against the source grammar: auxiliary repetition rules
introduced by desugaring are flattened back into their owning alternative,
with per-item occurrence counts recording how extended operators were
instantiated.  Ambiguity is resolved deterministically: lowest alternative
index first, then leftmost (shortest-span-first) child splits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import NoParse
from ..grammar import AltRef, Grammar, Repeat
from ._encode import EncodedGrammar, NONTERM, TERM, encode, normalize
from .kernel import run_chart


@dataclass(frozen=True, slots=True)
class DerivationTree:
    """Interior node (``alt`` set) or terminal leaf (``text`` set)."""

    alt: AltRef | None = None
    text: str | None = None
    children: tuple[DerivationTree, ...] = ()
    # occurrence count per item of the owning alternative (1 for plain items)
    counts: tuple[int, ...] = ()
    ambiguous: bool = field(default=False, compare=False)

    @property
    def is_leaf(self) -> bool:
        return self.text is not None

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.text]
        out: list[str] = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def alt_refs(self) -> list[AltRef]:
        """Alternatives used, in first-use (pre-order) order, with repeats."""
        if self.is_leaf:
            return []
        out = [self.alt]
        for c in self.children:
            out.extend(c.alt_refs())
        return out


def leaf(text: str) -> DerivationTree:
    return DerivationTree(text=text)


class _Ambiguous(Exception):
    pass


class _Builder:
    """Reconstructs the first derivation from the completed-span index.

    Choice order: lowest alternative index, then smallest child span.  A
    zero-progress revisit of the same (nonterminal, span) on the current
    path is pruned, which both terminates unit-cycle grammars and never
    discards a finite derivation that has an acyclic variant.
    """

    def __init__(self, enc: EncodedGrammar, text: str, result):
        self.enc = enc
        self.text = text
        self.result = result
        self._ok: dict[tuple[int, int, int], _Node] = {}
        self._fail: set[tuple[int, int, int, int]] = set()
        self._active: set[tuple[int, int, int]] = set()
        self._count_memo: dict[tuple[int, int, int], int] = {}
        # bumped whenever a cyclic re-entry is pruned; results observed with
        # an unchanged counter are context-free and safe to memoize
        self._blocked = 0

    def _skips(self, i: int) -> tuple[int, ...]:
        if self.enc.flexible and i < len(self.text) and self.text[i] == " ":
            return (0, 1)
        return (0,)

    def derive(self, nt: int, i: int, j: int) -> "_Node | None":
        key = (nt, i, j)
        hit = self._ok.get(key)
        if hit is not None:
            return hit
        if key in self._active:
            self._blocked += 1
            return None
        self._active.add(key)
        try:
            for aid in self.enc.nt_alts[nt]:
                children = self.match_seq(aid, 0, i, j)
                if children is not None:
                    node = _Node(aid, children)
                    self._ok[key] = node
                    return node
            return None
        finally:
            self._active.discard(key)

    def match_seq(self, aid: int, k: int, i: int, j: int):
        key = (aid, k, i, j)
        if key in self._fail:
            return None
        before = self._blocked
        rhs = self.enc.alt_rhs[aid]
        if k == len(rhs):
            return [] if i == j else None
        kind, val = rhs[k]
        if kind == TERM:
            t = self.enc.terminals[val]
            for skip in self._skips(i):
                st = i + skip
                end = st + len(t)
                if end <= j and self.text.startswith(t, st):
                    rest = self.match_seq(aid, k + 1, end, j)
                    if rest is not None:
                        return [t] + rest
        else:
            for end in sorted(self.result.completed.get((val, i), ())):
                if end > j:
                    break
                child = self.derive(val, i, end)
                if child is None:
                    continue
                rest = self.match_seq(aid, k + 1, end, j)
                if rest is not None:
                    return [child] + rest
        if self._blocked == before:
            self._fail.add(key)
        return None

    # --- derivation counting (capped at 2) for the ambiguity note ----------

    def count(self, nt: int, i: int, j: int) -> int:
        key = (nt, i, j)
        if key in self._count_memo:
            return self._count_memo[key]
        if key in self._active:
            self._blocked += 1
            return 0  # cyclic re-entry adds no finite derivations here
        before = self._blocked
        self._active.add(key)
        try:
            total = 0
            for aid in self.enc.nt_alts[nt]:
                total += self.count_seq(aid, 0, i, j, 2 - total)
                if total >= 2:
                    break
            total = min(total, 2)
        finally:
            self._active.discard(key)
        if self._blocked == before or total >= 2:
            self._count_memo[key] = total
        return total

    def count_seq(self, aid: int, k: int, i: int, j: int, cap: int) -> int:
        if cap <= 0:
            return 0
        rhs = self.enc.alt_rhs[aid]
        if k == len(rhs):
            return 1 if i == j else 0
        kind, val = rhs[k]
        total = 0
        if kind == TERM:
            t = self.enc.terminals[val]
            for skip in self._skips(i):
                st = i + skip
                end = st + len(t)
                if end <= j and self.text.startswith(t, st):
                    total += self.count_seq(aid, k + 1, end, j, cap - total)
                    if total >= cap:
                        return cap
        else:
            for end in sorted(self.result.completed.get((val, i), ())):
                if end > j:
                    break
                ways = self.count(val, i, end)
                if ways:
                    rest = self.count_seq(aid, k + 1, end, j, 2)
                    total += ways * rest
                    if total >= cap:
                        return cap
        return min(total, cap)


class _Node:
    __slots__ = ("aid", "children")

    def __init__(self, aid: int, children: list):
        self.aid = aid
        self.children = children  # str leaves and _Node children


def _contract(enc: EncodedGrammar, node: _Node) -> DerivationTree:
    lhs, ds_index = enc.source_alt_ref(node.aid)
    ref = enc.original_alt_ref(lhs, ds_index)
    assert ref is not None, "auxiliary nodes are flattened by their owners"
    source_alt = enc.grammar.rule(lhs).alternatives[ds_index]
    children: list[DerivationTree] = []
    counts: list[int] = []
    for item, child in zip(source_alt.items, node.children):
        if item.repeat is Repeat.ONCE:
            children.append(_as_tree(enc, child))
            counts.append(1)
        else:
            reps = _collect_reps(enc, child)
            children.extend(_as_tree(enc, r) for r in reps)
            counts.append(len(reps))
    return DerivationTree(alt=ref, children=tuple(children), counts=tuple(counts))


def _as_tree(enc: EncodedGrammar, child) -> DerivationTree:
    if isinstance(child, str):
        return leaf(child)
    return _contract(enc, child)


def _collect_reps(enc: EncodedGrammar, aux: _Node) -> list:
    """Flatten the right-recursive auxiliary chain into its repeated items."""
    out: list = []
    node = aux
    while True:
        kids = node.children
        if not kids:
            return out
        out.append(kids[0])
        if len(kids) == 1:
            return out
        node = kids[1]


def parse(s: str, g: Grammar, start: str | None = None) -> DerivationTree:
    """Deterministic first derivation of ``s``; NoParse if not a member.

    When more than one derivation exists the returned root carries
    ``ambiguous=True`` as a note, not an error.
    """
    enc = encode(g, start)
    text = normalize(s, enc.flexible)
    result = run_chart(enc, text)
    if not result.is_complete(enc.start):
        raise NoParse(f"not a member of the language: {s!r}")
    builder = _Builder(enc, text, result)
    root = builder.derive(enc.start, 0, len(text))
    if root is None:
        raise NoParse(f"no derivation reconstructed for {s!r}")
    tree = _contract(enc, root)
    if builder.count(enc.start, 0, len(text)) > 1:
        tree = DerivationTree(
            alt=tree.alt, children=tree.children, counts=tree.counts, ambiguous=True
        )
    return tree


def linearize_derivation(t: DerivationTree) -> str:
    """Bracketed form ``[lhs child ...]`` with double-quoted terminal leaves."""
    if t.is_leaf:
        return '"' + t.text + '"'
    inner = " ".join(linearize_derivation(c) for c in t.children)
    return f"[{t.alt.lhs} {inner}]" if inner else f"[{t.alt.lhs}]"
