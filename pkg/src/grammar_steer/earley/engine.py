"""Recognition, viable-prefix analysis, language enumeration, completion.

All operations are pure functions of (string, grammar) and are safe to call
concurrently.  Input strings are whitespace-normalized up front under the
flexible policy; returned prefixes are prefixes of the normalized string.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass

from ..errors import BudgetExceeded, EmptyLanguage, NotViable
from ..grammar import Grammar
from ._encode import EncodedGrammar, NONTERM, TERM, encode, normalize
from ._kernel import ChartResult
from .kernel import run_chart


class Recognition(enum.Enum):
    COMPLETE = "complete"
    VIABLE_PREFIX = "viable_prefix"
    INVALID = "invalid"


@dataclass(frozen=True, slots=True)
class PrefixAnalysis:
    """Longest boundary-viable prefix plus the whole terminals that may follow."""

    prefix: str
    continuations: frozenset[str]
    failure_index: int | None


def recognize(s: str, g: Grammar, start: str | None = None) -> Recognition:
    enc = encode(g, start)
    if enc.empty_language:
        return Recognition.INVALID
    text = normalize(s, enc.flexible)
    result = run_chart(enc, text)
    if result.is_complete(enc.start):
        return Recognition.COMPLETE
    if result.viable_end(enc.start):
        return Recognition.VIABLE_PREFIX
    return Recognition.INVALID


def _is_viable(enc: EncodedGrammar, text: str) -> bool:
    return run_chart(enc, text).viable_end(enc.start)


def _continuations_at(
    enc: EncodedGrammar, prefix: str, result: ChartResult, boundary: int
) -> frozenset[str]:
    """Terminals w with prefix+w viable.

    At a clean boundary every continuation must begin by scanning one of the
    terminals the item set expects there: an expected terminal itself is
    viable outright, a proper prefix of one leaves that scan mid-match
    (viable by dangling), and a terminal extending beyond one needs its own
    chart run.  A cut that is already mid-terminal falls back to checking
    every candidate.
    """
    if result.dangling_at(len(prefix)):
        return frozenset(w for w in enc.terminals if _is_viable(enc, prefix + w))
    ids = result.expected_terminal_ids(boundary, enc.alt_rhs)
    expected = [enc.terminals[t] for t in ids]
    out = set(expected)
    for w in enc.terminals:
        if w in out:
            continue
        if any(len(w) < len(t) and t.startswith(w) for t in expected):
            out.add(w)
        elif any(len(w) > len(t) and w.startswith(t) for t in expected):
            if _is_viable(enc, prefix + w):
                out.add(w)
    return frozenset(out)


def _analysis(s: str, g: Grammar, start: str | None, snap_dangling: bool) -> PrefixAnalysis:
    enc = encode(g, start)
    if enc.empty_language:
        raise EmptyLanguage("grammar generates no strings")
    text = normalize(s, enc.flexible)
    result = run_chart(enc, text)
    n = len(text)
    if result.viable_end(enc.start):
        at_boundary = n in result.sets or result.is_complete(enc.start)
        if at_boundary or not snap_dangling:
            boundary = n if n in result.sets else result.max_pos
            return PrefixAnalysis(text, _continuations_at(enc, text, result, boundary), None)
    p = result.max_pos
    prefix = text[:p]
    if enc.flexible and p < n and text[p] == " ":
        # stop after the junction separator so continuations append cleanly
        prefix = text[: p + 1]
    continuations = _continuations_at(enc, prefix, result, p)
    return PrefixAnalysis(prefix, continuations, len(prefix))


def longest_valid_prefix(s: str, g: Grammar, start: str | None = None) -> PrefixAnalysis:
    return _analysis(s, g, start, snap_dangling=False)


def boundary_analysis(s: str, g: Grammar, start: str | None = None) -> PrefixAnalysis:
    """Like longest_valid_prefix, but a viable input that stops mid-terminal
    is still snapped back to the last terminal boundary, so the returned
    continuations are never empty unless the prefix is a complete member.
    The correction loop extends prefixes with whole terminals, which needs
    exactly this."""
    return _analysis(s, g, start, snap_dangling=True)


def valid_continuations(prefix: str, g: Grammar, start: str | None = None) -> frozenset[str]:
    enc = encode(g, start)
    if enc.empty_language:
        raise NotViable("grammar generates no strings")
    text = normalize(prefix, enc.flexible)
    result = run_chart(enc, text)
    if not result.viable_end(enc.start):
        raise NotViable(f"not a viable prefix: {prefix!r}")
    boundary = len(text) if len(text) in result.sets else result.max_pos
    return _continuations_at(enc, text, result, boundary)


# ---------------------------------------------------------------------------
# Brute-force enumeration (the oracle the rest of the engine is tested against)


def enumerate_language(
    g: Grammar, max_len: int, node_budget: int = 500_000, start: str | None = None
) -> frozenset[str]:
    """Exactly the members of L(g) up to ``max_len`` characters.

    Breadth-first leftmost expansion of sentential forms with minimum-length
    pruning.  Under the flexible policy every optional-space variant of a
    terminal join is a distinct member and all are produced.
    """
    enc = encode(g, start)
    if enc.empty_language:
        return frozenset()
    min_str = enc.min_strings()
    min_len = [len(m) if m is not None else 0 for m in min_str]

    def form_min(form: tuple[tuple[int, int], ...]) -> int:
        total = 0
        for kind, val in form:
            total += len(enc.terminals[val]) if kind == TERM else min_len[val]
        return total

    out: set[str] = set()
    seen_forms: set[tuple] = set()
    frontier: list[tuple[tuple[int, int], ...]] = [
        enc.alt_rhs[aid] for aid in enc.nt_alts[enc.start]
    ]
    budget = node_budget

    while frontier:
        nxt: list[tuple[tuple[int, int], ...]] = []
        for form in frontier:
            budget -= 1
            if budget < 0:
                raise BudgetExceeded("enumeration frontier exceeded the node budget")
            if form in seen_forms or form_min(form) > max_len:
                continue
            seen_forms.add(form)
            idx = next((i for i, (k, _v) in enumerate(form) if k == NONTERM), None)
            if idx is None:
                _emit_joins(enc, form, max_len, out)
                continue
            nt = form[idx][1]
            for aid in enc.nt_alts[nt]:
                candidate = form[:idx] + enc.alt_rhs[aid] + form[idx + 1 :]
                if form_min(candidate) <= max_len:
                    nxt.append(candidate)
        frontier = nxt
    return frozenset(out)


def _emit_joins(enc: EncodedGrammar, form, max_len: int, out: set[str]):
    texts = [enc.terminals[val] for _k, val in form]
    if not texts:
        out.add("")
        return
    if not enc.flexible:
        joined = "".join(texts)
        if len(joined) <= max_len:
            out.add(joined)
        return
    acc = [texts[0]]
    for t in texts[1:]:
        nxt = []
        for s in acc:
            if len(s) + len(t) <= max_len:
                nxt.append(s + t)
            if len(s) + 1 + len(t) <= max_len:
                nxt.append(s + " " + t)
        acc = nxt
        if not acc:
            return
    out.update(s for s in acc if len(s) <= max_len)


# ---------------------------------------------------------------------------
# Shortest completion (decode-loop termination fallback)


def shortest_completion(prefix: str, g: Grammar, start: str | None = None) -> str:
    """Minimal-length s with prefix+s a member; ties broken lexicographically.

    Dijkstra over (nonterminal, origin) instances of the prefix chart: the
    cheapest text emitted after an instance completes follows parent edges
    from the chart's waiting lists, with edge weight the minimal yield of the
    parent's remaining symbols.  Completions are plain concatenations; the
    flexible policy never requires separator spaces.
    """
    enc = encode(g, start)
    if enc.empty_language:
        raise NotViable("grammar generates no strings")
    text = normalize(prefix, enc.flexible)
    result = run_chart(enc, text)
    if not result.viable_end(enc.start):
        raise NotViable(f"not a viable prefix: {prefix!r}")
    if result.is_complete(enc.start):
        return ""
    min_str = enc.min_strings()

    def rest_of(alt: int, dot: int) -> str:
        parts = []
        for kind, val in enc.alt_rhs[alt][dot:]:
            parts.append(enc.terminals[val] if kind == TERM else min_str[val])
        return "".join(parts)

    # up[(nt, origin)] = cheapest text emitted after that instance completes
    up: dict[tuple[int, int], tuple[int, str]] = {(enc.start, 0): (0, "")}
    heap: list[tuple[int, str, tuple[int, int]]] = [(0, "", (enc.start, 0))]
    children: dict[tuple[int, int], list[tuple[tuple[int, int], tuple[int, str]]]] = {}
    for pos, by_nt in result.waiting.items():
        for nt, waiters in by_nt.items():
            child = (nt, pos)
            for alt, dot, origin in waiters:
                tail = rest_of(alt, dot + 1)
                parent = (enc.alt_lhs[alt], origin)
                children.setdefault(parent, []).append((child, (len(tail), tail)))
    settled: set[tuple[int, int]] = set()
    while heap:
        length, suffix, node = heapq.heappop(heap)
        if node in settled:
            continue
        settled.add(node)
        for child, (wlen, wtext) in children.get(node, ()):
            cand = (length + wlen, wtext + suffix)
            if child not in up or cand < up[child]:
                up[child] = cand
                heapq.heappush(heap, (cand[0], cand[1], child))

    best: tuple[int, str] | None = None

    def offer(emitted: str, node: tuple[int, int]):
        nonlocal best
        got = up.get(node)
        if got is None:
            return
        cand = (len(emitted) + got[0], emitted + got[1])
        if best is None or cand < best:
            best = cand

    for item in result.sets.get(result.n, ()):
        alt, dot, origin = item
        offer(rest_of(alt, dot), (enc.alt_lhs[alt], origin))
    for st, m, tid, alt, dot, origin in result.partials:
        if st + m != result.n:
            continue
        remainder = enc.terminals[tid][m:]
        offer(remainder + rest_of(alt, dot + 1), (enc.alt_lhs[alt], origin))
    if best is None:
        raise NotViable(f"no completion found for {prefix!r}")
    return best[1]
