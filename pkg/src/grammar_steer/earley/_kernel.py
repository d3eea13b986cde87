"""Pure-Python Earley chart kernel.

Scannerless over characters with multi-character terminal scans: item sets
exist only at terminal-boundary positions, so the furthest populated set is
by construction the longest boundary-viable prefix.  Under the flexible
whitespace policy a single space may optionally separate two terminals.

Nullable nonterminals are handled by eager advance at prediction time
(Aycock-Horspool), which covers every zero-width completion because every
terminal is at least one character wide.
"""

from __future__ import annotations

from collections import deque


class ChartResult:
    __slots__ = ("n", "sets", "completed", "waiting", "partials", "max_pos")

    def __init__(self, n, sets, completed, waiting, partials, max_pos):
        self.n = n
        self.sets = sets  # pos -> set of (alt, dot, origin)
        self.completed = completed  # (lhs, origin) -> set of end positions
        self.waiting = waiting  # pos -> nt -> list of items expecting nt
        self.partials = partials  # (scan_start, matched, tid, alt, dot, origin)
        self.max_pos = max_pos

    def is_complete(self, start: int) -> bool:
        ends = self.completed.get((start, 0))
        return ends is not None and self.n in ends

    def dangling_at(self, cut: int) -> bool:
        """True when some terminal scan was mid-match at position ``cut``."""
        for st, m, _tid, _a, _d, _o in self.partials:
            if st < cut <= st + m:
                return True
        return False

    def viable_end(self, start: int) -> bool:
        return self.is_complete(start) or self.n in self.sets or self.dangling_at(self.n)

    def expected_terminal_ids(self, pos: int, alt_rhs) -> set[int]:
        out = set()
        for alt, dot, _origin in self.sets.get(pos, ()):
            rhs = alt_rhs[alt]
            if dot < len(rhs):
                kind, val = rhs[dot]
                if kind == 1:
                    out.add(val)
        return out


def run(alt_lhs, alt_rhs, nt_alts, terminals, nullable, start, flexible, text):
    n = len(text)
    sets: dict[int, set] = {0: set()}
    waiting: dict[int, dict[int, list]] = {}
    completed: dict[tuple[int, int], set[int]] = {}
    partials: list[tuple[int, int, int, int, int, int]] = []
    max_pos = 0

    for aid in nt_alts[start]:
        sets[0].add((aid, 0, 0))

    for pos in range(n + 1):
        current = sets.get(pos)
        if not current:
            continue
        max_pos = pos
        wait_here: dict[int, list] = {}
        waiting[pos] = wait_here
        predicted: set[int] = set()
        scans: list[tuple[int, tuple[int, int, int]]] = []
        queue = deque(current)
        while queue:
            item = queue.popleft()
            alt, dot, origin = item
            rhs = alt_rhs[alt]
            if dot == len(rhs):
                lhs = alt_lhs[alt]
                ends = completed.setdefault((lhs, origin), set())
                if pos in ends:
                    continue
                ends.add(pos)
                for parent in waiting[origin].get(lhs, ()):
                    adv = (parent[0], parent[1] + 1, parent[2])
                    if adv not in current:
                        current.add(adv)
                        queue.append(adv)
                continue
            kind, val = rhs[dot]
            if kind == 0:  # nonterminal
                wait_here.setdefault(val, []).append(item)
                if val not in predicted:
                    predicted.add(val)
                    for aid in nt_alts[val]:
                        cand = (aid, 0, pos)
                        if cand not in current:
                            current.add(cand)
                            queue.append(cand)
                if nullable[val]:
                    adv = (alt, dot + 1, origin)
                    if adv not in current:
                        current.add(adv)
                        queue.append(adv)
            else:
                scans.append((val, item))

        space_here = flexible and pos < n and text[pos] == " "
        for tid, item in scans:
            t = terminals[tid]
            tl = len(t)
            for skip in ((0, 1) if space_here else (0,)):
                st = pos + skip
                if text.startswith(t, st) and st + tl <= n:
                    target = st + tl
                    adv = (item[0], item[1] + 1, item[2])
                    bucket = sets.get(target)
                    if bucket is None:
                        sets[target] = {adv}
                    else:
                        bucket.add(adv)
                else:
                    limit = min(tl, n - st)
                    m = 0
                    while m < limit and text[st + m] == t[m]:
                        m += 1
                    if m >= 1:
                        partials.append((st, m, tid, item[0], item[1], item[2]))

    # drop empty buckets so "pos in sets" means a live boundary
    sets = {p: s for p, s in sets.items() if s}
    return ChartResult(n, sets, completed, waiting, partials, max_pos)
