# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled Earley chart kernel: same algorithm and result type as the
pure-Python kernel, with typed inner loops for the scan/predict/complete
cycle.  Selected automatically at import when the extension built."""

from collections import deque

from ._kernel import ChartResult


def run(alt_lhs, alt_rhs, nt_alts, terminals, nullable, start, flexible, text):
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t pos, st, target, tl, m, limit
    cdef int aid, alt, dot, origin, lhs, kind, val, tid, skip, do_space
    cdef bint flex = 1 if flexible else 0

    sets = {0: set()}
    waiting = {}
    completed = {}
    partials = []
    cdef Py_ssize_t max_pos = 0

    seed = sets[0]
    for aid in nt_alts[start]:
        seed.add((aid, 0, 0))

    for pos in range(n + 1):
        current = sets.get(pos)
        if not current:
            continue
        max_pos = pos
        wait_here = {}
        waiting[pos] = wait_here
        predicted = set()
        scans = []
        queue = deque(current)
        while queue:
            item = queue.popleft()
            alt = item[0]
            dot = item[1]
            origin = item[2]
            rhs = alt_rhs[alt]
            if dot == len(rhs):
                lhs = alt_lhs[alt]
                key = (lhs, origin)
                ends = completed.get(key)
                if ends is None:
                    ends = set()
                    completed[key] = ends
                if pos in ends:
                    continue
                ends.add(pos)
                parents = waiting[origin].get(lhs)
                if parents is not None:
                    for parent in parents:
                        adv = (parent[0], parent[1] + 1, parent[2])
                        if adv not in current:
                            current.add(adv)
                            queue.append(adv)
                continue
            sym = rhs[dot]
            kind = sym[0]
            val = sym[1]
            if kind == 0:  # nonterminal
                lst = wait_here.get(val)
                if lst is None:
                    wait_here[val] = [item]
                else:
                    lst.append(item)
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

        do_space = 1 if (flex and pos < n and text[pos] == " ") else 0
        for tid, item in scans:
            t = terminals[tid]
            tl = len(t)
            for skip in range(0, do_space + 1):
                st = pos + skip
                if text.startswith(t, st):
                    target = st + tl
                    adv = (item[0], item[1] + 1, item[2])
                    bucket = sets.get(target)
                    if bucket is None:
                        sets[target] = {adv}
                    else:
                        bucket.add(adv)
                else:
                    limit = tl if tl < (n - st) else (n - st)
                    m = 0
                    while m < limit and text[st + m] == t[m]:
                        m += 1
                    if m >= 1:
                        partials.append((st, m, tid, item[0], item[1], item[2]))

    sets = {p: s for p, s in sets.items() if s}
    return ChartResult(n, sets, completed, waiting, partials, max_pos)
