"""Property tests: the chart engine against the brute-force enumeration
oracle, over randomly generated clean grammars."""

import random

import pytest

from conftest import random_grammar, random_nonmembers
from grammar_steer.earley import (
    Recognition,
    enumerate_language,
    linearize_derivation,
    longest_valid_prefix,
    parse,
    recognize,
    shortest_completion,
    valid_continuations,
)
from grammar_steer.errors import NotViable

MAX_LEN = 12


def _is_viable_by_oracle(s: str, members: frozenset[str], max_len: int) -> bool:
    return any(m == s or m.startswith(s) for m in members) if len(s) <= max_len else False


@pytest.mark.parametrize("seed", range(20))
def test_recognize_agrees_with_enumeration(seed):
    rng = random.Random(seed)
    g = random_grammar(rng)
    members = enumerate_language(g, MAX_LEN, node_budget=200_000)
    for s in members:
        assert recognize(s, g) is Recognition.COMPLETE, s
    for s in random_nonmembers(rng, g, members, 30):
        got = recognize(s, g)
        assert got is not Recognition.COMPLETE, (s, got)
        # non-members may still be viable prefixes; cross-check the claim
        if got is Recognition.INVALID and len(s) < MAX_LEN:
            assert not any(m.startswith(s) for m in members), s


@pytest.mark.parametrize("seed", range(12))
def test_prefix_is_viable_and_maximal(seed):
    rng = random.Random(1000 + seed)
    g = random_grammar(rng)
    members = enumerate_language(g, MAX_LEN, node_budget=200_000)
    probes = random_nonmembers(rng, g, members, 15) + [m + "##" for m in list(members)[:5]]
    from grammar_steer.earley.engine import boundary_analysis

    for s in probes:
        try:
            analysis = longest_valid_prefix(s, g)
        except Exception:
            continue
        p = analysis.prefix
        assert recognize(p, g) in (Recognition.COMPLETE, Recognition.VIABLE_PREFIX), (s, p)
        norm = " ".join(s.split())
        if p != norm:
            # maximality: one more character of s never reaches a further
            # terminal boundary (it may extend a mid-terminal match)
            deeper = boundary_analysis(norm[: len(p) + 1], g)
            assert len(deeper.prefix) <= len(p), (s, p, deeper.prefix)


@pytest.mark.parametrize("seed", range(12))
def test_continuations_sound_and_complete(seed):
    rng = random.Random(2000 + seed)
    g = random_grammar(rng)
    members = enumerate_language(g, MAX_LEN, node_budget=200_000)
    sample = sorted(members)[:10]
    prefixes = {""} | {m[: rng.randint(0, len(m))] for m in sample}
    for p in prefixes:
        try:
            conts = valid_continuations(p, g)
        except NotViable:
            continue
        for w in conts:
            assert recognize(p + w, g) is not Recognition.INVALID, (p, w)
        # completeness cross-check on the enumerated fragment
        for w in g.terminals():
            if len(p + w) <= MAX_LEN and _is_viable_by_oracle(p + w, members, MAX_LEN):
                assert w in conts, (p, w)


@pytest.mark.parametrize("seed", range(10))
def test_shortest_completion_minimal(seed):
    rng = random.Random(3000 + seed)
    g = random_grammar(rng)
    members = enumerate_language(g, MAX_LEN, node_budget=200_000)
    sample = sorted(members, key=len)[:6]
    for m in sample:
        p = m[: rng.randint(0, len(m))]
        try:
            got = shortest_completion(p, g)
        except NotViable:
            continue
        assert recognize(p + got, g) is Recognition.COMPLETE, (p, got)
        if len(p + got) <= MAX_LEN:
            shorter = [
                s for s in members if s.startswith(p) and len(s) < len(p) + len(got)
            ]
            assert not shorter, (p, got, shorter)


@pytest.mark.parametrize("seed", range(10))
def test_linearization_leaves_reproduce_input(seed):
    rng = random.Random(4000 + seed)
    g = random_grammar(rng)
    members = sorted(enumerate_language(g, 10, node_budget=200_000))[:8]
    for m in members:
        tree = parse(m, g)
        text = linearize_derivation(tree)
        assert text.count("[") == text.count("]")
        assert "".join(tree.leaves()).replace(" ", "") == m.replace(" ", "")


def test_backend_equivalence():
    """Pure and compiled kernels produce identical charts."""
    pytest.importorskip("grammar_steer.earley._ckernel")
    from grammar_steer.earley import _ckernel, _kernel
    from grammar_steer.earley._encode import encode, normalize

    rng = random.Random(99)
    for _ in range(12):
        g = random_grammar(rng)
        enc = encode(g, None)
        members = sorted(enumerate_language(g, 10, node_budget=200_000))[:6]
        probes = members + random_nonmembers(rng, g, frozenset(members), 10)
        for s in probes:
            text = normalize(s, enc.flexible)
            args = (
                enc.alt_lhs, enc.alt_rhs, enc.nt_alts, enc.terminals,
                enc.nullable, enc.start, enc.flexible, text,
            )
            a = _kernel.run(*args)
            b = _ckernel.run(*args)
            assert a.sets == b.sets
            assert a.completed == b.completed
            assert sorted(a.partials) == sorted(b.partials)
            assert a.max_pos == b.max_pos
