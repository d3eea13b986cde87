"""Shared fixtures: the calendar grammar, reference strings, and a
deterministic random-grammar generator used by the fuzz and oracle tests."""

from __future__ import annotations

import random

import pytest

from grammar_steer.errors import BudgetExceeded
from grammar_steer.grammar import (
    NT,
    Grammar,
    Repeat,
    Rule,
    SeqItem,
    SymbolSeq,
    T,
    parse_bnf,
    validate,
)
from grammar_steer.earley import enumerate_language

CALENDAR_BNF = """\
event ::= "CreateEvent(" constraint ")" | "QueryEvent(" constraint ")"
constraint ::= "(&" constraint constraint ")" | "(start_?" date time? ")" | "(attendee_?" attendee+ ")"
date ::= "Wednesday" | "Monday"
number ::= ("0".."9")+
time ::= "NumberAM(" number ")" | "NumberPM(" number ")"
attendee ::= "Bob" | "Carol" | "Jean" | "FindManager(" attendee ")"
"""

# the worked calendar exemplar: query, program, and its minimal grammar
EXEMPLAR_QUERY = "find the meeting on Wednesday with Bob and Carol"
EXEMPLAR_PROGRAM = "QueryEvent((& (start_? Wednesday) (attendee_? Bob Carol)))"
EXEMPLAR_GRAMMAR_BNF = """\
event ::= "QueryEvent(" constraint ")"
constraint ::= "(&" constraint constraint ")" | "(start_?" date ")" | "(attendee_?" attendee attendee ")"
date ::= "Wednesday"
attendee ::= "Bob" | "Carol"
"""

# the predicted-output panel for the test query (grammar, then program)
PANEL_GRAMMAR_BNF = """\
event ::= "CreateEvent(" constraint ")"
constraint ::= "(&" constraint constraint ")" | "(start_?" date time ")" | "(attendee_?" attendee ")"
date ::= "Wednesday"
time ::= "NumberPM(3)"
attendee ::= "FindManager(" attendee ")" | "Jean"
"""
PANEL_PROGRAM = "CreateEvent(& (start_? Wednesday NumberPM(3)) (attendee_? FindManager(Jean)))"


@pytest.fixture(scope="session")
def calendar():
    return parse_bnf(CALENDAR_BNF)


@pytest.fixture(scope="session")
def exemplar_grammar():
    return parse_bnf(EXEMPLAR_GRAMMAR_BNF)


_TERMINAL_POOL = ("a", "b", "c", "ab", "ba", "x(", ")", "zz")
_REPS = (Repeat.OPTIONAL, Repeat.STAR, Repeat.PLUS)


def random_grammar(
    rng: random.Random,
    max_rules: int = 8,
    max_alts: int = 4,
    rep_rate: float = 0.15,
) -> Grammar:
    """A random clean grammar: every nonterminal defined and productive,
    non-empty language, enumerable to length 12 within budget."""
    for _attempt in range(200):
        n_rules = rng.randint(1, max_rules)
        names = [f"n{i}" for i in range(n_rules)]
        rules = []
        for name in names:
            alts: list[SymbolSeq] = []
            for _ in range(rng.randint(1, max_alts)):
                items = []
                for _ in range(rng.randint(1, 3)):
                    if n_rules > 1 and rng.random() < 0.3:
                        sym = NT(rng.choice(names))
                    else:
                        sym = T(rng.choice(_TERMINAL_POOL))
                    rep = rng.choice(_REPS) if rng.random() < rep_rate else Repeat.ONCE
                    items.append(SeqItem(sym, rep))
                alt = SymbolSeq(tuple(items))
                if alt not in alts:
                    alts.append(alt)
            rules.append(Rule(NT(name), tuple(alts)))
        g = Grammar(tuple(rules), NT(names[0]))
        bad = {"undefined-nonterminal", "unproductive-nonterminal"}
        if any(d.kind in bad for d in validate(g)):
            continue
        try:
            members = enumerate_language(g, 12, node_budget=60_000)
        except BudgetExceeded:
            continue
        if members:
            return g
    raise AssertionError("random grammar generation failed to converge")


def random_nonmembers(rng: random.Random, g: Grammar, members: frozenset[str], count: int) -> list[str]:
    """Strings over the grammar's terminal fragments that are not members."""
    terminals = list(g.terminals()) or ["a"]
    out = []
    guard = 0
    while len(out) < count and guard < count * 50:
        guard += 1
        k = rng.randint(1, 5)
        s = "".join(rng.choice(terminals) for _ in range(k))[:12]
        if s and s not in members:
            out.append(s)
    return out
