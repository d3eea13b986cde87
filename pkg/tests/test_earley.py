"""Recognition, parsing, prefix analysis, enumeration, completion."""

import pytest

from conftest import EXEMPLAR_PROGRAM
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
from grammar_steer.earley.engine import boundary_analysis
from grammar_steer.errors import EmptyLanguage, NoParse, NotViable
from grammar_steer.grammar import parse_bnf


class TestRecognize:
    def test_exemplar_program_under_its_minimal_grammar(self, exemplar_grammar):
        assert recognize(EXEMPLAR_PROGRAM, exemplar_grammar) is Recognition.COMPLETE

    def test_empty_string_is_viable_prefix(self):
        assert recognize("", parse_bnf('s ::= "a"')) is Recognition.VIABLE_PREFIX

    def test_invalid_inside_attendee(self, calendar):
        # a name that no attendee terminal can start
        s = "QueryEvent((& (start_? Wednesday) (attendee_? Zelda)))"
        assert recognize(s, calendar) is Recognition.INVALID

    def test_partial_terminal_is_viable(self):
        assert recognize("a", parse_bnf('s ::= "ab"')) is Recognition.VIABLE_PREFIX

    def test_whitespace_flexibility(self, calendar):
        spaced = "QueryEvent( (&  (start_?   Wednesday)  (attendee_? Bob Carol) ) )"
        compact = "QueryEvent((&(start_?Wednesday)(attendee_?Bob Carol)))"
        assert recognize(spaced, calendar) is Recognition.COMPLETE
        assert recognize(compact, calendar) is Recognition.COMPLETE

    def test_trailing_junk_is_invalid(self):
        assert recognize("ab", parse_bnf('s ::= "a"')) is Recognition.INVALID

    def test_empty_language(self):
        g = parse_bnf("s ::= s")
        assert recognize("", g) is Recognition.INVALID
        assert recognize("a", g) is Recognition.INVALID

    def test_alternate_start_symbol(self, calendar):
        assert recognize("(attendee_? Bob)", calendar, start="constraint") is Recognition.COMPLETE


class TestParse:
    def test_exemplar_uses_exactly_its_minimal_rules(self, calendar, exemplar_grammar):
        tree = parse(EXEMPLAR_PROGRAM, exemplar_grammar)
        used = {(r.lhs, r.alt_index) for r in tree.alt_refs()}
        expected = {
            (r.lhs.text, i)
            for r in exemplar_grammar.rules
            for i in range(len(r.alternatives))
        }
        assert used == expected

    def test_single_leaf(self):
        tree = parse("a", parse_bnf('s ::= "a"'))
        assert tree.leaves() == ["a"]

    def test_right_leaning_first_alternative(self):
        tree = parse("aa", parse_bnf('s ::= "a" s | "a"'))
        assert tree.alt.alt_index == 0
        assert tree.leaves() == ["a", "a"]
        assert tree.children[1].alt.alt_index == 1
        assert not tree.ambiguous

    def test_noparse_raised(self):
        with pytest.raises(NoParse):
            parse("b", parse_bnf('s ::= "a"'))

    def test_ambiguity_note(self):
        g = parse_bnf('s ::= "a" | a2 ;; a2 ::= "a"')
        tree = parse("a", g)
        assert tree.ambiguous
        assert tree.alt.alt_index == 0  # deterministic first derivation

    def test_counts_record_concretization(self, calendar):
        tree = parse("(attendee_? Bob Carol)", calendar, start="constraint")
        assert tree.counts == (1, 2, 1)

    def test_leaf_concatenation_matches_input(self, calendar):
        tree = parse(EXEMPLAR_PROGRAM, calendar)
        assert "".join(tree.leaves()).replace(" ", "") == EXEMPLAR_PROGRAM.replace(" ", "")


class TestLinearize:
    def test_nested_attendee_subtree(self, calendar):
        tree = parse("(attendee_? FindManager(Jean))", calendar, start="constraint")
        assert (
            linearize_derivation(tree)
            == '[constraint "(attendee_?" [attendee "FindManager(" [attendee "Jean"] ")"] ")"]'
        )

    def test_single_leaf_tree(self):
        tree = parse("a", parse_bnf('s ::= "a"'))
        assert linearize_derivation(tree) == '[s "a"]'

    def test_bracket_count_equals_interior_nodes(self, calendar, exemplar_grammar):
        tree = parse(EXEMPLAR_PROGRAM, exemplar_grammar)

        def interior(t):
            return 0 if t.is_leaf else 1 + sum(interior(c) for c in t.children)

        text = linearize_derivation(tree)
        assert text.count("[") == interior(tree)
        assert text.count("[") == text.count("]")


class TestLongestValidPrefix:
    def test_corrupted_attendee_snaps_to_head(self, calendar):
        s = "QueryEvent((& (start_? Wednesday) (attendee_? Janet Lee)))"
        analysis = longest_valid_prefix(s, calendar)
        assert analysis.prefix == "QueryEvent((& (start_? Wednesday) (attendee_? "
        assert analysis.prefix.endswith("(attendee_? ")
        assert analysis.continuations == frozenset({"Bob", "Carol", "Jean", "FindManager("})
        assert analysis.failure_index == len(analysis.prefix)

    def test_member_is_its_own_prefix(self, calendar):
        analysis = longest_valid_prefix(EXEMPLAR_PROGRAM, calendar)
        assert analysis.prefix == EXEMPLAR_PROGRAM
        assert analysis.failure_index is None

    def test_unmatchable_first_character(self):
        analysis = longest_valid_prefix("x", parse_bnf('s ::= "a"'))
        assert analysis.prefix == ""
        assert analysis.continuations == frozenset({"a"})

    def test_empty_language_raises(self):
        with pytest.raises(EmptyLanguage):
            longest_valid_prefix("a", parse_bnf("s ::= s"))

    def test_complete_terminal_followed_by_garbage(self, calendar):
        # Jean matches fully before the apostrophe, so the boundary lands
        # after it rather than at the attendee head
        s = "QueryEvent((& (start_? Wednesday) (attendee_? Jean's Manager)))"
        analysis = longest_valid_prefix(s, calendar)
        assert analysis.prefix.endswith("(attendee_? Jean")
        assert {"Jean", "FindManager("} <= set(analysis.continuations)

    def test_boundary_analysis_snaps_dangling(self):
        g = parse_bnf('s ::= "ab" | "a" "c"')
        free = longest_valid_prefix("a", g)
        assert free.prefix == "a"
        snapped = boundary_analysis("a", g)
        assert snapped.prefix == "a"  # "a" is itself at a terminal boundary
        snapped2 = boundary_analysis("ab x", g)
        assert snapped2.prefix == "ab "  # boundary plus the junction space


class TestValidContinuations:
    def test_start_position(self, calendar):
        assert valid_continuations("", calendar) == frozenset({"CreateEvent(", "QueryEvent("})

    def test_complete_string_in_finite_language(self):
        assert valid_continuations("a", parse_bnf('s ::= "a"')) == frozenset()

    def test_constraint_head_position(self, calendar):
        conts = valid_continuations("(& ", calendar, start="constraint")
        assert {"(&", "(start_?", "(attendee_?"} <= set(conts)

    def test_not_viable_raises(self, calendar):
        with pytest.raises(NotViable):
            valid_continuations("Zelda", calendar)

    def test_dangling_prefix_spanning_terminal(self):
        # continuations are whole grammar terminals: "b" completes "ab" but
        # is not itself a terminal, so only "c" qualifies
        g = parse_bnf('s ::= "ab" | "a" "c"')
        assert valid_continuations("a", g) == frozenset({"c"})
        g2 = parse_bnf('s ::= "ab" | "a" "b" "c"')
        assert valid_continuations("a", g2) == frozenset({"b"})


class TestEnumerate:
    def test_unary_language(self):
        got = enumerate_language(parse_bnf('s ::= "a" | "a" s'), 3)
        # 'a a' is the optional-separator variant of 'aa'
        assert got == frozenset({"a", "aa", "aaa", "a a"})

    def test_optional_includes_empty(self):
        assert enumerate_language(parse_bnf('s ::= "ab"?'), 2) == frozenset({"", "ab"})

    def test_exemplar_grammar_contains_its_program(self, exemplar_grammar):
        members = enumerate_language(exemplar_grammar, len(EXEMPLAR_PROGRAM))
        assert EXEMPLAR_PROGRAM in members

    def test_exact_policy_has_no_space_variants(self):
        from grammar_steer.grammar import Grammar

        g = parse_bnf('s ::= "a" | "a" s')
        exact = Grammar(g.rules, g.start, whitespace="exact")
        assert enumerate_language(exact, 3) == frozenset({"a", "aa", "aaa"})


class TestShortestCompletion:
    def test_complete_string_needs_nothing(self, calendar):
        assert shortest_completion(EXEMPLAR_PROGRAM, calendar) == ""

    def test_empty_prefix_minimal_member(self):
        assert shortest_completion("", parse_bnf('s ::= "a" s | "a"')) == "a"

    def test_event_head_completion_minimal_and_lexicographic(self, calendar):
        got = shortest_completion("QueryEvent(", calendar)
        full = "QueryEvent(" + got
        assert recognize(full, calendar) is Recognition.COMPLETE
        # oracle: nothing shorter (and nothing lex-smaller at the same length)
        # exists among enumerated members extending the prefix
        members = enumerate_language(calendar, len(full), node_budget=3_000_000)
        extensions = sorted(
            (m[len("QueryEvent("):] for m in members if m.startswith("QueryEvent(")),
            key=lambda s: (len(s), s),
        )
        assert extensions[0] == got

    def test_mid_terminal_prefix_completed(self, calendar):
        got = shortest_completion("QueryEvent((start_? Wednes", calendar)
        assert recognize("QueryEvent((start_? Wednes" + got, calendar) is Recognition.COMPLETE
        assert got.startswith("day")

    def test_not_viable_raises(self, calendar):
        with pytest.raises(NotViable):
            shortest_completion("Zelda", calendar)
