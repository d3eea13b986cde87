"""Grammar parsing, serialization, validation, desugaring, subset relation."""

import random

import pytest

from conftest import CALENDAR_BNF, EXEMPLAR_GRAMMAR_BNF, random_grammar
from grammar_steer.errors import BnfSyntaxError, DuplicateLhsError
from grammar_steer.grammar import (
    NT,
    Grammar,
    Repeat,
    Rule,
    SeqItem,
    Symbol,
    SymbolSeq,
    T,
    concretize_alternative,
    desugar,
    is_concretization,
    is_subset,
    parse_bnf,
    serialize,
    validate,
)
from grammar_steer.earley import enumerate_language


class TestParse:
    def test_calendar_grammar_shape(self, calendar):
        lhs = [r.lhs.text for r in calendar.rules]
        assert lhs == ["event", "constraint", "date", "number", "time", "attendee", "number__chr0"]
        assert calendar.start.text == "event"
        assert len(calendar.rule("attendee").alternatives) == 4

    def test_minimal_grammar(self):
        g = parse_bnf('s ::= "a"')
        assert len(g.rules) == 1
        assert g.rules[0].alternatives == (SymbolSeq((SeqItem(T("a")),)),)

    def test_alternative_order_preserved(self):
        g = parse_bnf('s ::= "a" s | "a"')
        first, second = g.rule("s").alternatives
        assert len(first.items) == 2 and len(second.items) == 1

    def test_double_pipe_is_plain_alternation(self):
        assert parse_bnf('s ::= "a" || "b"') == parse_bnf('s ::= "a" | "b"')

    def test_merge_duplicate_lhs_in_source_order(self):
        g = parse_bnf('s ::= "a" ;; s ::= "b"')
        assert [it.symbol.text for a in g.rule("s").alternatives for it in a.items] == ["a", "b"]

    def test_duplicate_lhs_conflict_when_merge_disabled(self):
        with pytest.raises(DuplicateLhsError):
            parse_bnf('s ::= "a" ;; s ::= "b"', merge_duplicate_lhs=False)

    def test_syntax_error_carries_position(self):
        with pytest.raises(BnfSyntaxError) as err:
            parse_bnf('s ::= "a" |')
        assert err.value.line == 1

    def test_undefined_nonterminal_is_not_a_parse_error(self):
        g = parse_bnf("s ::= t")
        assert g.has_rule("s")

    def test_block_separators(self):
        via_newline = parse_bnf('s ::= "a"\nt ::= "b"\ns2 ::= t')
        via_marker = parse_bnf('s ::= "a" ;; t ::= "b" ;; s2 ::= t')
        assert via_newline == via_marker

    def test_string_escapes(self):
        g = parse_bnf('s ::= "say \\"hi\\" \\\\ end"')
        assert g.rules[0].alternatives[0].items[0].symbol.text == 'say "hi" \\ end'

    def test_char_range_expands_to_terminal_alternatives(self, calendar):
        digits = calendar.rule("number__chr0")
        texts = [a.items[0].symbol.text for a in digits.alternatives]
        assert texts == [str(d) for d in range(10)]

    def test_repetition_suffix_binds_to_preceding_symbol(self):
        g = parse_bnf('s ::= "a" t?\nt ::= "b"')
        items = g.rule("s").alternatives[0].items
        assert items[1].repeat is Repeat.OPTIONAL
        assert items[1].symbol == NT("t")


class TestSerialize:
    def test_trivial(self):
        assert serialize(parse_bnf('s ::= "a"')) == 's ::= "a"\n'

    def test_round_trip_calendar(self, calendar):
        assert parse_bnf(serialize(calendar)) == calendar

    def test_round_trip_exemplar_grammar(self, exemplar_grammar):
        assert parse_bnf(serialize(exemplar_grammar)) == exemplar_grammar

    def test_deterministic_bytes(self, calendar):
        assert serialize(calendar) == serialize(parse_bnf(serialize(calendar)))

    def test_alternative_order_changes_bytes(self):
        a = parse_bnf('s ::= "a" | "b"')
        b = parse_bnf('s ::= "b" | "a"')
        assert serialize(a) != serialize(b)

    @pytest.mark.parametrize("seed", range(8))
    def test_round_trip_random(self, seed):
        g = random_grammar(random.Random(seed))
        assert parse_bnf(serialize(g)) == g


class TestValidate:
    def test_calendar_clean(self, calendar):
        assert validate(calendar) == []

    def test_undefined_nonterminal(self):
        diags = validate(parse_bnf("s ::= t"))
        assert [d.kind for d in diags if d.kind == "undefined-nonterminal"] == ["undefined-nonterminal"]
        assert diags[0].subject == "t"

    def test_unproductive_rule(self):
        # u only derives itself, so it can never produce a terminal string
        diags = validate(parse_bnf('s ::= "a" | u ;; u ::= u'))
        assert any(d.kind == "unproductive-nonterminal" and d.subject == "u" for d in diags)

    def test_unreachable_rule(self):
        diags = validate(parse_bnf('s ::= "a"\nother ::= "b"'))
        assert any(d.kind == "unreachable-rule" and d.subject == "other" for d in diags)

    def test_skippable_occurrence_does_not_block_productivity(self):
        diags = validate(parse_bnf('s ::= "a" u* ;; u ::= u'))
        kinds = {d.subject: d.kind for d in diags if d.kind == "unproductive-nonterminal"}
        assert "s" not in kinds and "u" in kinds


class TestDesugar:
    def test_plus_expansion_shape(self):
        g = desugar(parse_bnf('s ::= "a"+'))
        assert serialize(g) == 's ::= s__rep0\ns__rep0 ::= "a" s__rep0 | "a"\n'

    def test_no_markers_is_identity(self, exemplar_grammar):
        assert desugar(exemplar_grammar) == exemplar_grammar

    @pytest.mark.parametrize(
        "bnf,max_len",
        [
            ('s ::= "a"+', 5),
            ('s ::= "ab"?', 4),
            ('s ::= "a"* "b"', 6),
            ('s ::= ("0".."9")+', 3),
            ('s ::= "a" t? ;; t ::= "b"+', 6),
        ],
    )
    def test_desugar_preserves_language(self, bnf, max_len):
        g = parse_bnf(bnf)
        assert enumerate_language(desugar(g), max_len) == enumerate_language(g, max_len)

    @pytest.mark.parametrize("seed", range(10))
    def test_desugar_preserves_language_random(self, seed):
        g = random_grammar(random.Random(100 + seed))
        assert enumerate_language(desugar(g), 10, node_budget=200_000) == enumerate_language(
            g, 10, node_budget=200_000
        )


class TestSubset:
    def test_exemplar_grammar_is_subset_of_full(self, calendar, exemplar_grammar):
        assert is_subset(exemplar_grammar, calendar)

    def test_reflexive(self, calendar):
        assert is_subset(calendar, calendar)

    def test_foreign_alternative_rejected(self, calendar, exemplar_grammar):
        extended = parse_bnf(serialize(exemplar_grammar) + 'date ::= "Friday"\n')
        assert not is_subset(extended, calendar)

    def test_concretization_matching(self):
        ext = parse_bnf('c ::= "(attendee_?" a+ ")" ;; a ::= "Bob"')
        two = parse_bnf('c ::= "(attendee_?" a a ")" ;; a ::= "Bob"')
        zero = parse_bnf('c ::= "(attendee_?" ")" ;; a ::= "Bob"')
        assert is_subset(two, ext)
        assert not is_subset(zero, ext)  # plus needs at least one occurrence

    def test_optional_concretization(self):
        ext = parse_bnf('c ::= "(start_?" d t? ")" ;; d ::= "Monday" ;; t ::= "x"')
        without = parse_bnf('c ::= "(start_?" d ")" ;; d ::= "Monday"')
        assert is_subset(without, ext)

    def test_is_concretization_unit(self):
        star = SymbolSeq((SeqItem(T("("), Repeat.ONCE), SeqItem(NT("a"), Repeat.STAR)))
        concrete = concretize_alternative(star, (1, 3))
        assert is_concretization(concrete, star)
        assert not is_concretization(SymbolSeq((SeqItem(NT("a")),)), star)

    def test_transitive_on_random_subsets(self, calendar):
        rng = random.Random(5)
        for _ in range(25):
            sub1 = _random_rule_subset(calendar, rng)
            sub2 = _random_rule_subset(sub1, rng)
            assert is_subset(sub1, calendar)
            assert is_subset(sub2, sub1)
            assert is_subset(sub2, calendar)  # transitivity

    def test_antisymmetric_under_canonical_form(self, calendar, exemplar_grammar):
        assert is_subset(exemplar_grammar, calendar)
        assert not is_subset(calendar, exemplar_grammar)


def _random_rule_subset(g: Grammar, rng: random.Random) -> Grammar:
    rules = []
    for r in g.rules:
        alts = [a for a in r.alternatives if rng.random() < 0.8 or r.lhs == g.start]
        if not alts:
            alts = [r.alternatives[0]]
        rules.append(Rule(r.lhs, tuple(alts)))
    return Grammar(tuple(rules), g.start)


class TestTypes:
    def test_terminal_must_be_non_empty(self):
        with pytest.raises(ValueError):
            Symbol("terminal", "")

    def test_nonterminal_name_pattern(self):
        with pytest.raises(ValueError):
            Symbol("nonterminal", "9bad")
        Symbol("nonterminal", "ok_name?!.-x")

    def test_grammar_requires_start_rule(self):
        rule = Rule(NT("s"), (SymbolSeq((SeqItem(T("a")),)),))
        with pytest.raises(ValueError):
            Grammar((rule,), NT("other"))

    def test_one_rule_per_lhs(self):
        rule = Rule(NT("s"), (SymbolSeq((SeqItem(T("a")),)),))
        with pytest.raises(ValueError):
            Grammar((rule, rule), NT("s"))

    def test_duplicate_alternatives_rejected(self):
        alt = SymbolSeq((SeqItem(T("a")),))
        with pytest.raises(ValueError):
            Rule(NT("s"), (alt, alt))
