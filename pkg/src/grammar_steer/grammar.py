"""Extended-BNF grammars: parse, serialize, validate, desugar, compare.

A grammar is an ordered list of rules ``lhs ::= alt | alt | ...`` over quoted
terminal strings and bare nonterminal names.  Alternatives may carry the
repetition operators ``?``, ``*`` and ``+`` on single symbols, plus the
character-range sugar ``("0".."9")`` which expands at parse time into an
auxiliary rule of explicit single-character terminal alternatives.

Values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass, field

from .errors import BnfSyntaxError, DuplicateLhsError

NONTERMINAL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_?!.\-]*\Z")

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


class Repeat(enum.Enum):
    ONCE = ""
    OPTIONAL = "?"
    STAR = "*"
    PLUS = "+"

    @property
    def suffix(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class Symbol:
    kind: str  # "terminal" | "nonterminal"
    text: str

    def __post_init__(self):
        if self.kind == "terminal":
            if not self.text:
                raise ValueError("terminal text must be non-empty")
        elif self.kind == "nonterminal":
            if not NONTERMINAL_RE.match(self.text):
                raise ValueError(f"bad nonterminal name: {self.text!r}")
        else:
            raise ValueError(f"bad symbol kind: {self.kind!r}")

    @property
    def is_terminal(self) -> bool:
        return self.kind == "terminal"


def T(text: str) -> Symbol:
    return Symbol("terminal", text)


def NT(name: str) -> Symbol:
    return Symbol("nonterminal", name)


@dataclass(frozen=True, slots=True)
class SeqItem:
    symbol: Symbol
    repeat: Repeat = Repeat.ONCE


@dataclass(frozen=True, slots=True)
class SymbolSeq:
    """One alternative: an ordered sequence of symbols with repetition marks.

    An empty ``items`` tuple is the explicit empty alternative (written ``""``
    in text form); it only arises from desugaring or hand construction.
    """

    items: tuple[SeqItem, ...]

    def __post_init__(self):
        for it in self.items:
            if not isinstance(it, SeqItem):
                raise TypeError("SymbolSeq items must be SeqItem")

    @property
    def is_concrete(self) -> bool:
        return all(it.repeat is Repeat.ONCE for it in self.items)


@dataclass(frozen=True, slots=True)
class Rule:
    lhs: Symbol
    alternatives: tuple[SymbolSeq, ...]

    def __post_init__(self):
        if self.lhs.is_terminal:
            raise ValueError("rule lhs must be a nonterminal")
        if not self.alternatives:
            raise ValueError(f"rule {self.lhs.text} has no alternatives")
        if len(set(self.alternatives)) != len(self.alternatives):
            raise ValueError(f"rule {self.lhs.text} has duplicate alternatives")


@dataclass(frozen=True, slots=True)
class AltRef:
    """Stable identity of one alternative inside an owning grammar."""

    lhs: str
    alt_index: int

    def resolve(self, g: Grammar) -> SymbolSeq:
        return g.rule(self.lhs).alternatives[self.alt_index]


@dataclass(frozen=True, slots=True)
class Grammar:
    rules: tuple[Rule, ...]
    start: Symbol
    # "flexible": whitespace runs collapse and inter-terminal spaces are
    # optional; "exact": byte-level matching (used by the metagrammar).
    whitespace: str = "flexible"

    def __post_init__(self):
        seen = set()
        for r in self.rules:
            if r.lhs.text in seen:
                raise ValueError(f"multiple rules for {r.lhs.text}; merge alternatives instead")
            seen.add(r.lhs.text)
        if self.start.text not in seen:
            raise ValueError(f"start symbol {self.start.text} has no rule")
        if self.whitespace not in ("flexible", "exact"):
            raise ValueError(f"bad whitespace policy: {self.whitespace!r}")

    def rule(self, lhs: str) -> Rule:
        return _rule_map(self)[lhs]

    def has_rule(self, lhs: str) -> bool:
        return lhs in _rule_map(self)

    def terminals(self) -> tuple[str, ...]:
        """All distinct terminal texts, in first-appearance order."""
        seen: dict[str, None] = {}
        for r in self.rules:
            for alt in r.alternatives:
                for it in alt.items:
                    if it.symbol.is_terminal:
                        seen.setdefault(it.symbol.text, None)
        return tuple(seen)

    def alt_refs(self) -> tuple[AltRef, ...]:
        return tuple(
            AltRef(r.lhs.text, i) for r in self.rules for i in range(len(r.alternatives))
        )


@functools.lru_cache(maxsize=4096)
def _rule_map(g: Grammar) -> dict[str, Rule]:
    return {r.lhs.text: r for r in g.rules}


@dataclass(frozen=True, slots=True)
class Diagnostic:
    kind: str  # undefined-nonterminal | unreachable-rule | unproductive-nonterminal
    subject: str
    message: str


# ---------------------------------------------------------------------------
# Lexer / parser for the BNF text form


@dataclass(frozen=True, slots=True)
class _Tok:
    kind: str  # NAME STRING DEFINE PIPE LPAREN RPAREN RANGE REP SEP
    value: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg: str):
        raise BnfSyntaxError(msg, line, col)

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            if c == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1
            continue
        start_line, start_col = line, col
        if text.startswith("::=", i):
            toks.append(_Tok("DEFINE", "::=", start_line, start_col))
            i += 3
            col += 3
        elif text.startswith(";;", i):
            toks.append(_Tok("SEP", ";;", start_line, start_col))
            i += 2
            col += 2
        elif text.startswith("..", i):
            toks.append(_Tok("RANGE", "..", start_line, start_col))
            i += 2
            col += 2
        elif c == "|":
            # `|` and `||` are both plain alternation
            width = 2 if text.startswith("||", i) else 1
            toks.append(_Tok("PIPE", "|", start_line, start_col))
            i += width
            col += width
        elif c == "(":
            toks.append(_Tok("LPAREN", "(", start_line, start_col))
            i += 1
            col += 1
        elif c == ")":
            toks.append(_Tok("RPAREN", ")", start_line, start_col))
            i += 1
            col += 1
        elif c in "?*+":
            toks.append(_Tok("REP", c, start_line, start_col))
            i += 1
            col += 1
        elif c == '"':
            i += 1
            col += 1
            out: list[str] = []
            while True:
                if i >= n:
                    err("unterminated string literal")
                c = text[i]
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n:
                        err("dangling escape")
                    esc = text[i + 1]
                    if esc not in _UNESCAPES:
                        err(f"unknown escape \\{esc}")
                    out.append(_UNESCAPES[esc])
                    i += 2
                    col += 2
                    continue
                if c == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
                out.append(c)
                i += 1
            toks.append(_Tok("STRING", "".join(out), start_line, start_col))
        else:
            m = re.match(r"[A-Za-z_][A-Za-z0-9_?!.\-]*", text[i:])
            if not m:
                err(f"unexpected character {c!r}")
            name = m.group(0)
            # trailing ?/*/+ on a bare name are repetition operators, not name
            # characters; nonterminal names therefore cannot end in them
            stripped = name.rstrip("?*+")
            if not stripped:
                err(f"bad name {name!r}")
            toks.append(_Tok("NAME", stripped, start_line, start_col))
            i += len(stripped)
            col += len(stripped)
            for rep in name[len(stripped):]:
                toks.append(_Tok("REP", rep, start_line, start_col))
                i += 1
                col += 1
    return toks


_REP_BY_CHAR = {"?": Repeat.OPTIONAL, "*": Repeat.STAR, "+": Repeat.PLUS}


class _Parser:
    def __init__(self, toks: list[_Tok], merge_duplicate_lhs: bool):
        self.toks = toks
        self.pos = 0
        self.merge = merge_duplicate_lhs
        # lhs -> list of alternatives, in first-definition order
        self.order: list[str] = []
        self.alts: dict[str, list[SymbolSeq]] = {}
        self.range_counters: dict[str, int] = {}
        self.range_rules: list[Rule] = []

    def err(self, msg: str, tok: _Tok | None = None):
        tok = tok or (self.toks[self.pos] if self.pos < len(self.toks) else None)
        if tok is None:
            last = self.toks[-1] if self.toks else _Tok("EOF", "", 1, 1)
            raise BnfSyntaxError(msg, last.line, last.col)
        raise BnfSyntaxError(msg, tok.line, tok.col)

    def peek(self, offset: int = 0) -> _Tok | None:
        i = self.pos + offset
        return self.toks[i] if i < len(self.toks) else None

    def take(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            self.err("unexpected end of input")
        self.pos += 1
        return tok

    def at_rule_start(self) -> bool:
        a, b = self.peek(), self.peek(1)
        return a is not None and a.kind == "NAME" and b is not None and b.kind == "DEFINE"

    def parse(self) -> Grammar:
        while self.peek() is not None:
            if self.peek().kind == "SEP":
                self.take()
                continue
            self.parse_rule()
        if not self.order:
            self.err("empty grammar")
        rules = [Rule(NT(lhs), tuple(self.alts[lhs])) for lhs in self.order]
        rules.extend(self.range_rules)
        return Grammar(tuple(rules), NT(self.order[0]))

    def parse_rule(self):
        head = self.take()
        if head.kind != "NAME":
            self.err(f"expected rule name, got {head.value!r}", head)
        if self.take().kind != "DEFINE":
            self.err("expected '::=' after rule name", head)
        lhs = head.value
        alternatives = [self.parse_alternative(lhs)]
        while self.peek() is not None and self.peek().kind == "PIPE":
            self.take()
            alternatives.append(self.parse_alternative(lhs))
        if lhs in self.alts:
            if not self.merge:
                raise DuplicateLhsError(f"duplicate rule for {lhs}")
        else:
            self.order.append(lhs)
            self.alts[lhs] = []
        for alt in alternatives:
            if alt in self.alts[lhs]:
                self.err(f"duplicate alternative in rule {lhs}", head)
            self.alts[lhs].append(alt)

    def parse_alternative(self, lhs: str) -> SymbolSeq:
        items: list[SeqItem] = []
        epsilon = False
        while True:
            tok = self.peek()
            if tok is None or tok.kind in ("PIPE", "SEP") or self.at_rule_start():
                break
            if tok.kind == "STRING":
                self.take()
                if tok.value == "":
                    epsilon = True
                    continue
                sym = T(tok.value)
            elif tok.kind == "NAME":
                self.take()
                sym = NT(tok.value)
            elif tok.kind == "LPAREN":
                sym = self.parse_range(lhs)
            else:
                self.err(f"unexpected token {tok.value!r}", tok)
            rep = Repeat.ONCE
            nxt = self.peek()
            if nxt is not None and nxt.kind == "REP":
                self.take()
                rep = _REP_BY_CHAR[nxt.value]
                after = self.peek()
                if after is not None and after.kind == "REP":
                    self.err("double repetition operator", after)
            items.append(SeqItem(sym, rep))
        if epsilon and items:
            self.err('empty-string marker "" cannot be mixed with other symbols')
        if not items and not epsilon:
            self.err(f"empty alternative in rule {lhs} (write \"\" for an explicit empty alternative)")
        return SymbolSeq(tuple(items))

    def parse_range(self, lhs: str) -> Symbol:
        open_tok = self.take()  # LPAREN
        lo = self.take()
        if lo.kind != "STRING":
            self.err("only character ranges are supported in parentheses", open_tok)
        if self.take().kind != "RANGE":
            self.err("expected '..' in character range", open_tok)
        hi = self.take()
        if hi.kind != "STRING":
            self.err("expected upper bound string in character range", open_tok)
        if self.take().kind != "RPAREN":
            self.err("expected ')' closing character range", open_tok)
        if len(lo.value) != 1 or len(hi.value) != 1 or ord(lo.value) > ord(hi.value):
            self.err(f"bad character range {lo.value!r}..{hi.value!r}", open_tok)
        n = self.range_counters.get(lhs, 0)
        self.range_counters[lhs] = n + 1
        name = f"{lhs}__chr{n}"
        while name in self.alts or any(r.lhs.text == name for r in self.range_rules):
            n += 1
            self.range_counters[lhs] = n + 1
            name = f"{lhs}__chr{n}"
        alts = tuple(
            SymbolSeq((SeqItem(T(chr(c))),)) for c in range(ord(lo.value), ord(hi.value) + 1)
        )
        self.range_rules.append(Rule(NT(name), alts))
        return NT(name)


def parse_bnf(text: str, merge_duplicate_lhs: bool = True) -> Grammar:
    """Parse BNF text into a Grammar; start symbol is the first rule's lhs.

    Blocks may be separated by newlines, blank lines or ``;;``.  Multiple
    blocks with the same lhs merge their alternatives in source order unless
    ``merge_duplicate_lhs`` is False, in which case a duplicate raises.
    Undefined nonterminals are diagnosed by :func:`validate`, not here.
    """
    return _Parser(_lex(text), merge_duplicate_lhs).parse()


# ---------------------------------------------------------------------------
# Serialization


def _quote(text: str) -> str:
    return '"' + "".join(_ESCAPES.get(c, c) for c in text) + '"'


def format_alternative(alt: SymbolSeq) -> str:
    if not alt.items:
        return '""'
    parts = []
    for it in alt.items:
        base = _quote(it.symbol.text) if it.symbol.is_terminal else it.symbol.text
        parts.append(base + it.repeat.suffix)
    return " ".join(parts)


def serialize(g: Grammar) -> str:
    """Deterministic text form: one rule per line, first-definition order."""
    lines = []
    for r in g.rules:
        alts = " | ".join(format_alternative(a) for a in r.alternatives)
        lines.append(f"{r.lhs.text} ::= {alts}\n")
    return "".join(lines)


# ---------------------------------------------------------------------------
# Validation


def _referenced(g: Grammar) -> dict[str, set[str]]:
    refs: dict[str, set[str]] = {r.lhs.text: set() for r in g.rules}
    for r in g.rules:
        for alt in r.alternatives:
            for it in alt.items:
                if not it.symbol.is_terminal:
                    refs[r.lhs.text].add(it.symbol.text)
    return refs


def productive_nonterminals(g: Grammar) -> set[str]:
    """Fixpoint of nonterminals that derive at least one terminal string."""
    defined = {r.lhs.text for r in g.rules}
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs.text in productive:
                continue
            for alt in r.alternatives:
                ok = True
                for it in alt.items:
                    if it.symbol.is_terminal:
                        continue
                    if it.repeat in (Repeat.OPTIONAL, Repeat.STAR):
                        continue  # skippable occurrence never blocks
                    if it.symbol.text not in productive or it.symbol.text not in defined:
                        ok = False
                        break
                if ok:
                    productive.add(r.lhs.text)
                    changed = True
                    break
    return productive


def validate(g: Grammar) -> list[Diagnostic]:
    """Diagnose undefined, unreachable and unproductive nonterminals."""
    out: list[Diagnostic] = []
    defined = {r.lhs.text for r in g.rules}
    refs = _referenced(g)

    undefined = sorted({name for used in refs.values() for name in used if name not in defined})
    for name in undefined:
        out.append(Diagnostic("undefined-nonterminal", name, f"nonterminal {name} has no rule"))

    reachable = {g.start.text}
    frontier = [g.start.text]
    while frontier:
        cur = frontier.pop()
        for name in refs.get(cur, ()):
            if name in defined and name not in reachable:
                reachable.add(name)
                frontier.append(name)
    for r in g.rules:
        if r.lhs.text not in reachable:
            out.append(
                Diagnostic(
                    "unreachable-rule", r.lhs.text, f"rule {r.lhs.text} is not derivable from {g.start.text}"
                )
            )

    productive = productive_nonterminals(g)
    for r in g.rules:
        if r.lhs.text not in productive:
            out.append(
                Diagnostic(
                    "unproductive-nonterminal",
                    r.lhs.text,
                    f"nonterminal {r.lhs.text} derives no terminal string",
                )
            )
    return out


# ---------------------------------------------------------------------------
# Desugaring: rewrite ?/*/+ into auxiliary right-recursive rules


@dataclass(frozen=True, slots=True)
class RepExpansion:
    """Where an auxiliary repetition rule came from."""

    owner: AltRef
    item_index: int
    repeat: Repeat


def desugar_with_origins(g: Grammar) -> tuple[Grammar, dict[str, dict], dict[str, RepExpansion]]:
    """Desugared grammar plus: alt origin map and aux-rule provenance.

    Returns ``(desugared, origins, aux_info)`` where ``origins`` maps each
    desugared lhs to its identity in the source grammar (same-name rules map
    to themselves) and ``aux_info`` maps auxiliary rule names to the rewritten
    item.  Language is preserved.
    """
    existing = {r.lhs.text for r in g.rules}
    out_rules: list[Rule] = []
    aux_info: dict[str, RepExpansion] = {}

    for r in g.rules:
        counter = 0
        pending_aux: list[Rule] = []
        new_alts: list[SymbolSeq] = []
        for ai, alt in enumerate(r.alternatives):
            new_items: list[SeqItem] = []
            for ii, it in enumerate(alt.items):
                if it.repeat is Repeat.ONCE:
                    new_items.append(it)
                    continue
                name = f"{r.lhs.text}__rep{counter}"
                counter += 1
                while name in existing:
                    name = f"{r.lhs.text}__rep{counter}"
                    counter += 1
                existing.add(name)
                aux_info[name] = RepExpansion(AltRef(r.lhs.text, ai), ii, it.repeat)
                x = SeqItem(it.symbol)
                rec = SeqItem(NT(name))
                if it.repeat is Repeat.PLUS:
                    alts = (SymbolSeq((x, rec)), SymbolSeq((x,)))
                elif it.repeat is Repeat.STAR:
                    alts = (SymbolSeq((x, rec)), SymbolSeq(()))
                else:  # OPTIONAL
                    alts = (SymbolSeq((x,)), SymbolSeq(()))
                pending_aux.append(Rule(NT(name), alts))
                new_items.append(SeqItem(NT(name)))
            new_alts.append(SymbolSeq(tuple(new_items)))
        out_rules.append(Rule(r.lhs, tuple(new_alts)))
        out_rules.extend(pending_aux)

    desugared = Grammar(tuple(out_rules), g.start, whitespace=g.whitespace)
    origins = {r.lhs.text: {"kind": "source"} for r in g.rules}
    for name in aux_info:
        origins[name] = {"kind": "aux"}
    return desugared, origins, aux_info


def desugar(g: Grammar) -> Grammar:
    """Expand every repetition operator into an auxiliary recursive rule."""
    return desugar_with_origins(g)[0]


# ---------------------------------------------------------------------------
# Concretization and the subset relation


def _count_range(rep: Repeat, bound: int) -> range:
    if rep is Repeat.ONCE:
        return range(1, 2)
    if rep is Repeat.OPTIONAL:
        return range(0, 2)
    if rep is Repeat.STAR:
        return range(0, bound + 1)
    return range(1, bound + 1)  # PLUS


def concretize_alternative(alt: SymbolSeq, counts: tuple[int, ...]) -> SymbolSeq:
    """Instantiate repetition operators with fixed occurrence counts."""
    if len(counts) != len(alt.items):
        raise ValueError("counts must align with alternative items")
    items: list[SeqItem] = []
    for it, c in zip(alt.items, counts):
        if c not in _count_range(it.repeat, max(c, 1)):
            raise ValueError(f"count {c} invalid for repetition {it.repeat}")
        items.extend([SeqItem(it.symbol)] * c)
    return SymbolSeq(tuple(items))


def is_concretization(concrete: SymbolSeq, extended: SymbolSeq) -> bool:
    """True iff ``concrete`` instantiates ``extended`` with fixed counts."""
    if not concrete.is_concrete:
        return False
    syms = [it.symbol for it in concrete.items]
    ext = extended.items

    @functools.lru_cache(maxsize=None)
    def match(i: int, j: int) -> bool:
        if j == len(ext):
            return i == len(syms)
        item = ext[j]
        if item.repeat is Repeat.ONCE:
            return i < len(syms) and syms[i] == item.symbol and match(i + 1, j + 1)
        if item.repeat is Repeat.OPTIONAL:
            if match(i, j + 1):
                return True
            return i < len(syms) and syms[i] == item.symbol and match(i + 1, j + 1)
        # STAR / PLUS: consume k >= (0 or 1) copies
        k = 0
        pos = i
        minimum = 0 if item.repeat is Repeat.STAR else 1
        while True:
            if k >= minimum and match(pos, j + 1):
                return True
            if pos < len(syms) and syms[pos] == item.symbol:
                pos += 1
                k += 1
            else:
                return False

    return match(0, 0)


def is_subset(g_sub: Grammar, g_full: Grammar) -> bool:
    """True iff every alternative of ``g_sub`` is an alternative of the same
    lhs in ``g_full``, either literally or as a fixed-count instantiation of
    an extended alternative."""
    for r in g_sub.rules:
        if not g_full.has_rule(r.lhs.text):
            return False
        full_alts = g_full.rule(r.lhs.text).alternatives
        for alt in r.alternatives:
            if alt in full_alts:
                continue
            if not any(is_concretization(alt, fa) for fa in full_alts):
                return False
    return True
