"""Desk-scale batch evaluation: program accuracy and call accounting.

Runs each evaluation example through a set of prompting/decoding methods
against a mock or cached gateway and aggregates exact-match program
accuracy, syntactic validity against the full grammar, and per-example
complete/score call counts.  Execution accuracy (external executors) is out
of scope; reports state program accuracy only.
"""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .decoder import DecodeConfig, DecodeTrace, constrained_decode, decode_grammar, standard_decode
from .earley import Recognition, linearize_derivation, parse, recognize
from .errors import CorpusInvalid, DecodeFailed, EmptyLanguage, LabelNotFound, NoParse
from .gateway import AdversarialLm, GoldEchoLm, LmGateway, ScriptedLm
from .grammar import Grammar, parse_bnf, serialize, validate
from .metagrammar import cached_metagrammar
from .prompting import (
    ExemplarTriple,
    PromptConfig,
    build_prompt,
    make_config,
    prompt_word_count,
    split_output,
)
from .specialize import specialize

log = logging.getLogger(__name__)

METHODS = (
    "standard",
    "standard_constrained",
    "derivation_tree",
    "grammar",
    "grammar_constrained",
    "grammar_both",
    "grammar_oracle",
)

_CONSTRAINT_LABEL = {
    "standard": "none",
    "standard_constrained": "program in L(G)",
    "derivation_tree": "none (linearized trees)",
    "grammar": "none",
    "grammar_constrained": "grammar subset of G",
    "grammar_both": "grammar subset + program in L(G-hat)",
    "grammar_oracle": "oracle specialized grammar",
}


@dataclass(frozen=True, slots=True)
class EvalExample:
    x: str
    y_gold: str
    split_tag: str = "test"


@dataclass(frozen=True, slots=True)
class Corpus:
    name: str
    grammar: Grammar
    examples: tuple[EvalExample, ...]
    include_full_grammar: bool = False

    def split(self) -> tuple[list[EvalExample], list[EvalExample]]:
        train = [e for e in self.examples if e.split_tag == "train"]
        test = [e for e in self.examples if e.split_tag != "train"]
        if not train:
            train, test = list(self.examples[:4]), list(self.examples[4:])
        return train, test


@dataclass(slots=True)
class MethodRow:
    method: str
    constraint_setting: str
    program_accuracy: float
    validity: float
    mean_complete_calls: float
    mean_score_calls: float
    mean_prompt_words: float
    failures: int = 0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "constraint_setting": self.constraint_setting,
            "program_accuracy": round(self.program_accuracy, 4),
            "validity": round(self.validity, 4),
            "mean_complete_calls": round(self.mean_complete_calls, 4),
            "mean_score_calls": round(self.mean_score_calls, 4),
            "mean_prompt_words": round(self.mean_prompt_words, 2),
            "failures": self.failures,
        }


@dataclass(slots=True)
class EvalReport:
    corpus: str
    n_examples: int
    rows: list[MethodRow] = field(default_factory=list)

    def row(self, method: str) -> MethodRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_dict(self) -> dict:
        return {
            "corpus": self.corpus,
            "n_examples": self.n_examples,
            "note": "program accuracy only; execution accuracy is out of scope",
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_table(self) -> str:
        headers = ["method", "constraint", "prog_acc", "valid", "complete", "score", "words"]
        rows = [
            [
                r.method,
                r.constraint_setting,
                f"{r.program_accuracy:.3f}",
                f"{r.validity:.3f}",
                f"{r.mean_complete_calls:.2f}",
                f"{r.mean_score_calls:.2f}",
                f"{r.mean_prompt_words:.0f}",
            ]
            for r in self.rows
        ]
        widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(headers)]
        out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        for row in rows:
            out.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
        return "\n".join(out)


# ---------------------------------------------------------------------------
# Corpus loading


def load_corpus(path_or_name: str) -> Corpus:
    path = Path(path_or_name)
    if not path.is_dir():
        bundled = Path(__file__).parent / "corpora" / path_or_name
        if not bundled.is_dir():
            raise CorpusInvalid(f"no such corpus: {path_or_name}")
        path = bundled
    grammar = parse_bnf((path / "grammar.bnf").read_text(encoding="utf-8"))
    diags = validate(grammar)
    if diags:
        raise CorpusInvalid(f"corpus grammar has diagnostics: {diags[0].message}")
    meta = {}
    meta_path = path / "corpus.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    examples = []
    with open(path / "examples.jsonl", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            examples.append(EvalExample(row["x"], row["y"], row.get("split_tag", "test")))
    corpus = Corpus(
        name=meta.get("name", path.name),
        grammar=grammar,
        examples=tuple(examples),
        include_full_grammar=bool(meta.get("include_full_grammar", False)),
    )
    for ex in corpus.examples:
        if recognize(ex.y_gold, grammar) is not Recognition.COMPLETE:
            raise CorpusInvalid(f"gold program does not parse: {ex.y_gold!r}")
    return corpus


def bundled_corpora() -> list[str]:
    root = Path(__file__).parent / "corpora"
    return sorted(p.name for p in root.iterdir() if p.is_dir())


# ---------------------------------------------------------------------------
# Program comparison


def exact_match(y_pred: str, y_gold: str, g: Grammar | None = None, structural: bool = True) -> bool:
    """Whitespace-normalized equality, with a structural fallback that
    compares derivation trees when both programs parse."""
    a = " ".join(y_pred.split())
    b = " ".join(y_gold.split())
    if a == b:
        return True
    if not structural or g is None:
        return False
    try:
        ta = parse(y_pred, g)
        tb = parse(y_gold, g)
    except NoParse:
        return False
    return ta == tb


_QUOTED = re.compile(r'"((?:[^"\\]|\\.)*)"')


def leaves_of_linearization(text: str) -> str:
    """Recover a surface program from a bracket-linearized derivation."""
    parts = [m.group(1).replace('\\"', '"').replace("\\\\", "\\") for m in _QUOTED.finditer(text)]
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Gateways for eval


def gold_table(corpus: Corpus) -> dict[str, dict]:
    table = {}
    for ex in corpus.examples:
        spec = specialize(ex.y_gold, corpus.grammar)
        table[ex.x] = {
            "grammar": serialize(spec.grammar),
            "y": ex.y_gold,
            "deriv": linearize_derivation(parse(ex.y_gold, corpus.grammar)),
        }
    return table


def make_gateway(
    kind: str,
    corpus: Corpus,
    prompt_cfg: PromptConfig,
    mode: str,
    seed: int,
    adversarial_rate: float = 0.3,
    transcript: list[str] | None = None,
) -> LmGateway:
    if kind == "mock_scripted":
        return ScriptedLm(transcript or [])
    gold = gold_table(corpus)
    echo = GoldEchoLm(gold, prompt_cfg.labels, mode=mode)
    if kind == "mock_oracle":
        return echo
    if kind == "mock_adversarial":
        return AdversarialLm(echo, rate=adversarial_rate, seed=seed)
    raise ValueError(f"unknown gateway kind: {kind!r}")


# ---------------------------------------------------------------------------
# Method runners


def _rules_cue(cfg: PromptConfig) -> str:
    return f"{cfg.separator}{cfg.labels.rules}\n"


def _program_cue(cfg: PromptConfig) -> str:
    return f"{cfg.separator}{cfg.labels.program}\n"


@dataclass(slots=True)
class ExampleOutcome:
    y_pred: str
    complete_calls: int
    score_calls: int
    prompt_words: int
    failed: bool = False


def _merge(*traces: DecodeTrace) -> tuple[int, int]:
    return (
        sum(t.complete_calls for t in traces),
        sum(t.score_calls for t in traces),
    )


def run_example(
    method: str,
    corpus: Corpus,
    exemplars: list[ExemplarTriple],
    example: EvalExample,
    lm: LmGateway,
    decode_cfg: DecodeConfig,
) -> ExampleOutcome:
    g = corpus.grammar
    mode = "derivation_tree" if method == "derivation_tree" else (
        "grammar" if method.startswith("grammar") else "standard"
    )
    cfg = make_config(mode, include_full_grammar=corpus.include_full_grammar and mode == "grammar")
    base = build_prompt(cfg, exemplars, example.x, g_full=g if cfg.include_full_grammar else None)
    words = prompt_word_count(base)

    try:
        if method == "standard":
            text, tr = standard_decode(base + _program_cue(cfg), lm, decode_cfg)
            y_pred = split_output(cfg.labels.program + "\n" + text, cfg)[1]
            calls = _merge(tr)
        elif method == "standard_constrained":
            y_pred, tr = constrained_decode(base + _program_cue(cfg), g, lm, decode_cfg)
            calls = _merge(tr)
        elif method == "derivation_tree":
            text, tr = standard_decode(base + _program_cue(cfg), lm, decode_cfg)
            y_pred = leaves_of_linearization(text)
            calls = _merge(tr)
        elif method == "grammar":
            text, tr = standard_decode(base, lm, decode_cfg)
            try:
                _gtext, y_pred = split_output(text, cfg)
            except LabelNotFound:
                log.warning("program label missing; treating whole output as program")
                y_pred = text.strip()
            calls = _merge(tr)
        elif method in ("grammar_constrained", "grammar_both"):
            # one speculative panel call; extra calls only when corrections run
            text, tr0 = standard_decode(base, lm, decode_cfg)
            try:
                gtext, prog = split_output(text, cfg)
            except LabelNotFound:
                gtext, prog = None, text.strip()
            gtext_nl = _ensure_newline(gtext) if gtext else None
            meta = cached_metagrammar(g, decode_cfg.meta_max_reps)
            if gtext_nl and recognize(gtext_nl, meta.grammar) is Recognition.COMPLETE:
                g_hat, tr1 = parse_bnf(gtext_nl), DecodeTrace()
            else:
                g_hat, tr1 = decode_grammar(
                    base + _rules_cue(cfg), g, lm, decode_cfg,
                    initial_text=gtext_nl if gtext_nl is not None else text,
                )
            prompt2 = base + _rules_cue(cfg) + serialize(g_hat) + cfg.labels.program + "\n"
            if method == "grammar_both":
                y_pred, tr2 = constrained_decode(prompt2, g_hat, lm, decode_cfg, initial_text=prog)
            elif serialize(g_hat) == gtext_nl:
                y_pred, tr2 = prog, DecodeTrace()  # grammar unchanged: keep the panel program
            else:
                y_pred, tr2 = standard_decode(prompt2, lm, decode_cfg)
                y_pred = y_pred.strip()
            calls = _merge(tr0, tr1, tr2)
        elif method == "grammar_oracle":
            g_hat = specialize(example.y_gold, g).grammar
            prompt2 = base + _rules_cue(cfg) + serialize(g_hat) + cfg.labels.program + "\n"
            y_pred, tr2 = standard_decode(prompt2, lm, decode_cfg)
            y_pred = y_pred.strip()
            calls = _merge(tr2)
        else:
            raise ValueError(f"unknown method: {method!r}")
    except (DecodeFailed, EmptyLanguage, NoParse) as exc:
        log.warning("decode failed for %r under %s: %s", example.x, method, exc)
        return ExampleOutcome("", 0, 0, words, failed=True)
    return ExampleOutcome(y_pred, calls[0], calls[1], words)


def _ensure_newline(text: str) -> str:
    return text if text.endswith("\n") else text + "\n"


def run_eval(
    corpus: Corpus,
    methods: list[str] | tuple[str, ...] = METHODS,
    gateway_kind: str = "mock_oracle",
    decode_cfg: DecodeConfig | None = None,
    seed: int = 0,
    workers: int = 4,
    adversarial_rate: float = 0.3,
    gateway_factory=None,
) -> EvalReport:
    """Evaluate every method over the corpus test split.

    ``gateway_factory(method, example_index, prompt_cfg, mode) -> LmGateway``
    overrides the built-in mock kinds when supplied.
    """
    decode_cfg = decode_cfg or DecodeConfig()
    train, test = corpus.split()
    report = EvalReport(corpus=corpus.name, n_examples=len(test))
    gold_cache = gold_table(corpus)

    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method: {method!r}")
        mode = "derivation_tree" if method == "derivation_tree" else (
            "grammar" if method.startswith("grammar") else "standard"
        )
        cfg = make_config(mode, include_full_grammar=corpus.include_full_grammar and mode == "grammar")
        exemplars = [
            ExemplarTriple(
                x=e.x,
                y=e.y_gold,
                spec_grammar=parse_bnf(gold_cache[e.x]["grammar"]),
                deriv_linearized=gold_cache[e.x]["deriv"],
            )
            for e in train
        ]

        def one(idx_example):
            idx, example = idx_example
            if gateway_factory is not None:
                lm = gateway_factory(method, idx, cfg, mode)
            else:
                lm = make_gateway(
                    gateway_kind, corpus, cfg, mode, seed=seed * 10007 + idx,
                    adversarial_rate=adversarial_rate,
                )
            return run_example(method, corpus, exemplars, example, lm, decode_cfg)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(one, enumerate(test)))
        else:
            outcomes = [one(pair) for pair in enumerate(test)]

        n = len(test)
        acc = sum(
            exact_match(o.y_pred, e.y_gold, corpus.grammar) for o, e in zip(outcomes, test)
        ) / n
        valid = sum(
            recognize(o.y_pred, corpus.grammar) is Recognition.COMPLETE for o in outcomes
        ) / n
        report.rows.append(
            MethodRow(
                method=method,
                constraint_setting=_CONSTRAINT_LABEL[method],
                program_accuracy=acc,
                validity=valid,
                mean_complete_calls=sum(o.complete_calls for o in outcomes) / n,
                mean_score_calls=sum(o.score_calls for o in outcomes) / n,
                mean_prompt_words=sum(o.prompt_words for o in outcomes) / n,
                failures=sum(o.failed for o in outcomes),
            )
        )
    return report
