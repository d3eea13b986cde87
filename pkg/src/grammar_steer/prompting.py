"""Prompt assembly and LM-output splitting.

Three prompt modes: standard (query/program pairs), grammar (each exemplar
interleaves its minimal specialized grammar between query and program), and
derivation_tree (programs replaced by bracket-linearized derivations).
Sections are joined by single blank lines; output is byte-deterministic.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

from .errors import LabelNotFound, MissingGrammar, MissingLinearization
from .grammar import Grammar, parse_bnf, serialize

log = logging.getLogger(__name__)

INSTRUCTION_PREDICT_RULES = (
    "You are an expert programmer, and you need to write a program for the given "
    "natural language query. First, you should write a grammar that contains all "
    "the necessary BNF rules. Then, you should write programs that conform to "
    "your predicted rules."
)
INSTRUCTION_CHOOSE_RULES = (
    "You are an expert programmer, and you need to write a program for the given "
    "natural language query. First, you should write grammar rules by choosing "
    "from the following BNF rules. Then, you should write programs that conform "
    "to your predicted rules."
)
INSTRUCTION_STANDARD = (
    "You are an expert programmer, and you need to write a program for the given "
    "natural language query."
)


@dataclass(frozen=True, slots=True)
class ExemplarTriple:
    """One in-context demonstration."""

    x: str
    y: str
    spec_grammar: Grammar | None = None
    deriv_linearized: str | None = None


@dataclass(frozen=True, slots=True)
class SectionLabels:
    query: str = "query:"
    rules: str = "BNF grammar rules:"
    program: str = "program based on the BNF grammar rules:"
    rules_begin: str = "[BEGIN RULES]"
    rules_end: str = "[END RULES]"


# Planning-domain preset (Q:/DSL:/A: layout)
PLANNING_LABELS = SectionLabels(query="Q:", rules="DSL:", program="A:")


@dataclass(frozen=True, slots=True)
class PromptConfig:
    mode: str = "grammar"  # standard | grammar | derivation_tree
    instruction: str = INSTRUCTION_PREDICT_RULES
    include_full_grammar: bool = False
    labels: SectionLabels = field(default_factory=SectionLabels)
    separator: str = "\n\n"

    def __post_init__(self):
        if self.mode not in ("standard", "grammar", "derivation_tree"):
            raise ValueError(f"bad prompt mode: {self.mode!r}")


def make_config(mode: str, include_full_grammar: bool = False, **overrides) -> PromptConfig:
    """Sensible per-mode defaults: instruction wording and program label."""
    if mode == "grammar":
        instruction = INSTRUCTION_CHOOSE_RULES if include_full_grammar else INSTRUCTION_PREDICT_RULES
        labels = SectionLabels()
    else:
        instruction = INSTRUCTION_STANDARD
        labels = SectionLabels(program="program:")
    cfg = PromptConfig(
        mode=mode, instruction=instruction, include_full_grammar=include_full_grammar, labels=labels
    )
    return replace(cfg, **overrides) if overrides else cfg


def config_from_dict(data: dict) -> PromptConfig:
    labels = SectionLabels(**data.get("labels", {}))
    base = make_config(
        data.get("mode", "grammar"), data.get("include_full_grammar", False)
    )
    return PromptConfig(
        mode=base.mode,
        instruction=data.get("instruction", base.instruction),
        include_full_grammar=base.include_full_grammar,
        labels=labels if "labels" in data else base.labels,
        separator=data.get("separator", base.separator),
    )


def prompt_word_count(prompt: str) -> int:
    """Whitespace word count, the cost-accounting token estimate."""
    return len(prompt.split())


def build_prompt(
    cfg: PromptConfig,
    exemplars: list[ExemplarTriple],
    x_test: str,
    g_full: Grammar | None = None,
) -> str:
    if not exemplars:
        raise ValueError("at least one exemplar is required")
    L = cfg.labels
    blocks: list[str] = []
    if cfg.instruction:
        blocks.append(cfg.instruction)
    if cfg.include_full_grammar:
        if g_full is None:
            raise MissingGrammar("include_full_grammar is set but no full grammar was attached")
        blocks.append(f"{L.rules_begin}\n{serialize(g_full)}{L.rules_end}")
    for ex in exemplars:
        lines = [f"{L.query} {ex.x}"]
        if cfg.mode == "grammar":
            if ex.spec_grammar is None:
                raise MissingGrammar(f"exemplar lacks a specialized grammar: {ex.x!r}")
            lines.append(L.rules)
            lines.append(serialize(ex.spec_grammar).rstrip("\n"))
            lines.append(L.program)
            lines.append(ex.y)
        elif cfg.mode == "derivation_tree":
            if ex.deriv_linearized is None:
                raise MissingLinearization(f"exemplar lacks a linearized derivation: {ex.x!r}")
            lines.append(L.program)
            lines.append(ex.deriv_linearized)
        else:
            lines.append(L.program)
            lines.append(ex.y)
        blocks.append("\n".join(lines))
    blocks.append(f"{L.query} {x_test}")
    prompt = cfg.separator.join(blocks)
    log.debug("built %s prompt: %d words", cfg.mode, prompt_word_count(prompt))
    return prompt


def split_output(text: str, cfg: PromptConfig) -> tuple[str | None, str]:
    """Split LM output into (grammar text, program text).

    In grammar mode the split happens at the program label; section labels
    and surrounding whitespace are stripped, and anything after a stray
    follow-up query label is dropped.  Raises LabelNotFound when the program
    label is absent in grammar mode; callers may then treat the entire text
    as the program.
    """
    L = cfg.labels
    idx = text.find(L.program)
    if cfg.mode != "grammar":
        if idx < 0:
            return None, _clip(text, L).strip()
        return None, _clip(text[idx + len(L.program):], L).strip()
    if idx < 0:
        raise LabelNotFound(f"program label {L.program!r} not found in LM output")
    grammar_part = text[:idx].strip()
    if grammar_part.startswith(L.rules):
        grammar_part = grammar_part[len(L.rules):].strip()
    program = _clip(text[idx + len(L.program):], L).strip()
    return (grammar_part or None), program


def _clip(text: str, labels: SectionLabels) -> str:
    """Drop hallucinated follow-up exemplars after a stray query label."""
    idx = text.find(f"\n{labels.query}")
    return text[:idx] if idx >= 0 else text


# ---------------------------------------------------------------------------
# Exemplar files: JSON lines with fields {x, y, grammar?, deriv?}


def load_exemplars(path: str) -> list[ExemplarTriple]:
    out: list[ExemplarTriple] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            grammar = parse_bnf(row["grammar"]) if row.get("grammar") else None
            out.append(
                ExemplarTriple(
                    x=row["x"],
                    y=row["y"],
                    spec_grammar=grammar,
                    deriv_linearized=row.get("deriv"),
                )
            )
    return out
