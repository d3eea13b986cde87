"""Speculative constrained decoding with Earley correction.

The loop asks the LM for a full continuation of the current partial program,
accepts it when the concatenation is a member of the target language, and
otherwise snaps back to the longest valid prefix, scores the legal next
terminals, appends the winner and re-speculates.  Every correction extends
the viable prefix by at least one terminal, so progress is monotone and a
deterministic LM that keeps repeating an invalid speculation still advances.
After the round cap the configured fallback closes the program with the
shortest completion (or fails).

The same loop decodes grammars: run it over the metagrammar of the full
grammar, then parse the emitted text, which guarantees the result is a rule
subset.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .earley import Recognition, recognize, shortest_completion
from .earley.engine import boundary_analysis
from .errors import DecodeFailed
from .gateway import LmGateway, LmRequest, Sampling, ScoreRequest, dot
from .grammar import Grammar, parse_bnf
from .metagrammar import cached_metagrammar

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class DecodeConfig:
    max_correction_rounds: int = 20
    prefilter_k: int = 16
    constraint: str = "predicted_grammar"  # none | full_grammar | predicted_grammar
    fallback: str = "shortest_completion"  # fail | shortest_completion
    meta_max_reps: int = 8
    repair_undefined: bool = True
    stop: tuple[str, ...] = ()
    max_new_text: int = 4096
    sampling: Sampling = field(default_factory=Sampling)
    seed: int | None = None

    def __post_init__(self):
        if self.max_correction_rounds < 1:
            raise ValueError("max_correction_rounds must be >= 1")
        if self.prefilter_k < 1:
            raise ValueError("prefilter_k must be >= 1")
        if self.constraint not in ("none", "full_grammar", "predicted_grammar"):
            raise ValueError(f"bad constraint: {self.constraint!r}")
        if self.fallback not in ("fail", "shortest_completion"):
            raise ValueError(f"bad fallback: {self.fallback!r}")


def config_from_dict(data: dict) -> DecodeConfig:
    sampling = Sampling(**data.get("sampling", {}))
    kwargs = {k: v for k, v in data.items() if k != "sampling"}
    if "stop" in kwargs:
        kwargs["stop"] = tuple(kwargs["stop"])
    return DecodeConfig(sampling=sampling, **kwargs)


@dataclass(slots=True)
class TraceStep:
    kind: str  # speculate | correct | score | fallback
    prefix_len: int = 0
    candidate_count: int = 0
    chosen: str | None = None


@dataclass(slots=True)
class DecodeTrace:
    steps: list[TraceStep] = field(default_factory=list)
    complete_calls: int = 0
    score_calls: int = 0

    @property
    def corrections(self) -> int:
        return sum(1 for s in self.steps if s.kind == "correct")

    def to_dict(self) -> dict:
        return {
            "complete_calls": self.complete_calls,
            "score_calls": self.score_calls,
            "steps": [
                {
                    "kind": s.kind,
                    "prefix_len": s.prefix_len,
                    "candidate_count": s.candidate_count,
                    "chosen": s.chosen,
                }
                for s in self.steps
            ],
        }


def _join(prefix: str, terminal: str, g: Grammar) -> str:
    if g.whitespace != "flexible" or not prefix or prefix.endswith((" ", "\n")):
        return prefix + terminal
    return prefix + " " + terminal


def select_candidate(
    prompt: str,
    prefix: str,
    candidates: frozenset[str] | set[str],
    bad_prediction: str,
    lm: LmGateway,
    cfg: DecodeConfig,
    trace: DecodeTrace | None = None,
) -> str:
    """Pick the best next terminal among the legal continuations.

    Oversized candidate sets are prefiltered to ``prefilter_k`` by embedding
    similarity between the extended prefix and the failed prediction; the
    survivors are ranked by the gateway's mean token log-probability, or by
    the embedding ranking itself when the provider has no logprobs.  Ties
    break lexicographically.
    """
    cands = sorted(candidates)
    if not cands:
        raise ValueError("candidate set must be non-empty")
    if len(cands) == 1:
        return cands[0]

    def embed_rank(pool: list[str]) -> list[str]:
        bad_vec = lm.embed(bad_prediction)
        return sorted(pool, key=lambda w: (-dot(lm.embed(prefix + w), bad_vec), w))

    if len(cands) > cfg.prefilter_k:
        cands = embed_rank(cands)[: cfg.prefilter_k]
    if lm.supports_logprobs:
        scored = []
        for w in cands:
            value = lm.score(ScoreRequest(prompt=prompt + prefix, continuation=w))
            if trace is not None:
                trace.score_calls += 1
                trace.steps.append(TraceStep("score", len(prefix), len(cands), w))
            scored.append((value, w))
        scored.sort(key=lambda t: (-t[0], t[1]))
        return scored[0][1]
    return embed_rank(cands)[0]


def _speculate(prompt: str, partial: str, lm: LmGateway, cfg: DecodeConfig, trace: DecodeTrace) -> str:
    req = LmRequest(
        prompt=prompt + partial,
        stop=cfg.stop,
        max_new_text=cfg.max_new_text,
        sampling=cfg.sampling,
        seed=cfg.seed,
    )
    resp = lm.complete(req)
    trace.complete_calls += 1
    trace.steps.append(TraceStep("speculate", len(partial)))
    return resp.text


def constrained_decode(
    prompt: str,
    g: Grammar,
    lm: LmGateway,
    cfg: DecodeConfig | None = None,
    initial_text: str | None = None,
) -> tuple[str, DecodeTrace]:
    """Decode a member of L(g), correcting the LM as needed.

    The returned string always satisfies ``recognize(y, g) == COMPLETE``;
    DecodeFailed is raised only when rounds run out under ``fallback="fail"``.
    ``initial_text`` reuses an already-made speculation as round one without
    spending a fresh LM call (the panel output of an unconstrained pass).
    """
    cfg = cfg or DecodeConfig()
    if cfg.constraint == "none":
        raise ValueError("constrained_decode requires a grammar constraint")
    trace = DecodeTrace()
    y = ""
    corrections = 0
    cand = ""
    reused = initial_text
    while True:
        if reused is not None:
            bar, reused = reused, None
            trace.steps.append(TraceStep("speculate", 0))
        else:
            bar = _speculate(prompt, y, lm, cfg, trace)
        cand = y + bar
        if recognize(cand, g) is Recognition.COMPLETE:
            return cand, trace
        if corrections >= cfg.max_correction_rounds:
            break
        corrections += 1
        analysis = boundary_analysis(cand, g)
        prefix = analysis.prefix
        if not analysis.continuations:
            # no terminal may follow: the prefix itself must be the program
            trace.steps.append(TraceStep("correct", len(prefix), 0, None))
            if recognize(prefix, g) is Recognition.COMPLETE:
                return prefix, trace
            raise DecodeFailed(f"dead end with no continuations at {prefix!r}")
        w = select_candidate(prompt, prefix, analysis.continuations, cand, lm, cfg, trace)
        y = _join(prefix, w, g)
        trace.steps.append(TraceStep("correct", len(prefix), len(analysis.continuations), w))
        # always re-speculate: the loop ends on an accepted speculation, the
        # round cap, or a dead end, keeping complete_calls = 1 + corrections

    if cfg.fallback == "fail":
        raise DecodeFailed(f"no valid program after {cfg.max_correction_rounds} corrections")
    analysis = boundary_analysis(cand, g)
    base = analysis.prefix
    tail = shortest_completion(base, g)
    y = base + tail
    trace.steps.append(TraceStep("fallback", len(base), 0, tail))
    if recognize(y, g) is not Recognition.COMPLETE:
        raise DecodeFailed(f"fallback completion failed for {base!r}")
    return y, trace


def decode_grammar(
    prompt: str,
    g_full: Grammar,
    lm: LmGateway,
    cfg: DecodeConfig | None = None,
    initial_text: str | None = None,
) -> tuple[Grammar, DecodeTrace]:
    """Decode a specialized grammar constrained to be a subset of ``g_full``.

    Runs the correction loop over the metagrammar (byte-exact matching), then
    parses the emitted text; membership in the metagrammar's language is
    precisely the subset property.
    """
    cfg = cfg or DecodeConfig()
    meta = cached_metagrammar(g_full, cfg.meta_max_reps)
    text, trace = constrained_decode(prompt, meta.grammar, lm, cfg, initial_text=initial_text)
    decoded = parse_bnf(text)
    if cfg.repair_undefined:
        decoded = _repair_undefined(decoded, g_full)
    return decoded, trace


def _repair_undefined(g_hat: Grammar, g_full: Grammar) -> Grammar:
    """Add full-grammar rules for nonterminals a decoded subset references
    but never defines (a context-free metagrammar cannot enforce cross-block
    agreement).  Adding whole source rules keeps the subset property."""
    rules = list(g_hat.rules)
    defined = {r.lhs.text for r in rules}
    frontier = True
    while frontier:
        frontier = False
        missing: list[str] = []
        for r in rules:
            for alt in r.alternatives:
                for it in alt.items:
                    name = it.symbol.text
                    if not it.symbol.is_terminal and name not in defined and g_full.has_rule(name):
                        if name not in missing:
                            missing.append(name)
        for name in missing:
            rules.append(g_full.rule(name))
            defined.add(name)
            frontier = True
    if len(rules) == len(g_hat.rules):
        return g_hat
    # keep canonical source order
    order = {r.lhs.text: i for i, r in enumerate(g_full.rules)}
    rules.sort(key=lambda r: order[r.lhs.text])
    return Grammar(tuple(rules), g_hat.start, whitespace=g_hat.whitespace)


def standard_decode(
    prompt: str, lm: LmGateway, cfg: DecodeConfig | None = None
) -> tuple[str, DecodeTrace]:
    """One unconstrained completion; no validity guarantee."""
    cfg = cfg or DecodeConfig()
    trace = DecodeTrace()
    text = _speculate(prompt, "", lm, cfg, trace)
    return text, trace
