"""Deterministic mock gateways.

Three flavors: scripted (exact transcripts), grammar sampler (members of a
target language, the well-behaved LM), and adversarial (wraps another
gateway and corrupts its output at a configurable rate, which is what drives
the correction loop in fuzz tests).  A gold-echo mock answers prompts with
the reference grammar and program for the query they end with.
"""

from __future__ import annotations

import random
import threading

from ..earley import enumerate_language
from ..errors import BudgetExceeded, GrammarSteerError
from ..grammar import Grammar
from .base import LmGateway, LmRequest, ScoreRequest

_GARBLE = ("Zorp", "Quux", "Blarg", "Janet", "Fizz", "'s")


class ScriptExhausted(GrammarSteerError):
    pass


class ScriptedLm(LmGateway):
    """Replays a fixed list of responses in order.

    ``scores`` keys may be full ``(prompt, continuation)`` pairs or bare
    continuations; mocks return candidate-level means directly.  When the
    script runs out the mock returns empty text (an end-of-text signal)
    unless ``exhausted="error"``.
    """

    def __init__(
        self,
        responses: list[str],
        scores: dict | None = None,
        default_score: float = -1.0,
        exhausted: str = "empty",
        max_calls: int | None = None,
    ):
        super().__init__(max_calls)
        self._responses = list(responses)
        self._cursor = 0
        self._script_lock = threading.Lock()
        self._scores = scores
        self._default_score = default_score
        self._exhausted = exhausted
        self.supports_logprobs = scores is not None

    def _complete_text(self, req: LmRequest, call_id: int) -> str:
        with self._script_lock:
            if self._cursor >= len(self._responses):
                if self._exhausted == "error":
                    raise ScriptExhausted("scripted responses exhausted")
                return ""
            text = self._responses[self._cursor]
            self._cursor += 1
            return text

    def score(self, req: ScoreRequest) -> float:
        if self._scores is None:
            return super().score(req)
        if (req.prompt, req.continuation) in self._scores:
            return self._scores[(req.prompt, req.continuation)]
        return self._scores.get(req.continuation, self._default_score)


class GrammarSamplerLm(LmGateway):
    """Emits members of a target grammar's language.

    Sampling is uniform over the enumerated language up to ``max_len`` when
    enumeration fits the node budget, otherwise a bounded random derivation
    walk.  Scores are length-penalized and deterministic.
    """

    supports_logprobs = True

    def __init__(
        self,
        grammar: Grammar,
        seed: int = 0,
        max_len: int = 60,
        max_calls: int | None = None,
    ):
        super().__init__(max_calls)
        self.grammar = grammar
        self.max_len = max_len
        self._rng = random.Random(seed)
        self._rng_lock = threading.Lock()
        try:
            members = sorted(enumerate_language(grammar, max_len, node_budget=120_000))
        except BudgetExceeded:
            members = []
        self._members = members

    def sample_member(self) -> str:
        with self._rng_lock:
            if self._members:
                return self._rng.choice(self._members)
            return self._derivation_walk(self._rng)

    def _derivation_walk(self, rng: random.Random) -> str:
        from ..earley._encode import NONTERM, encode

        enc = encode(self.grammar, None)
        min_str = enc.min_strings()
        for _attempt in range(64):
            form = list(enc.alt_rhs[rng.choice(enc.nt_alts[enc.start])])
            guard = 400
            while guard:
                guard -= 1
                idx = next((i for i, (k, _v) in enumerate(form) if k == NONTERM), None)
                if idx is None:
                    break
                nt = form[idx][1]
                low = sum(
                    len(enc.terminals[v]) if k else len(min_str[v] or "")
                    for k, v in form
                )
                choices = list(enc.nt_alts[nt])
                if low > self.max_len:
                    # steer to the cheapest alternative to close out
                    choices.sort(key=lambda a: len("".join(
                        enc.terminals[v] if k else (min_str[v] or "") for k, v in enc.alt_rhs[a]
                    )))
                    choices = choices[:1]
                aid = rng.choice(choices)
                form[idx : idx + 1] = list(enc.alt_rhs[aid])
            if all(k for k, _v in form):
                return " ".join(enc.terminals[v] for _k, v in form)
        return min_str[enc.start] or ""

    def _complete_text(self, req: LmRequest, call_id: int) -> str:
        return self.sample_member()

    def score(self, req: ScoreRequest) -> float:
        return -0.05 * len(req.continuation)


class AdversarialLm(LmGateway):
    """Corrupts another gateway's completions token-by-token.

    Each whitespace token is independently garbled with probability
    ``rate`` (replaced, misspelled, or prefixed with junk).  Deterministic
    given (seed, call id).  Scoring passes through uncorrupted.
    """

    def __init__(
        self,
        inner: LmGateway,
        rate: float = 0.2,
        seed: int = 0,
        max_calls: int | None = None,
    ):
        super().__init__(max_calls)
        self.inner = inner
        self.rate = rate
        self.seed = seed
        self.supports_logprobs = inner.supports_logprobs

    def _complete_text(self, req: LmRequest, call_id: int) -> str:
        text = self.inner._complete_text(req, call_id)
        rng = random.Random(f"{self.seed}:{call_id}")
        tokens = text.split(" ")
        out = []
        for tok in tokens:
            if tok and rng.random() < self.rate:
                mode = rng.randrange(3)
                if mode == 0:
                    tok = rng.choice(_GARBLE)
                elif mode == 1 and len(tok) > 1:
                    cut = rng.randrange(1, len(tok))
                    tok = tok[:cut] + tok[cut:].swapcase()
                else:
                    tok = tok + rng.choice(_GARBLE)
            out.append(tok)
        return " ".join(out)

    def score(self, req: ScoreRequest) -> float:
        return self.inner.score(req)


class GoldEchoLm(LmGateway):
    """Answers with the reference output for the query the prompt ends with.

    Stage detection is positional: a prompt ending in the program label cue
    gets the gold program, one ending in the rules label cue gets the gold
    grammar text, anything else gets the full two-section panel.
    """

    supports_logprobs = True

    def __init__(self, gold: dict[str, dict], labels, mode: str = "grammar", max_calls: int | None = None):
        super().__init__(max_calls)
        self.gold = gold  # x -> {"grammar": text, "y": program, "deriv": linearized}
        self.labels = labels
        self.mode = mode

    def _lookup(self, prompt: str) -> tuple[dict, str]:
        idx = prompt.rfind(f"{self.labels.query} ")
        if idx < 0:
            raise KeyError("no query label in prompt")
        line_end = prompt.find("\n", idx)
        if line_end < 0:
            line_end = len(prompt)
        x = prompt[idx + len(self.labels.query) + 1 : line_end].strip()
        return self.gold[x], prompt[line_end:]

    @staticmethod
    def _continue_from(target: str, tail: str, label: str) -> str:
        """Emit the rest of ``target`` when the prompt already holds a prefix
        of it after ``label`` (the resumption prompt of a correction round)."""
        partial = tail[tail.rfind(label) + len(label):]
        if partial.startswith("\n"):
            partial = partial[1:]
        if partial and target.startswith(partial):
            return target[len(partial):]
        return target

    def _complete_text(self, req: LmRequest, call_id: int) -> str:
        entry, tail = self._lookup(req.prompt)
        answer = entry["deriv"] if self.mode == "derivation_tree" else entry["y"]
        if self.labels.program in tail:
            return self._continue_from(answer, tail, self.labels.program)
        if self.labels.rules in tail:
            return self._continue_from(entry["grammar"], tail, self.labels.rules)
        if self.mode == "grammar":
            return f"{self.labels.rules}\n{entry['grammar']}{self.labels.program}\n{answer}"
        return f"{self.labels.program}\n{answer}"

    def score(self, req: ScoreRequest) -> float:
        return -0.05 * len(req.continuation)
