"""Exception types shared across the toolkit."""

from __future__ import annotations


class GrammarSteerError(Exception):
    """Base class for all domain errors (CLI maps these to exit code 1)."""


class BnfSyntaxError(GrammarSteerError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class DuplicateLhsError(GrammarSteerError):
    """Same left-hand side defined twice while merging is disabled."""


class NoParse(GrammarSteerError):
    """String is not a member of the grammar's language."""


class NotViable(GrammarSteerError):
    """String is not a viable prefix of the grammar's language."""


class EmptyLanguage(GrammarSteerError):
    """Grammar generates no strings at all."""


class BudgetExceeded(GrammarSteerError):
    """A configured expansion or call budget was exhausted."""


class MissingGrammar(GrammarSteerError):
    """Prompt assembly needed a specialized grammar that the exemplar lacks."""


class MissingLinearization(GrammarSteerError):
    """Derivation-tree prompt mode needs a linearized tree on every exemplar."""


class LabelNotFound(GrammarSteerError):
    """LM output did not contain the expected program section label."""


class ProviderError(GrammarSteerError):
    """Network or authentication failure talking to a real LM provider."""


class CapabilityUnavailable(GrammarSteerError):
    """Provider cannot serve the requested capability (e.g. logprobs)."""


class DecodeFailed(GrammarSteerError):
    """Correction rounds exhausted with fallback disabled."""


class RepetitionBoundRequired(GrammarSteerError):
    """Metagrammar construction over extended rules needs a repetition bound."""


class CorpusInvalid(GrammarSteerError):
    """A bundled or user corpus failed its self-check."""
