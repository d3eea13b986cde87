"""Language-model gateway interface.

Every gateway keeps a session call counter (monotone call ids feed decode
traces) and enforces an optional per-session call budget.  ``complete``
truncates at the first stop sequence and then at the ``max_new_text``
character cap; ``score`` returns a mean per-token log-probability when the
provider supports it.  Gateways are safe for concurrent requests.
"""

from __future__ import annotations

import abc
import threading
from dataclasses import dataclass, field

from ..errors import BudgetExceeded, CapabilityUnavailable
from .embedding import trigram_embed


@dataclass(frozen=True, slots=True)
class Sampling:
    temperature: float = 0.0
    presence_penalty: float = 0.0
    frequency_penalty: float = 0.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True, slots=True)
class LmRequest:
    prompt: str
    stop: tuple[str, ...] = ()
    max_new_text: int = 4096
    sampling: Sampling = field(default_factory=Sampling)
    seed: int | None = None

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")


@dataclass(frozen=True, slots=True)
class LmResponse:
    text: str
    call_id: int
    token_logprobs: tuple[tuple[str, float], ...] | None = None


@dataclass(frozen=True, slots=True)
class ScoreRequest:
    prompt: str
    continuation: str

    def __post_init__(self):
        if not self.continuation:
            raise ValueError("continuation must be non-empty")


class LmGateway(abc.ABC):
    supports_logprobs: bool = False

    def __init__(self, max_calls: int | None = None):
        self._lock = threading.Lock()
        self._calls = 0
        self.max_calls = max_calls

    @property
    def calls_made(self) -> int:
        return self._calls

    def _next_call_id(self) -> int:
        with self._lock:
            if self.max_calls is not None and self._calls >= self.max_calls:
                raise BudgetExceeded(f"session call budget of {self.max_calls} exhausted")
            self._calls += 1
            return self._calls

    def complete(self, req: LmRequest) -> LmResponse:
        call_id = self._next_call_id()
        text = self._complete_text(req, call_id)
        for stop in req.stop:
            cut = text.find(stop)
            if cut >= 0:
                text = text[:cut]
        return LmResponse(text=text[: req.max_new_text], call_id=call_id)

    @abc.abstractmethod
    def _complete_text(self, req: LmRequest, call_id: int) -> str:
        raise NotImplementedError

    def score(self, req: ScoreRequest) -> float:
        raise CapabilityUnavailable(f"{type(self).__name__} cannot return logprobs")

    def embed(self, text: str) -> list[float]:
        return trigram_embed(text)
