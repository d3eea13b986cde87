from .base import LmGateway, LmRequest, LmResponse, Sampling, ScoreRequest
from .cache import CachingLm, TranscriptCache, request_key
from .embedding import dot, trigram_embed
from .http import HttpLm
from .mocks import AdversarialLm, GoldEchoLm, GrammarSamplerLm, ScriptedLm

__all__ = [
    "AdversarialLm",
    "CachingLm",
    "GoldEchoLm",
    "GrammarSamplerLm",
    "HttpLm",
    "LmGateway",
    "LmRequest",
    "LmResponse",
    "Sampling",
    "ScoreRequest",
    "ScriptedLm",
    "TranscriptCache",
    "dot",
    "request_key",
    "trigram_embed",
]
