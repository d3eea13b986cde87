"""HTTP provider for completion-style LM APIs.

Endpoint and credentials come from environment variables: the URL from
``GRAMMAR_STEER_LM_URL`` and the API key from whichever variable
``key_env`` names (default ``GRAMMAR_STEER_API_KEY``).  The wire format is
the common completions shape: ``{model, prompt, max_tokens, temperature,
...}`` in, ``{choices: [{text, logprobs}]}`` out.  Scoring echoes the
concatenated prompt+continuation with logprobs and averages the token-level
log-likelihoods of the continuation's tokens.
"""

from __future__ import annotations

import os
from typing import Callable

from ..errors import CapabilityUnavailable, ProviderError
from .base import LmGateway, LmRequest, LmResponse, ScoreRequest

URL_ENV = "GRAMMAR_STEER_LM_URL"
DEFAULT_KEY_ENV = "GRAMMAR_STEER_API_KEY"


def _default_post(url: str, headers: dict, payload: dict) -> dict:
    import requests

    try:
        resp = requests.post(url, headers=headers, json=payload, timeout=120)
        resp.raise_for_status()
        return resp.json()
    except Exception as exc:  # noqa: BLE001 - network layer boundary
        raise ProviderError(f"LM request failed: {exc}") from exc


class HttpLm(LmGateway):
    """Completion-API client.  ``post`` is injectable for tests."""

    def __init__(
        self,
        url: str | None = None,
        model: str = "",
        key_env: str = DEFAULT_KEY_ENV,
        logprobs_capable: bool = False,
        post: Callable[[str, dict, dict], dict] | None = None,
        max_calls: int | None = None,
    ):
        super().__init__(max_calls)
        self.url = url or os.environ.get(URL_ENV, "")
        if not self.url:
            raise ProviderError(f"no endpoint URL configured (set {URL_ENV})")
        self.model = model
        self.api_key = os.environ.get(key_env, "")
        self.post = post or _default_post
        self.supports_logprobs = logprobs_capable

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _complete_text(self, req: LmRequest, call_id: int) -> str:
        payload = {
            "model": self.model,
            "prompt": req.prompt,
            "max_tokens": req.max_new_text,
            "temperature": req.sampling.temperature,
            "presence_penalty": req.sampling.presence_penalty,
            "frequency_penalty": req.sampling.frequency_penalty,
        }
        if req.stop:
            payload["stop"] = list(req.stop)
        if req.seed is not None:
            payload["seed"] = req.seed
        data = self.post(self.url, self._headers(), payload)
        try:
            return data["choices"][0]["text"]
        except (KeyError, IndexError) as exc:
            raise ProviderError(f"malformed completion response: {data!r}") from exc

    def score(self, req: ScoreRequest) -> float:
        if not self.supports_logprobs:
            raise CapabilityUnavailable("provider does not expose logprobs")
        payload = {
            "model": self.model,
            "prompt": req.prompt + req.continuation,
            "max_tokens": 0,
            "echo": True,
            "logprobs": 0,
        }
        data = self.post(self.url, self._headers(), payload)
        try:
            lp = data["choices"][0]["logprobs"]
            offsets = lp["text_offset"]
            probs = lp["token_logprobs"]
        except (KeyError, IndexError) as exc:
            raise ProviderError(f"malformed logprobs response: {data!r}") from exc
        start = len(req.prompt)
        picked = [p for off, p in zip(offsets, probs) if off >= start and p is not None]
        if not picked:
            raise ProviderError("continuation produced no scored tokens")
        return sum(picked) / len(picked)
