"""Transcript cache: deterministic offline replay of LM sessions.

Keyed by a hash of (prompt, stop, max_new_text, sampling, seed).  Transcripts
are JSON lines ``{request_hash, request, response}``; hits increment the
logical call counter without touching the wrapped provider, so a fully
cached session replays byte-identically with zero network calls.  Reads are
concurrent; writes are serialized.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import asdict
from pathlib import Path

from .base import LmGateway, LmRequest, LmResponse, ScoreRequest


def request_key(req: LmRequest) -> str:
    payload = {
        "prompt": req.prompt,
        "stop": list(req.stop),
        "max_new_text": req.max_new_text,
        "sampling": asdict(req.sampling),
        "seed": req.seed,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def score_key(req: ScoreRequest) -> str:
    blob = json.dumps(
        {"kind": "score", "prompt": req.prompt, "continuation": req.continuation},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class TranscriptCache:
    def __init__(self, directory: str | Path):
        self.path = Path(directory) / "transcripts.jsonl"
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._entries: dict[str, dict] = {}
        self._write_lock = threading.Lock()
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    row = json.loads(line)
                    self._entries[row["request_hash"]] = row

    def get(self, key: str) -> dict | None:
        return self._entries.get(key)

    def put(self, key: str, request: dict, response: dict):
        row = {"request_hash": key, "request": request, "response": response}
        with self._write_lock:
            self._entries[key] = row
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(row, sort_keys=True) + "\n")


class CachingLm(LmGateway):
    """Wraps a gateway with a transcript cache.

    ``calls_made`` counts logical completions (hits included);
    ``network_calls`` counts actual provider hits.
    """

    def __init__(self, inner: LmGateway, cache: TranscriptCache, max_calls: int | None = None):
        super().__init__(max_calls)
        self.inner = inner
        self.cache = cache
        self.supports_logprobs = inner.supports_logprobs

    @property
    def network_calls(self) -> int:
        return self.inner.calls_made

    def complete(self, req: LmRequest) -> LmResponse:
        call_id = self._next_call_id()
        key = request_key(req)
        hit = self.cache.get(key)
        if hit is not None:
            return LmResponse(text=hit["response"]["text"], call_id=call_id)
        resp = self.inner.complete(req)
        self.cache.put(
            key,
            {"prompt": req.prompt, "stop": list(req.stop), "seed": req.seed},
            {"text": resp.text},
        )
        return LmResponse(text=resp.text, call_id=call_id)

    def _complete_text(self, req: LmRequest, call_id: int) -> str:  # pragma: no cover
        raise NotImplementedError("CachingLm overrides complete() directly")

    def score(self, req: ScoreRequest) -> float:
        key = score_key(req)
        hit = self.cache.get(key)
        if hit is not None:
            return float(hit["response"]["score"])
        value = self.inner.score(req)
        self.cache.put(key, {"prompt": req.prompt, "continuation": req.continuation}, {"score": value})
        return value

    def embed(self, text: str) -> list[float]:
        return self.inner.embed(text)
