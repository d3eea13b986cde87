"""Chart kernel backend selection: compiled extension when available.

Set ``GRAMMAR_STEER_PURE=1`` to force the pure-Python kernel (used by the
benchmark to compare both).  Results are cached per (grammar, input) since
decode loops re-check many overlapping strings.
"""

from __future__ import annotations

import functools
import os

from . import _kernel
from ._encode import EncodedGrammar

if os.environ.get("GRAMMAR_STEER_PURE"):
    _impl = _kernel
    BACKEND = "pure"
else:
    try:
        from . import _ckernel as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernel
        BACKEND = "pure"


def backend_name() -> str:
    return BACKEND


def run_uncached(enc: EncodedGrammar, text: str) -> _kernel.ChartResult:
    return _impl.run(
        enc.alt_lhs,
        enc.alt_rhs,
        enc.nt_alts,
        enc.terminals,
        enc.nullable,
        enc.start,
        enc.flexible,
        text,
    )


@functools.lru_cache(maxsize=1 << 15)
def _run_cached(enc: EncodedGrammar, text: str) -> _kernel.ChartResult:
    return run_uncached(enc, text)


def run_chart(enc: EncodedGrammar, text: str) -> _kernel.ChartResult:
    return _run_cached(enc, text)
