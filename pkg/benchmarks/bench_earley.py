"""Benchmark: compiled vs pure-Python chart kernel on corpus workloads.

Runs recognition and prefix analysis over every bundled corpus program (and
corrupted variants that exercise the correction path) against both kernel
backends and prints a timing table.

    python benchmarks/bench_earley.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

from grammar_steer.earley import kernel as kernel_mod
from grammar_steer.earley._encode import encode
from grammar_steer.evalharness import bundled_corpora, load_corpus


def workloads():
    out = []
    for name in bundled_corpora():
        corpus = load_corpus(name)
        strings = []
        for ex in corpus.examples:
            strings.append(ex.y_gold)
            strings.append(ex.y_gold[: len(ex.y_gold) * 2 // 3] + " Zorp blarg")
        out.append((name, corpus.grammar, strings))
    return out


def run_backend(impl, repeat: int) -> dict[str, float]:
    timings = {}
    for name, grammar, strings in workloads():
        enc = encode(grammar, None)
        start = time.perf_counter()
        for _ in range(repeat):
            for s in strings:
                impl.run(
                    enc.alt_lhs,
                    enc.alt_rhs,
                    enc.nt_alts,
                    enc.terminals,
                    enc.nullable,
                    enc.start,
                    enc.flexible,
                    " ".join(s.split()),
                )
        timings[name] = time.perf_counter() - start
    return timings


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    from grammar_steer.earley import _kernel as pure

    backends = [("pure", pure)]
    try:
        from grammar_steer.earley import _ckernel as compiled

        backends.append(("compiled", compiled))
    except ImportError:
        print("compiled kernel not built; benchmarking pure only")

    results = {label: run_backend(impl, args.repeat) for label, impl in backends}
    names = sorted(next(iter(results.values())))
    print(f"{'corpus':<10}" + "".join(f"{label:>12}" for label in results) + f"{'speedup':>10}")
    for name in names:
        row = f"{name:<10}"
        for label in results:
            row += f"{results[label][name]:>11.3f}s"
        if len(results) == 2:
            pure_t = results['pure'][name]
            comp_t = results['compiled'][name]
            row += f"{pure_t / comp_t:>9.2f}x"
        print(row)
    print(f"\nactive backend at import: {kernel_mod.backend_name()}")


if __name__ == "__main__":
    main()
