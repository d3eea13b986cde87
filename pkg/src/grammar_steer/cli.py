"""Command-line interface.

Subcommands: parse, validate, specialize, metagrammar, prefix, check,
prompt, decode, eval.  Results go to stdout (JSON under ``--json`` where a
command is not already JSON), diagnostics to stderr.  Exit codes: 0 success,
1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .decoder import DecodeConfig, config_from_dict as decode_config_from_dict
from .decoder import constrained_decode, decode_grammar, standard_decode
from .earley import Recognition, longest_valid_prefix, recognize
from .errors import GrammarSteerError, LabelNotFound
from .evalharness import METHODS, bundled_corpora, load_corpus, run_eval
from .gateway import AdversarialLm, CachingLm, GrammarSamplerLm, HttpLm, ScriptedLm, TranscriptCache
from .grammar import parse_bnf, serialize, validate
from .metagrammar import build_metagrammar
from .prompting import PromptConfig, build_prompt, config_from_dict, load_exemplars, make_config, split_output
from .specialize import check_property1, check_property2, specialize

log = logging.getLogger("grammar_steer")


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_config_file(path: str) -> dict:
    text = _read(path)
    if path.endswith(".toml"):
        try:
            import tomllib  # py311+
        except ImportError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _grammar_arg(path: str):
    return parse_bnf(_read(path))


def _emit(data, as_json: bool, text_form: str | None = None):
    if as_json:
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(text_form if text_form is not None else data)


# ---------------------------------------------------------------------------
# Subcommand handlers (each returns the process exit code)


def cmd_parse(args) -> int:
    g = _grammar_arg(args.grammar)
    if args.json:
        data = {
            "start": g.start.text,
            "rules": [
                {"lhs": r.lhs.text, "alternatives": len(r.alternatives)} for r in g.rules
            ],
            "text": serialize(g),
        }
        _emit(data, True)
    else:
        sys.stdout.write(serialize(g))
    return 0


def cmd_validate(args) -> int:
    g = _grammar_arg(args.grammar)
    diags = validate(g)
    if args.json:
        _emit([{"kind": d.kind, "subject": d.subject, "message": d.message} for d in diags], True)
    else:
        for d in diags:
            print(f"{d.kind}: {d.message}", file=sys.stderr)
        if not diags:
            print("ok")
    return 1 if diags else 0


def cmd_specialize(args) -> int:
    g = _grammar_arg(args.grammar)
    y = _read(args.program).strip()
    spec = specialize(y, g, keep_extended=args.keep_extended)
    sys.stdout.write(serialize(spec.grammar))
    if args.check:
        ok1 = check_property1(spec, y)
        ok2 = check_property2(spec, y)
        if not (ok1 and ok2):
            print(f"property check failed: membership={ok1} minimality={ok2}", file=sys.stderr)
            return 1
    return 0


def cmd_metagrammar(args) -> int:
    g = _grammar_arg(args.grammar)
    meta = build_metagrammar(g, args.bound)
    if args.check:
        candidate = _read(args.check)
        result = recognize(candidate, meta.grammar)
        ok = result is Recognition.COMPLETE
        _emit({"member": ok}, args.json, "member" if ok else "not a member")
        return 0 if ok else 1
    sys.stdout.write(serialize(meta.grammar))
    return 0


def cmd_prefix(args) -> int:
    g = _grammar_arg(args.grammar)
    analysis = longest_valid_prefix(args.string, g)
    print(
        json.dumps(
            {
                "prefix": analysis.prefix,
                "continuations": sorted(analysis.continuations),
                "failure_index": analysis.failure_index,
            },
            indent=2,
        )
    )
    return 0


def cmd_check(args) -> int:
    g = _grammar_arg(args.grammar)
    y = _read(args.program).strip()
    result = recognize(y, g)
    if result is Recognition.COMPLETE:
        _emit({"result": "complete"}, args.json, "complete")
        return 0
    analysis = longest_valid_prefix(y, g)
    print(
        json.dumps(
            {
                "result": result.value,
                "prefix": analysis.prefix,
                "continuations": sorted(analysis.continuations),
                "failure_index": analysis.failure_index,
            },
            indent=2,
        )
    )
    return 1


def _prompt_config(args) -> PromptConfig:
    if args.config:
        return config_from_dict(_load_config_file(args.config))
    return make_config(args.mode, include_full_grammar=args.grammar is not None)


def cmd_prompt(args) -> int:
    cfg = _prompt_config(args)
    exemplars = load_exemplars(args.exemplars)
    g = _grammar_arg(args.grammar) if args.grammar else None
    prompt = build_prompt(cfg, exemplars, args.query, g_full=g)
    sys.stdout.write(prompt + "\n")
    return 0


def _decode_gateway(args, g):
    if args.mock == "oracle":
        lm = GrammarSamplerLm(g, seed=args.seed)
    elif args.mock == "adversarial":
        lm = AdversarialLm(GrammarSamplerLm(g, seed=args.seed), rate=args.adversarial_rate, seed=args.seed)
    elif args.mock:
        transcript = json.loads(_read(args.mock))
        if not isinstance(transcript, list):
            raise GrammarSteerError("scripted transcript must be a JSON list of responses")
        lm = ScriptedLm(transcript)
    else:
        lm = HttpLm()
    if args.cache_dir:
        lm = CachingLm(lm, TranscriptCache(args.cache_dir))
    return lm


def cmd_decode(args) -> int:
    g = _grammar_arg(args.grammar)
    decode_cfg = (
        decode_config_from_dict(_load_config_file(args.config)) if args.config else DecodeConfig(seed=args.seed)
    )
    prompt_cfg = make_config("grammar" if args.mode == "grammar" else "standard")
    exemplars = load_exemplars(args.exemplars)
    lm = _decode_gateway(args, g)
    out: dict = {}
    if args.mode == "grammar":
        base = build_prompt(prompt_cfg, exemplars, args.query)
        g_hat, tr1 = decode_grammar(
            base + prompt_cfg.separator + prompt_cfg.labels.rules + "\n", g, lm, decode_cfg
        )
        prompt2 = (
            base
            + prompt_cfg.separator
            + prompt_cfg.labels.rules
            + "\n"
            + serialize(g_hat)
            + prompt_cfg.labels.program
            + "\n"
        )
        program, tr2 = constrained_decode(prompt2, g_hat, lm, decode_cfg)
        out["grammar"] = serialize(g_hat)
        out["program"] = program
        out["trace"] = {"grammar": tr1.to_dict(), "program": tr2.to_dict()}
    else:
        base = build_prompt(prompt_cfg, exemplars, args.query)
        cue = prompt_cfg.separator + prompt_cfg.labels.program + "\n"
        if args.unconstrained:
            text, tr = standard_decode(base + cue, lm, decode_cfg)
            try:
                _g, program = split_output(prompt_cfg.labels.program + "\n" + text, prompt_cfg)
            except LabelNotFound:
                program = text.strip()
        else:
            program, tr = constrained_decode(base + cue, g, lm, decode_cfg)
        out["program"] = program
        out["trace"] = tr.to_dict()
    print(json.dumps(out, indent=2))
    return 0


def cmd_eval(args) -> int:
    corpus = load_corpus(args.corpus)
    methods = args.methods.split(",") if args.methods else list(METHODS)
    decode_cfg = (
        decode_config_from_dict(_load_config_file(args.config)) if args.config else DecodeConfig(seed=args.seed)
    )
    kind = {"oracle": "mock_oracle", "adversarial": "mock_adversarial"}.get(args.mock, args.mock)
    report = run_eval(
        corpus,
        methods=methods,
        gateway_kind=kind,
        decode_cfg=decode_cfg,
        seed=args.seed,
        workers=args.workers,
        adversarial_rate=args.adversarial_rate,
    )
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(report.to_table())
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="grammar-steer",
        description="Specialized BNF grammars, grammar-augmented prompts, and Earley-corrected constrained decoding.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--log-level", default="WARNING", help="logging level (DEBUG..CRITICAL)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a grammar file and print its canonical form")
    p.add_argument("grammar")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("validate", help="report undefined/unreachable/unproductive rules")
    p.add_argument("grammar")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("specialize", help="minimal specialized grammar of a program")
    p.add_argument("grammar")
    p.add_argument("program", help="file containing the program text")
    p.add_argument("--check", action="store_true", help="verify membership and minimality properties")
    p.add_argument("--keep-extended", action="store_true", help="keep extended rules instead of concretizing")
    p.set_defaults(fn=cmd_specialize)

    p = sub.add_parser("metagrammar", help="print the grammar of specialized-grammar texts")
    p.add_argument("grammar")
    p.add_argument("--check", metavar="CANDIDATE", help="recognize a candidate grammar file instead")
    p.add_argument("--bound", type=int, default=8, help="max repetitions when concretizing extended rules")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_metagrammar)

    p = sub.add_parser("prefix", help="longest valid prefix and its continuations")
    p.add_argument("grammar")
    p.add_argument("string")
    p.set_defaults(fn=cmd_prefix)

    p = sub.add_parser("check", help="recognize a program; prints prefix analysis on failure")
    p.add_argument("grammar")
    p.add_argument("program", help="file containing the program text")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("prompt", help="assemble a prompt from exemplars and a query")
    p.add_argument("--config", help="PromptConfig as JSON/TOML")
    p.add_argument("--mode", default="grammar", choices=["standard", "grammar", "derivation_tree"])
    p.add_argument("--exemplars", required=True, help="JSONL exemplars {x, y, grammar?, deriv?}")
    p.add_argument("--query", required=True)
    p.add_argument("--grammar", help="full grammar to embed in the instruction block")
    p.set_defaults(fn=cmd_prompt)

    p = sub.add_parser("decode", help="decode a program (and grammar) for a query")
    p.add_argument("--mode", default="grammar", choices=["standard", "grammar"])
    p.add_argument("--grammar", required=True)
    p.add_argument("--config", help="DecodeConfig as JSON/TOML")
    p.add_argument("--exemplars", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--mock", help="'oracle', 'adversarial', or a JSON transcript file; omit for HTTP")
    p.add_argument("--adversarial-rate", type=float, default=0.3)
    p.add_argument("--unconstrained", action="store_true", help="skip the program constraint in standard mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache-dir", help="transcript cache directory")
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("eval", help="run the method comparison over a corpus")
    p.add_argument("--corpus", required=True, help=f"directory or bundled name: {', '.join(bundled_corpora())}")
    p.add_argument("--methods", help=f"comma list from: {', '.join(METHODS)}")
    p.add_argument("--mock", default="oracle", help="oracle | adversarial")
    p.add_argument("--adversarial-rate", type=float, default=0.3)
    p.add_argument("--config", help="DecodeConfig as JSON/TOML")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_eval)

    return ap


def dispatch(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING))
    try:
        return args.fn(args)
    except GrammarSteerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
