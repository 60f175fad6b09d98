"""Command line interface: train, tag, eval, curve, deps.

Exit codes: 0 on success, 1 on usage problems (bad flags, missing files,
reports that need retraining), 2 on malformed data (corpus, model, or
rule text that does not parse).
"""

from __future__ import annotations

import argparse
import sys

from .corpus import (
    ParseError,
    accuracy,
    baseline_assign,
    build_lexicon,
    error_count,
    parse_corpus,
    serialize_corpus,
)
from .dependency import RecordingDisabledError, dependency_report
from .evaluate import evaluate_curve, tag
from .rules import (
    DEFAULT_TEMPLATE_SPEC,
    DEFAULT_WINDOW,
    DecodeError,
    find_sites,
    parse_template_spec,
    render_template_spec,
)
from .trainer_incremental import train_incremental
from .trainer_naive import train_naive
from .training import (
    Model,
    ModelFormatError,
    Strategy,
    TrainerConfig,
    apply_at_sites,
    load_model,
    save_model,
    trace_tsv,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; this package reserves 2
    # for data errors, so route usage problems through exit code 1.
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# Options that are plain switches; config files give them true/false values.
_BOOL_OPTIONS = {"deps", "raw", "audit", "errored-only", "no-pass-in-key"}


def _read_config_file(path: str) -> list[str]:
    """Turn key=value lines into an argv fragment the flags can override."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise _UsageError(f"cannot read config file: {exc}") from None
    argv = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise _UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if key == "config":
            raise _UsageError(f"{path}:{lineno}: config files cannot nest")
        if key in _BOOL_OPTIONS:
            if value.lower() in ("1", "true", "yes", "on"):
                argv.append(f"--{key}")
            elif value.lower() in ("0", "false", "no", "off"):
                pass
            else:
                raise _UsageError(f"{path}:{lineno}: {key} wants true/false, got {value!r}")
        else:
            argv.extend([f"--{key}", value])
    return argv


def _inject_config(argv: list[str]) -> list[str]:
    """Splice config-file options right after the subcommand name."""
    path = None
    cleaned = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg == "--config":
            if i + 1 >= len(argv):
                raise _UsageError("--config needs a file argument")
            path = argv[i + 1]
            i += 2
            continue
        if arg.startswith("--config="):
            path = arg.split("=", 1)[1]
            i += 1
            continue
        cleaned.append(arg)
        i += 1
    if path is None:
        return argv
    if not cleaned:
        raise _UsageError("--config requires a subcommand")
    return [cleaned[0], *_read_config_file(path), *cleaned[1:]]


def _read_text(path: str, what: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {what}: {exc}") from None


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _UsageError(f"cannot write {path}: {exc}") from None


def _header(cmd: str, pairs: dict) -> str:
    lines = [f"# tbltag {cmd}"]
    for key in sorted(pairs):
        lines.append(f"# {key}={pairs[key]}")
    return "\n".join(lines) + "\n"


def _load_model(path: str) -> Model:
    try:
        return load_model(path)
    except OSError as exc:
        raise _UsageError(f"cannot read model: {exc}") from None


def _cmd_train(args) -> int:
    text = _read_text(args.corpus, "corpus")
    corpus = parse_corpus(text)
    if corpus.n_tokens == 0:
        raise _UsageError(f"corpus {args.corpus} has no tokens")
    lexicon = build_lexicon(corpus, args.default_tag)
    templates = parse_template_spec(args.templates, window=args.window)
    config = TrainerConfig(
        templates=templates,
        threshold=args.threshold,
        strategy=Strategy(args.strategy),
        rng_seed=args.seed,
        max_passes=args.max_passes,
        record_deps=args.deps,
        audit=args.audit,
    )
    audit_log: list[str] | None = [] if args.audit_log else None
    if args.engine == "naive":
        model, trace, curve = train_naive(corpus, lexicon, config)
    else:
        model, trace, curve = train_incremental(corpus, lexicon, config, audit_log=audit_log)

    effective = {
        "corpus": args.corpus,
        "default-tag": args.default_tag,
        "templates": render_template_spec(templates),
        "threshold": args.threshold,
        "strategy": args.strategy,
        "seed": args.seed,
        "engine": args.engine,
        "max-passes": "" if args.max_passes is None else args.max_passes,
        "window": args.window,
        "deps": int(args.deps),
        "model": args.model,
    }
    if args.test_corpus:
        effective["test-corpus"] = args.test_corpus

    save_model(model, args.model)

    trace_path = args.trace or args.model + ".trace.tsv"
    _write_text(trace_path, _header("train", effective) + trace_tsv(trace))

    curve_path = args.curve or args.model + ".curve.tsv"
    if args.test_corpus:
        test = parse_corpus(_read_text(args.test_corpus, "test corpus"))
        curve_obj = evaluate_curve(model, corpus.clone(), test)
        curve_text = curve_obj.to_tsv()
    else:
        curve_text = "pass\ttrain_acc\n" + "".join(
            f"{p}\t{a!r}\n" for p, a in curve
        )
    _write_text(curve_path, _header("train", effective) + curve_text)

    if args.deps:
        report = dependency_report(corpus, model)
        _write_text(args.deps_out or args.model + ".deps.txt", _header("train", effective) + report)

    if args.audit_log and audit_log is not None:
        log_text = "pass\trules_in_table\tlinks_total\tunseen_rules_added\tsites_rechecked\n"
        log_text += "".join(line + "\n" for line in audit_log)
        _write_text(args.audit_log, _header("train", effective) + log_text)

    final_acc = curve[-1][1]
    sys.stderr.write(
        f"trained {len(model.rules)} rules; final train accuracy {final_acc!r}\n"
    )
    return 0


def _cmd_tag(args) -> int:
    model = _load_model(args.model)
    corpus = parse_corpus(_read_text(args.input, "input corpus"), tagged=not args.raw)
    if not args.raw:
        known = set(model.tagset())
        seen = set()
        for sent in corpus.sentences:
            for tok in sent:
                if tok.truth not in known and tok.truth not in seen:
                    seen.add(tok.truth)
                    sys.stderr.write(
                        f"warning: tag {tok.truth!r} not in the model's tagset\n"
                    )
    tag(model, corpus)
    _write_text(args.output, serialize_corpus(corpus, "current"))
    return 0


def _cmd_eval(args) -> int:
    model = _load_model(args.model)
    corpus = parse_corpus(_read_text(args.corpus, "corpus"))
    tag(model, corpus)
    pairs = {"model": args.model, "corpus": args.corpus}
    body = (
        f"tokens\t{corpus.n_tokens}\n"
        f"errors\t{error_count(corpus)}\n"
        f"accuracy\t{accuracy(corpus)!r}\n"
    )
    _write_text(args.output, _header("eval", pairs) + body)
    return 0


def _cmd_curve(args) -> int:
    model = _load_model(args.model)
    train = parse_corpus(_read_text(args.train, "train corpus"))
    test = parse_corpus(_read_text(args.test, "test corpus")) if args.test else None
    curve = evaluate_curve(model, train, test, errored_only=args.errored_only)
    pairs = {
        "model": args.model,
        "train": args.train,
        "errored-only": int(args.errored_only),
    }
    if args.test:
        pairs["test"] = args.test
    _write_text(args.output, _header("curve", pairs) + curve.to_tsv())
    return 0


def _cmd_deps(args) -> int:
    model = _load_model(args.model)
    if not model.record_deps:
        raise _UsageError(
            "model was trained without --deps; retrain with dependency recording"
        )
    corpus = parse_corpus(_read_text(args.corpus, "corpus"))
    # Replay the training application order with recording on; this
    # reconstructs the same structures the training run produced.
    baseline_assign(corpus, model.lexicon)
    for pass_no, rule in enumerate(model.rules, start=1):
        sites = find_sites(rule, corpus)
        apply_at_sites(corpus, rule, sites, pass_no, record_deps=True)
    report = dependency_report(corpus, model, include_pass=not args.no_pass_in_key)
    pairs = {
        "model": args.model,
        "corpus": args.corpus,
        "no-pass-in-key": int(args.no_pass_in_key),
    }
    _write_text(args.output, _header("deps", pairs) + report)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="tbltag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument(
            "--config",
            metavar="FILE",
            help="key=value defaults; explicit flags override",
        )

    p = sub.add_parser("train", help="learn a rule sequence from a gold corpus")
    p.add_argument("--corpus", required=True, help="gold training corpus (word/TAG lines)")
    p.add_argument("--default-tag", required=True, help="tag for words never seen in training")
    p.add_argument("--templates", default=DEFAULT_TEMPLATE_SPEC, metavar="SPEC",
                   help="semicolon-separated offset groups, e.g. '-1; -2,-1; +1'")
    p.add_argument("--threshold", type=int, default=2,
                   help="stop when the best net score falls below this (default 2)")
    p.add_argument("--strategy", choices=["greedy", "random"], default="greedy")
    p.add_argument("--seed", type=int, default=0, help="rng seed for random strategy")
    p.add_argument("--engine", choices=["incremental", "naive"], default="incremental",
                   help="naive rescans everything each pass; results are identical")
    p.add_argument("--max-passes", type=int, default=None)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW,
                   help="largest template offset allowed (default 5)")
    p.add_argument("--test-corpus", help="held-out corpus for the curve's test column")
    p.add_argument("--deps", action="store_true", help="record rule dependency structures")
    p.add_argument("--audit", action="store_true",
                   help="recount the incremental index every pass (slow)")
    p.add_argument("--audit-log", metavar="FILE", help="per-pass index statistics")
    p.add_argument("-o", "--model", required=True, help="model file to write")
    p.add_argument("--trace", metavar="FILE", help="default MODEL.trace.tsv")
    p.add_argument("--curve", metavar="FILE", help="default MODEL.curve.tsv")
    p.add_argument("--deps-out", metavar="FILE", help="default MODEL.deps.txt")
    add_config(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("tag", help="tag a corpus with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True, help="corpus to tag")
    p.add_argument("--raw", action="store_true", help="input is bare words, no /TAG")
    p.add_argument("-o", "--output", help="default stdout")
    add_config(p)
    p.set_defaults(func=_cmd_tag)

    p = sub.add_parser("eval", help="accuracy of a model on a gold corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("-o", "--output", help="default stdout")
    add_config(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("curve", help="accuracy after each rule of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--train", required=True, help="gold corpus to sweep")
    p.add_argument("--test", help="optional held-out gold corpus")
    p.add_argument("--errored-only", action="store_true",
                   help="measure only tokens the baseline got wrong")
    p.add_argument("-o", "--output", help="default stdout")
    add_config(p)
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("deps", help="dependency report for a deps-enabled model")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True, help="the corpus the model was trained on")
    p.add_argument("--no-pass-in-key", action="store_true",
                   help="group structures ignoring pass numbers")
    p.add_argument("-o", "--output", help="default stdout")
    add_config(p)
    p.set_defaults(func=_cmd_deps)

    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    try:
        argv = _inject_config(list(argv))
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except (RecordingDisabledError, ValueError) as exc:
        if isinstance(exc, (ParseError, DecodeError, ModelFormatError)):
            sys.stderr.write(f"error: {exc}\n")
            return 2
        sys.stderr.write(f"{exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
