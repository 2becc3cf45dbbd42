"""Command-line entry point: ``stcons <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import __version__, lexicon
from .accuracy import ACCURACY_CONFIG, CONSISTENCY_CONFIG, CharCutConfig
from .corpus_io import Mode, load_corpus, load_nbest, normalize, read_lines
from .errors import StconsError
from .report import (
    ALL_METRICS,
    ScoreConfig,
    UsageError,
    build_report,
    csv_summary,
    dumps,
    file_sha256,
    per_utterance_stats,
)
from .rescoring import RescoreMode, rescore
from .stats import get_aggregator, paired_bootstrap
from .targets import DEFAULT_EPSILON, Side, smoothing_targets

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

FIXTURE_CORPUS = "toy_corpus.jsonl"
FIXTURE_LEX_ST = "toy_lex_st.tsv"
FIXTURE_LEX_TS = "toy_lex_ts.tsv"
FIXTURE_GOLDEN = "golden_report.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def _write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# --------------------------------------------------------------------------- train-lexicon


def cmd_train_lexicon(args) -> int:
    bitext = lexicon.Bitext.from_files(args.src, args.tgt, normalize_text=args.normalize)
    lex = lexicon.train(
        bitext,
        iterations=args.iterations,
        diagonal_prior=args.diagonal_prior,
        null_word=not args.no_null,
        direction=(args.src_lang, args.tgt_lang),
    )
    lexicon.save(lex, args.out)
    print(f"trained {len(lex)} entries from {len(bitext)} pairs ({bitext.skipped_pairs} skipped) -> {args.out}",
          file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------- score


def score_config_from_args(args) -> ScoreConfig:
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip()) if args.metrics else None
    if metrics is None:
        metrics = tuple(m for m in ALL_METRICS if m != "lex" or (args.lex_st or args.lex_ts))
    return ScoreConfig(
        metrics=metrics,
        lex_st_path=args.lex_st,
        lex_ts_path=args.lex_ts,
        accuracy=CharCutConfig(args.acc_min_len, args.acc_case_sensitive, not args.acc_no_prefix_suffix),
        consistency=CharCutConfig(args.cons_min_len, not args.cons_case_insensitive, args.cons_prefix_suffix),
        bleu_lowercase=not args.bleu_cased,
        seed=args.seed,
    )


def run_score(corpus_path, config: ScoreConfig, threads: int = 1, base_dir: Path | None = None) -> dict:
    """Score a corpus; paths are recorded as given and resolved against ``base_dir``."""

    def resolve(p):
        return Path(base_dir, p) if base_dir is not None else Path(p)

    corpus = load_corpus(resolve(corpus_path))
    lex_st = lex_ts = None
    if "lex" in config.metrics:
        if config.lex_st_path:
            lex_st = lexicon.load(resolve(config.lex_st_path))
            config.lexicon_checksums[config.lex_st_path] = file_sha256(resolve(config.lex_st_path))
        if config.lex_ts_path:
            lex_ts = lexicon.load(resolve(config.lex_ts_path))
            config.lexicon_checksums[config.lex_ts_path] = file_sha256(resolve(config.lex_ts_path))
    return build_report(corpus, config, lex_st, lex_ts, corpus_label=str(corpus_path), threads=threads)


def cmd_score(args) -> int:
    config = score_config_from_args(args)
    unknown = [m for m in config.metrics if m not in ALL_METRICS]
    if unknown:
        raise UsageError(f"unknown metric(s): {', '.join(unknown)}")
    if "lex" in config.metrics:
        missing = [f for f, v in (("--lex-st", args.lex_st), ("--lex-ts", args.lex_ts)) if not v]
        if missing:
            raise UsageError(f"metric 'lex' requires {' and '.join(missing)}")
    report = run_score(args.corpus, config, threads=args.threads)
    _write_text(args.out, dumps(report))
    if args.csv:
        _write_text(args.csv, csv_summary(report))
    return EXIT_OK


# --------------------------------------------------------------------------- rescore


def cmd_rescore(args) -> int:
    lex_st, lex_ts = lexicon.load(args.lex_st), lexicon.load(args.lex_ts)
    mode = RescoreMode(args.mode)
    results = [rescore(nb, lex_st, lex_ts, mode) for nb in load_nbest(args.nbest)]
    _write_jsonl(args.out, (
        {"id": r.id, "transcript": r.selected.transcript, "translation": r.selected.translation,
         "penalty": r.penalty, "origin": list(r.selected.origin)}
        for r in results
    ))
    if args.dump_ranking:
        _write_jsonl(args.dump_ranking, (
            {"id": r.id, "mode": r.mode.value, "ranking": [
                {"transcript": sc.candidate.transcript, "translation": sc.candidate.translation,
                 "penalty": sc.penalty, "origin": list(sc.candidate.origin), "joint_score": sc.candidate.joint_score}
                for sc in r.ranking]}
            for r in results
        ))
    return EXIT_OK


# --------------------------------------------------------------------------- emit-targets


def cmd_emit_targets(args) -> int:
    corpus = load_corpus(args.corpus)
    vocab = set(read_lines(args.vocab)) - {""}
    side = Side(args.side)

    def tokens(text: str) -> list[str]:
        if args.tokenize == "lexical":
            return list(normalize(text, Mode.LEXICAL).tokens)
        return text.split()

    records = []
    for u in corpus:
        if u.ref_transcript is None or u.ref_translation is None:
            raise StconsError(f"utterance {u.id!r} lacks a reference transcript or translation")
        tgt = smoothing_targets(tokens(u.ref_transcript), tokens(u.ref_translation), side, args.epsilon,
                                vocab, args.distinct_types, vocab_ref=str(args.vocab))
        records.append(tgt.to_json(u.id))
    _write_jsonl(args.out, records)
    return EXIT_OK


# --------------------------------------------------------------------------- significance


def _load_report(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise StconsError(f"{path}: not a JSON report ({exc.msg})") from None


def cmd_significance(args) -> int:
    try:
        get_aggregator(args.metric)
    except StconsError as exc:
        raise UsageError(str(exc)) from None
    rep_a, rep_b = _load_report(args.report_a), _load_report(args.report_b)
    ids_a = [r["id"] for r in rep_a["per_utterance"]]
    ids_b = [r["id"] for r in rep_b["per_utterance"]]
    if ids_a != ids_b:
        raise StconsError("reports cover different utterance ids (or a different order)")
    res = paired_bootstrap(per_utterance_stats(rep_a, args.metric), per_utterance_stats(rep_b, args.metric),
                           args.metric, samples=args.samples, seed=args.seed)
    out = res.to_json()
    out["significant"] = res.p_value < args.alpha
    out["alpha"] = args.alpha
    _write_text(args.out, json.dumps(out, indent=2) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------- selfcheck


def fixtures_dir() -> Path:
    return Path(str(resources.files("stcons") / "fixtures"))


def selfcheck_report(threads: int = 1) -> str:
    config = ScoreConfig(lex_st_path=FIXTURE_LEX_ST, lex_ts_path=FIXTURE_LEX_TS)
    return dumps(run_score(FIXTURE_CORPUS, config, threads=threads, base_dir=fixtures_dir()))


def cmd_selfcheck(args) -> int:
    produced = selfcheck_report(args.threads)
    golden = (fixtures_dir() / FIXTURE_GOLDEN).read_bytes().decode("utf-8")
    if produced == golden:
        print("PASS")
        return EXIT_OK
    print("FAIL: report differs from bundled golden report")
    return EXIT_DATA


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stcons", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"stcons {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train-lexicon", help="estimate a word translation table with IBM Model 1")
    p.add_argument("--src", required=True, help="source side, one sentence per line")
    p.add_argument("--tgt", required=True, help="target side, one sentence per line")
    p.add_argument("--iterations", type=int, default=lexicon.DEFAULT_ITERATIONS)
    p.add_argument("--diagonal-prior", action="store_true")
    p.add_argument("--no-null", action="store_true", help="train without a NULL source word")
    p.add_argument("--normalize", action="store_true", help="apply LEXICAL normalization instead of whitespace split")
    p.add_argument("--src-lang", default="src")
    p.add_argument("--tgt-lang", default="tgt")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_lexicon)

    p = sub.add_parser("score", help="compute accuracy and consistency metrics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--metrics", default=None,
                   help=f"comma-separated subset of {','.join(ALL_METRICS)} (default: all; lex only with lexicons)")
    p.add_argument("--lex-st", default=None, help="lexicon p(translation word | transcript word)")
    p.add_argument("--lex-ts", default=None, help="lexicon p(transcript word | translation word)")
    p.add_argument("--out", default="-")
    p.add_argument("--csv", default=None, help="also write a one-line summary CSV")
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--bleu-cased", action="store_true", help="case-sensitive BLEU")
    p.add_argument("--acc-min-len", type=int, default=ACCURACY_CONFIG.min_len)
    p.add_argument("--acc-case-sensitive", action="store_true")
    p.add_argument("--acc-no-prefix-suffix", action="store_true")
    p.add_argument("--cons-min-len", type=int, default=CONSISTENCY_CONFIG.min_len)
    p.add_argument("--cons-case-insensitive", action="store_true")
    p.add_argument("--cons-prefix-suffix", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rescore", help="select the most consistent n-best pair per utterance")
    p.add_argument("--nbest", required=True)
    p.add_argument("--lex-st", required=True)
    p.add_argument("--lex-ts", required=True)
    p.add_argument("--mode", choices=[m.value for m in RescoreMode], default="paired")
    p.add_argument("--out", required=True)
    p.add_argument("--dump-ranking", default=None)
    p.set_defaults(func=cmd_rescore)

    p = sub.add_parser("emit-targets", help="write consistency label-smoothing targets")
    p.add_argument("--corpus", required=True)
    p.add_argument("--side", choices=[s.value for s in Side], required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--vocab", required=True, help="one token per line")
    p.add_argument("--tokenize", choices=["whitespace", "lexical"], default="whitespace")
    p.add_argument("--distinct-types", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit_targets)

    p = sub.add_parser("significance", help="paired bootstrap test between two score reports")
    p.add_argument("--report-a", required=True)
    p.add_argument("--report-b", required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_significance)

    p = sub.add_parser("selfcheck", help="score the bundled toy corpus and compare with the golden report")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_selfcheck)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StconsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
