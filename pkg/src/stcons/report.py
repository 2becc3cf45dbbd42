"""Assemble MetricReport dictionaries for the ``score`` command."""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .accuracy import (
    ACCURACY_CONFIG,
    CONSISTENCY_CONFIG,
    ZERO_STATS,
    BleuStats,
    CharCutConfig,
    bleu_from_stats,
    charcut,
    sentence_stats,
    wer,
)
from .consistency import (
    LexicalPenalty,
    check_directions,
    correlation_from_values,
    lexical_from_penalties,
    success_probability,
    surface_counts,
    surface_from_matches,
    utterance_penalty,
)
from .corpus_io import DEFAULT_MARKER_PATTERN, Corpus, Mode, normalize, remove_markers
from .errors import MetricError, StconsError
from .lexicon import Lexicon

ALL_METRICS = ("wer", "bleu", "charcut", "lex", "surface", "correlation", "combined")
REPORT_KEYS = {
    "wer": "wer_down",
    "bleu": "bleu_up",
    "charcut": "charcut_down",
    "lex": "lex_down",
    "surface": "surface_up",
    "correlation": "correlation_up",
    "combined": "combined_up",
}
CSV_COLUMNS = (("WER", "wer"), ("BLEU", "bleu"), ("CharCut", "charcut"), ("Lex", "lex"),
               ("Sur", "surface"), ("Cor", "correlation"), ("Cmb", "combined"))
NEEDS_REFERENCES = frozenset({"wer", "bleu", "charcut", "correlation", "combined"})
NEEDS_LEXICONS = frozenset({"lex"})
METRIC_DECIMALS = 6


class UsageError(StconsError):
    """Invalid or incomplete command-line configuration."""


@dataclass
class ScoreConfig:
    metrics: tuple[str, ...] = ALL_METRICS
    lex_st_path: str | None = None
    lex_ts_path: str | None = None
    accuracy: CharCutConfig = ACCURACY_CONFIG
    consistency: CharCutConfig = CONSISTENCY_CONFIG
    bleu_lowercase: bool = True
    seed: int = 13
    lexicon_checksums: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def lex_entry(path):
            if path is None:
                return None
            return {"path": path, "sha256": self.lexicon_checksums.get(path)}

        return {
            "metrics": list(self.metrics),
            "lex_st": lex_entry(self.lex_st_path),
            "lex_ts": lex_entry(self.lex_ts_path),
            "charcut_accuracy": self.accuracy.to_json(),
            "charcut_consistency": self.consistency.to_json(),
            "bleu": {"tokenize": "13a", "lowercase": self.bleu_lowercase, "smooth": "exp", "max_order": 4,
                     "remove_markers": True},
            "wer": {"normalization": Mode.WER_TRANSCRIPT.value, "clip": 1.0},
            "lexical_tokenization": Mode.LEXICAL.value,
            "marker_pattern": DEFAULT_MARKER_PATTERN,
            "seed": self.seed,
        }


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def validate(corpus: Corpus, config: ScoreConfig, lex_st: Lexicon | None, lex_ts: Lexicon | None) -> None:
    unknown = [m for m in config.metrics if m not in ALL_METRICS]
    if unknown:
        raise UsageError(f"unknown metric(s): {', '.join(unknown)}; choose from {', '.join(ALL_METRICS)}")
    if NEEDS_LEXICONS & set(config.metrics):
        missing = [flag for flag, lex in (("--lex-st", lex_st), ("--lex-ts", lex_ts)) if lex is None]
        if missing:
            raise UsageError(f"metric 'lex' requires {' and '.join(missing)}")
        check_directions(lex_st, lex_ts)
    wanted = NEEDS_REFERENCES & set(config.metrics)
    if wanted:
        for u in corpus:
            if u.ref_transcript is None or u.ref_translation is None:
                raise MetricError(
                    f"metric(s) {', '.join(sorted(wanted))} need reference transcript and translation; "
                    f"utterance {u.id!r} lacks one"
                )
    if "correlation" in config.metrics and len(corpus) < 2:
        raise MetricError("metric 'correlation' needs at least two utterances")


def _raw(value: float):
    if math.isinf(value):
        return "inf"
    return value


def _utterance_record(u, config: ScoreConfig, lex_st, lex_ts) -> dict:
    metrics = set(config.metrics)
    rec: dict = {"id": u.id}
    need_acc = metrics & {"wer", "charcut", "correlation", "combined"}
    if need_acc:
        e = wer(normalize(u.hyp_transcript, Mode.WER_TRANSCRIPT), normalize(u.ref_transcript, Mode.WER_TRANSCRIPT))
        rec["wer"] = {
            "substitutions": e.substitutions,
            "insertions": e.insertions,
            "deletions": e.deletions,
            "ref_len": e.ref_len,
            "wer": _raw(e.wer),
            "wer_clipped": e.wer_clipped,
        }
        c = charcut(u.hyp_translation, u.ref_translation, config.accuracy)
        rec["charcut"] = {"raw": c.raw, "clipped": c.clipped, "cost": c.cost, "length": c.length}
        if "combined" in metrics:
            rec["p_succ"] = success_probability(e.wer_clipped, c.clipped)
    if "bleu" in metrics:
        stats = sentence_stats(remove_markers(u.hyp_translation), remove_markers(u.ref_translation),
                               config.bleu_lowercase)
        rec["bleu_stats"] = stats.to_list()
    if "lex" in metrics:
        p = utterance_penalty(
            normalize(u.hyp_transcript, Mode.LEXICAL).tokens,
            normalize(u.hyp_translation, Mode.LEXICAL).tokens,
            lex_st,
            lex_ts,
        )
        rec["lex"] = {"t_to_s": p.t_to_s, "s_to_t": p.s_to_t,
                      "n_translation": p.n_translation, "n_transcript": p.n_transcript}
    if "surface" in metrics:
        r = surface_counts(u.hyp_transcript, u.hyp_translation, config.consistency)
        rec["surface"] = {"deletions": r.deletions, "insertions": r.insertions,
                          "shift": r.shift_cost, "length": r.length}
    return rec


class _Surface:
    """Adapter so surface_from_matches can consume report records."""

    def __init__(self, d):
        self.deletions, self.insertions, self.shift_cost, self.length = (
            d["deletions"], d["insertions"], d["shift"], d["length"])
        self.cost = self.deletions + self.insertions + self.shift_cost


def _corpus_value(metric: str, records: list[dict], config: ScoreConfig):
    if metric == "wer":
        errors = sum(r["wer"]["substitutions"] + r["wer"]["insertions"] + r["wer"]["deletions"] for r in records)
        ref_len = sum(r["wer"]["ref_len"] for r in records)
        if ref_len == 0:
            raise MetricError("corpus WER undefined: references contain no words")
        return errors / ref_len
    if metric == "bleu":
        stats = ZERO_STATS
        for r in records:
            stats = stats + BleuStats.from_list(r["bleu_stats"])
        return bleu_from_stats(stats)
    if metric == "charcut":
        cost = sum(r["charcut"]["cost"] for r in records)
        length = sum(r["charcut"]["length"] for r in records)
        return cost / length if length else 0.0
    if metric == "lex":
        pens = [LexicalPenalty(**r["lex"]) for r in records]
        return lexical_from_penalties(pens).score
    if metric == "surface":
        return surface_from_matches([_Surface(r["surface"]) for r in records]).score
    if metric == "correlation":
        rep = correlation_from_values([r["wer"]["wer_clipped"] for r in records],
                                      [r["charcut"]["clipped"] for r in records])
        if rep.undefined:
            raise MetricError(f"UNDEFINED: {rep.reason}")
        return rep.tau
    if metric == "combined":
        return sum(r["p_succ"] for r in records) / len(records)
    raise UsageError(f"unknown metric {metric!r}")


def build_report(
    corpus: Corpus,
    config: ScoreConfig,
    lex_st: Lexicon | None = None,
    lex_ts: Lexicon | None = None,
    corpus_label: str | None = None,
    threads: int = 1,
) -> dict:
    validate(corpus, config, lex_st, lex_ts)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda u: _utterance_record(u, config, lex_st, lex_ts), corpus))
    else:
        records = [_utterance_record(u, config, lex_st, lex_ts) for u in corpus]

    corpus_metrics: dict = {}
    undefined: dict = {}
    for metric in config.metrics:
        key = REPORT_KEYS[metric]
        try:
            value = _corpus_value(metric, records, config)
        except MetricError as exc:
            undefined[key] = str(exc).removeprefix("UNDEFINED: ")
            continue
        corpus_metrics[key] = round(value, METRIC_DECIMALS)
    return {
        "tool_version": __version__,
        "config": config.to_json(),
        "corpus": {"size": len(corpus), "source_path": corpus_label if corpus_label is not None else corpus.source_path},
        "corpus_metrics": corpus_metrics,
        "undefined_flags": undefined,
        "per_utterance": records,
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def csv_summary(report: dict) -> str:
    values = report["corpus_metrics"]
    cells = []
    for _, metric in CSV_COLUMNS:
        v = values.get(REPORT_KEYS[metric])
        cells.append("" if v is None else f"{v:.{METRIC_DECIMALS}f}")
    return ",".join(c for c, _ in CSV_COLUMNS) + "\n" + ",".join(cells) + "\n"


# per-utterance sufficient statistics for resampling, keyed by metric
def per_utterance_stats(report: dict, metric: str) -> list:
    rows = []
    for rec in report["per_utterance"]:
        try:
            if metric == "wer":
                w = rec["wer"]
                rows.append([w["substitutions"] + w["insertions"] + w["deletions"], w["ref_len"]])
            elif metric == "charcut":
                rows.append([rec["charcut"]["cost"], rec["charcut"]["length"]])
            elif metric == "bleu":
                rows.append(list(rec["bleu_stats"]))
            elif metric == "lex":
                x = rec["lex"]
                rows.append([x["t_to_s"], x["s_to_t"], x["n_translation"], x["n_transcript"]])
            elif metric == "surface":
                x = rec["surface"]
                rows.append([x["deletions"] + x["insertions"] + x["shift"], x["length"]])
            elif metric == "combined":
                rows.append([rec["p_succ"]])
            else:
                raise UsageError(f"metric {metric!r} cannot be resampled; choose from wer, bleu, charcut, lex, surface, combined")
        except KeyError:
            raise MetricError(f"report lacks per-utterance data for metric {metric!r} (utterance {rec.get('id')!r})") from None
    return rows
