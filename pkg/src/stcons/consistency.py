"""Transcript/translation consistency metrics.

Four corpus-level scores over paired (transcript, translation) outputs:
lexical consistency (lower is better), surface-form consistency, the Kendall
tau-b correlation of transcript and translation errors, and the combined
dialog success score (higher is better for the last three).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .accuracy import ACCURACY_CONFIG, CONSISTENCY_CONFIG, CharCutConfig, charcut, charcut_match, wer
from .corpus_io import Corpus, Mode, normalize
from .errors import MetricError
from .lexicon import Lexicon
from .stats import kendall_tau_b


@dataclass(frozen=True)
class LexicalPenalty:
    t_to_s: float
    s_to_t: float
    n_translation: int
    n_transcript: int


@dataclass(frozen=True)
class LexicalConsistencyReport:
    per_utterance: tuple[LexicalPenalty, ...]
    n: int
    m: int
    direction_ts: float
    direction_st: float
    score: float


@dataclass(frozen=True)
class SurfaceConsistencyReport:
    total_del: int
    total_ins: int
    total_shift: int
    total_len: int
    score: float
    per_utterance: tuple[tuple[int, int], ...] = ()  # (cost, length)


@dataclass(frozen=True)
class CorrelationReport:
    tau: float | None
    n_items: int
    wer_clipped_values: tuple[float, ...]
    charcut_clipped_values: tuple[float, ...]

    @property
    def undefined(self) -> bool:
        return self.tau is None

    @property
    def reason(self) -> str | None:
        if self.tau is not None:
            return None
        sides = []
        if len(set(self.wer_clipped_values)) <= 1:
            sides.append("transcript WER")
        if len(set(self.charcut_clipped_values)) <= 1:
            sides.append("translation CharCut")
        return "zero variance in " + " and ".join(sides)


@dataclass(frozen=True)
class CombinedReport:
    per_utterance: tuple[float, ...]
    score: float


def direction_penalty(targets: Sequence[str], sources: Sequence[str], lex: Lexicon) -> float:
    """-sum over target words of the best log p(target | source word); floor if no sources."""
    total = 0.0
    for t in targets:
        if sources:
            best = max(lex.logprob(s, t) for s in sources)
        else:
            best = lex.floor_logprob
        total -= best
    return total


def utterance_penalty(transcript: Sequence[str], translation: Sequence[str], lex_st: Lexicon, lex_ts: Lexicon) -> LexicalPenalty:
    return LexicalPenalty(
        t_to_s=direction_penalty(translation, transcript, lex_st),
        s_to_t=direction_penalty(transcript, translation, lex_ts),
        n_translation=len(translation),
        n_transcript=len(transcript),
    )


def check_directions(lex_st: Lexicon, lex_ts: Lexicon) -> None:
    if tuple(lex_st.direction) != tuple(reversed(lex_ts.direction)):
        raise MetricError(
            f"lexicon directions do not mirror each other: {'-'.join(lex_st.direction)} vs {'-'.join(lex_ts.direction)}"
        )


def lexical_from_penalties(penalties: Sequence[LexicalPenalty]) -> LexicalConsistencyReport:
    n = sum(p.n_translation for p in penalties)
    m = sum(p.n_transcript for p in penalties)
    if n == 0 or m == 0:
        raise MetricError(f"lexical consistency undefined: {n} translated and {m} transcribed words in corpus")
    ts = sum(p.t_to_s for p in penalties) / n
    st = sum(p.s_to_t for p in penalties) / m
    return LexicalConsistencyReport(tuple(penalties), n, m, ts, st, 0.5 * (ts + st))


def lexical_consistency(corpus: Corpus, lex_st: Lexicon, lex_ts: Lexicon) -> LexicalConsistencyReport:
    check_directions(lex_st, lex_ts)
    penalties = [
        utterance_penalty(
            normalize(u.hyp_transcript, Mode.LEXICAL).tokens,
            normalize(u.hyp_translation, Mode.LEXICAL).tokens,
            lex_st,
            lex_ts,
        )
        for u in corpus
    ]
    return lexical_from_penalties(penalties)


def surface_counts(transcript: str, translation: str, config: CharCutConfig = CONSISTENCY_CONFIG):
    s = normalize(transcript, Mode.RAW_CASED).text()
    t = normalize(translation, Mode.RAW_CASED).text()
    return charcut_match(t, s, config)


def surface_from_matches(matches) -> SurfaceConsistencyReport:
    d = sum(r.deletions for r in matches)
    i = sum(r.insertions for r in matches)
    sh = sum(r.shift_cost for r in matches)
    total = sum(r.length for r in matches)
    if total == 0:
        raise MetricError("surface consistency undefined: every transcript and translation is empty")
    score = max(0.0, 1.0 - (d + i + sh) / total)
    return SurfaceConsistencyReport(d, i, sh, total, score, tuple((r.cost, r.length) for r in matches))


def surface_consistency(corpus: Corpus, config: CharCutConfig = CONSISTENCY_CONFIG) -> SurfaceConsistencyReport:
    """Translation matched against transcript, counts pooled over the corpus."""
    return surface_from_matches([surface_counts(u.hyp_transcript, u.hyp_translation, config) for u in corpus])


def _require_refs(corpus: Corpus, what: str) -> None:
    for u in corpus:
        if u.ref_transcript is None or u.ref_translation is None:
            raise MetricError(f"{what} needs reference transcript and translation; utterance {u.id!r} lacks one")


def utterance_accuracy(hyp_transcript: str, ref_transcript: str, hyp_translation: str, ref_translation: str,
                       config: CharCutConfig = ACCURACY_CONFIG) -> tuple[float, float]:
    """(clipped WER, clipped CharCut) for one utterance."""
    w = wer(normalize(hyp_transcript, Mode.WER_TRANSCRIPT), normalize(ref_transcript, Mode.WER_TRANSCRIPT))
    c = charcut(hyp_translation, ref_translation, config)
    return w.wer_clipped, c.clipped


def correlation_from_values(wer_values: Sequence[float], charcut_values: Sequence[float]) -> CorrelationReport:
    tau = kendall_tau_b(wer_values, charcut_values)
    return CorrelationReport(tau, len(wer_values), tuple(wer_values), tuple(charcut_values))


def error_correlation(corpus: Corpus, config: CharCutConfig = ACCURACY_CONFIG) -> CorrelationReport:
    _require_refs(corpus, "error correlation")
    if len(corpus) < 2:
        raise MetricError("error correlation needs at least two utterances")
    values = [
        utterance_accuracy(u.hyp_transcript, u.ref_transcript, u.hyp_translation, u.ref_translation, config)
        for u in corpus
    ]
    return correlation_from_values([v[0] for v in values], [v[1] for v in values])


def success_probability(wer_clipped: float, charcut_clipped: float) -> float:
    return (1.0 - wer_clipped) * (1.0 - charcut_clipped)


def combined_from_values(wer_values: Sequence[float], charcut_values: Sequence[float]) -> CombinedReport:
    per_utt = tuple(success_probability(w, c) for w, c in zip(wer_values, charcut_values))
    if not per_utt:
        raise MetricError("combined score undefined on an empty corpus")
    return CombinedReport(per_utt, sum(per_utt) / len(per_utt))


def combined_dialog(corpus: Corpus, config: CharCutConfig = ACCURACY_CONFIG) -> CombinedReport:
    _require_refs(corpus, "combined dialog score")
    values = [
        utterance_accuracy(u.hyp_transcript, u.ref_transcript, u.hyp_translation, u.ref_translation, config)
        for u in corpus
    ]
    return combined_from_values([v[0] for v in values], [v[1] for v in values])
