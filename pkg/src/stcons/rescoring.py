"""Pick the most lexically consistent (transcript, translation) pair from n-best candidates."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .consistency import check_directions, utterance_penalty
from .corpus_io import Mode, NBestList, normalize
from .errors import RescoreError
from .lexicon import Lexicon


class RescoreMode(enum.Enum):
    PAIRED = "paired"
    CROSS = "cross"


@dataclass(frozen=True)
class CandidatePair:
    transcript: str
    translation: str
    origin: tuple[int, int]
    transcript_score: float | None = None
    translation_score: float | None = None
    joint_score: float | None = None


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: CandidatePair
    penalty: float


@dataclass(frozen=True)
class RescoreResult:
    id: str
    selected: CandidatePair
    penalty: float
    ranking: tuple[ScoredCandidate, ...]
    mode: RescoreMode


def _combined_model_score(a: float | None, b: float | None) -> float | None:
    if a is None or b is None:
        return None
    return a + b


def candidate_pairs(nbest: NBestList, mode: RescoreMode) -> list[CandidatePair]:
    if not nbest.entries:
        raise RescoreError(f"{nbest.id}: empty candidate list")
    pairs = []
    if mode is RescoreMode.PAIRED:
        for e in nbest.entries:
            if not e.paired:
                raise RescoreError(f"{nbest.id}: paired mode needs transcript and translation in every record (rank {e.rank})")
            joint = e.joint_score
            if joint is None:
                joint = _combined_model_score(e.transcript_score, e.translation_score)
            pairs.append(CandidatePair(e.transcript, e.translation, (e.rank, e.rank),
                                       e.transcript_score, e.translation_score, joint))
        return pairs
    transcripts, translations = nbest.transcripts, nbest.translations
    if not transcripts or not translations:
        missing = "transcript" if not transcripts else "translation"
        raise RescoreError(f"{nbest.id}: cross mode has no {missing} candidates")
    for s in transcripts:
        for t in translations:
            pairs.append(CandidatePair(s.transcript, t.translation, (s.rank, t.rank),
                                       s.transcript_score, t.translation_score,
                                       _combined_model_score(s.transcript_score, t.translation_score)))
    return pairs


def pair_penalty(transcript: str, translation: str, lex_st: Lexicon, lex_ts: Lexicon) -> float:
    """Lexical penalty of one pair, each direction normalized by its own word count."""
    s = normalize(transcript, Mode.LEXICAL).tokens
    t = normalize(translation, Mode.LEXICAL).tokens
    p = utterance_penalty(s, t, lex_st, lex_ts)
    return 0.5 * (p.t_to_s / max(1, len(t)) + p.s_to_t / max(1, len(s)))


def tie_break_key(scored: ScoredCandidate) -> tuple:
    c = scored.candidate
    has_joint = c.joint_score is not None
    return (scored.penalty, 0 if has_joint else 1, -c.joint_score if has_joint else 0.0, c.origin)


def rescore(nbest: NBestList, lex_st: Lexicon, lex_ts: Lexicon, mode: RescoreMode | str = RescoreMode.PAIRED) -> RescoreResult:
    """Select the candidate pair with the lowest lexical penalty.

    Ties go to the higher joint model score when one is available, then to
    the lexicographically smaller (transcript rank, translation rank).
    """
    mode = RescoreMode(mode)
    check_directions(lex_st, lex_ts)
    pairs = candidate_pairs(nbest, mode)
    ranking = [ScoredCandidate(c, pair_penalty(c.transcript, c.translation, lex_st, lex_ts)) for c in pairs]
    best = min(ranking, key=tie_break_key)
    return RescoreResult(nbest.id, best.candidate, best.penalty, tuple(ranking), mode)
