"""Synthetic corpora drawn from a known word-for-word lexicon.

Used to check that the consistency metrics separate aligned from misaligned
outputs, and that the error correlation measure reacts to whether transcript
and translation errors co-occur.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .corpus_io import Corpus, Utterance
from .lexicon import Lexicon, from_probs

# probability mass p(t_{k+d} | s_k) for offsets d = 0, 1, 2
TRANSLATION_SPREAD = (0.7, 0.2, 0.1)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _words(rng: np.random.Generator, count: int, alphabet: str, taken: set[str]) -> list[str]:
    out = []
    while len(out) < count:
        length = int(rng.integers(4, 10))
        w = "".join(alphabet[int(k)] for k in rng.integers(0, len(alphabet), size=length))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


@dataclass(frozen=True)
class SyntheticLanguagePair:
    source_words: tuple[str, ...]
    target_words: tuple[str, ...]
    lex_st: Lexicon
    lex_ts: Lexicon

    def translate(self, k: int) -> str:
        return self.target_words[k]


def make_language_pair(vocab_size: int = 200, seed: int = 13) -> SyntheticLanguagePair:
    rng = make_rng(seed)
    taken: set[str] = set()
    src = _words(rng, vocab_size, string.ascii_lowercase, taken)
    tgt = _words(rng, vocab_size, string.ascii_lowercase, taken)
    st, ts = {}, {}
    for k in range(vocab_size):
        for d, p in enumerate(TRANSLATION_SPREAD):
            j = (k + d) % vocab_size
            st[(src[k], tgt[j])] = p
            ts[(tgt[k], src[(k - d) % vocab_size])] = p
    return SyntheticLanguagePair(
        tuple(src), tuple(tgt), from_probs(st, ("src", "tgt")), from_probs(ts, ("tgt", "src"))
    )


def _corrupt(ids: list[int], positions: np.ndarray, rng: np.random.Generator, vocab_size: int) -> list[int]:
    out = list(ids)
    for pos in np.flatnonzero(positions):
        repl = int(rng.integers(0, vocab_size - 1))
        out[pos] = repl if repl < ids[pos] else repl + 1
    return out


def synthetic_corpus(
    pair: SyntheticLanguagePair,
    n: int = 500,
    seed: int = 13,
    error_mode: str = "joint",
    max_rate: float = 0.6,
    min_len: int = 4,
    max_len: int = 12,
) -> Corpus:
    """References are clean word-for-word pairs; hypotheses get word substitutions.

    ``error_mode="joint"`` corrupts the same positions on both sides at a
    shared per-utterance rate. ``"independent"`` draws separate rates and
    positions for each side, so the marginal error rates match but errors
    no longer co-occur. ``"none"`` leaves hypotheses equal to references.
    """
    if error_mode not in ("joint", "independent", "none"):
        raise ValueError(f"unknown error_mode {error_mode!r}")
    rng = make_rng(seed)
    V = len(pair.source_words)
    utts = []
    for k in range(n):
        length = int(rng.integers(min_len, max_len + 1))
        ids = [int(x) for x in rng.integers(0, V, size=length)]
        if error_mode == "joint":
            rate = rng.uniform(0.0, max_rate)
            mask = rng.random(length) < rate
            s_ids = _corrupt(ids, mask, rng, V)
            t_ids = _corrupt(ids, mask, rng, V)
        elif error_mode == "independent":
            rate_s, rate_t = rng.uniform(0.0, max_rate, size=2)
            s_ids = _corrupt(ids, rng.random(length) < rate_s, rng, V)
            t_ids = _corrupt(ids, rng.random(length) < rate_t, rng, V)
        else:
            s_ids = t_ids = ids
        utts.append(
            Utterance(
                id=f"syn{k:04d}",
                hyp_transcript=" ".join(pair.source_words[i] for i in s_ids),
                hyp_translation=" ".join(pair.translate(i) for i in t_ids),
                ref_transcript=" ".join(pair.source_words[i] for i in ids),
                ref_translation=" ".join(pair.translate(i) for i in ids),
            )
        )
    return Corpus(tuple(utts), source_path=f"synthetic:{error_mode}:seed={seed}")


def shuffled_pairing(corpus: Corpus, seed: int) -> Corpus:
    """Same transcripts, translations permuted across utterances."""
    rng = make_rng(seed)
    perm = rng.permutation(len(corpus))
    utts = tuple(
        Utterance(u.id, u.hyp_transcript, corpus[int(p)].hyp_translation, u.ref_transcript, u.ref_translation)
        for u, p in zip(corpus, perm)
    )
    return Corpus(utts, source_path=f"{corpus.source_path}:shuffled={seed}")
