"""Reference-based accuracy metrics: WER, a CharCut-style substring matcher, corpus BLEU."""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus_io import Mode, TokenSeq
from .errors import MetricError

# --------------------------------------------------------------------------- WER


@dataclass(frozen=True)
class EditSummary:
    substitutions: int
    insertions: int
    deletions: int
    ref_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def wer(self) -> float:
        if self.ref_len == 0:
            return 0.0 if self.errors == 0 else math.inf
        return self.errors / self.ref_len

    @property
    def wer_clipped(self) -> float:
        return min(self.wer, 1.0)


def edit_counts(hyp: Sequence[str], ref: Sequence[str]) -> tuple[int, int, int]:
    """Unit-cost Levenshtein alignment; returns (substitutions, insertions, deletions)."""
    n, m = len(hyp), len(ref)
    # dist[i][j]: cost of turning hyp[:i] into ref[:j]
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row, prev = dist[i], dist[i - 1]
        h = hyp[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (h != ref[j - 1])
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)
    s = ins = dele = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (hyp[i - 1] != ref[j - 1]):
            s += hyp[i - 1] != ref[j - 1]
            i, j = i - 1, j - 1
        elif j > 0 and dist[i][j] == dist[i][j - 1] + 1:
            dele += 1
            j -= 1
        else:
            ins += 1
            i -= 1
    return s, ins, dele


def wer(hyp: TokenSeq, ref: TokenSeq) -> EditSummary:
    if hyp.mode is not Mode.WER_TRANSCRIPT or ref.mode is not Mode.WER_TRANSCRIPT:
        raise MetricError(f"wer expects WER_TRANSCRIPT token sequences, got {hyp.mode.name} and {ref.mode.name}")
    s, ins, dele = edit_counts(hyp.tokens, ref.tokens)
    return EditSummary(s, ins, dele, len(ref))


# --------------------------------------------------------------------------- CharCut


@dataclass(frozen=True)
class CharCutConfig:
    min_len: int = 3
    case_sensitive: bool = False
    prefix_suffix: bool = True

    def to_json(self) -> dict:
        return {"min_len": self.min_len, "case_sensitive": self.case_sensitive, "prefix_suffix": self.prefix_suffix}


ACCURACY_CONFIG = CharCutConfig(min_len=3, case_sensitive=False, prefix_suffix=True)
CONSISTENCY_CONFIG = CharCutConfig(min_len=5, case_sensitive=True, prefix_suffix=False)


@dataclass(frozen=True)
class MatchResult:
    matched: tuple[tuple[int, int, int], ...]
    monotone_weight: int
    shift_cost: int
    insertions: int
    deletions: int
    cand_len: int
    ref_len: int

    @property
    def cost(self) -> int:
        return self.insertions + self.deletions + self.shift_cost

    @property
    def length(self) -> int:
        return self.cand_len + self.ref_len


@dataclass(frozen=True)
class CharCutScore:
    raw: float
    clipped: float
    cost: int
    length: int


def _fold(text: str, case_sensitive: bool) -> list[str]:
    if case_sensitive:
        return list(text)
    # per-character lowering keeps positions aligned with the input
    return [c.lower() if len(c.lower()) == 1 else c for c in text]


def _diagonal_segments(eq: np.ndarray, min_len: int) -> list[tuple[int, int, int]]:
    """Maximal runs of True along the diagonals of ``eq`` with length >= min_len."""
    la, lb = eq.shape
    run = np.zeros((la + 1, lb + 1), dtype=np.int32)
    for i in range(la):
        run[i + 1, 1:] = (run[i, :-1] + 1) * eq[i]
    runs = run[1:, 1:]
    cont = np.zeros_like(eq)
    cont[:-1, :-1] = eq[1:, 1:]
    ends = np.argwhere((runs >= min_len) & ~cont)
    return [(int(i) - int(runs[i, j]) + 1, int(j) - int(runs[i, j]) + 1, int(runs[i, j])) for i, j in ends]


def _split(seg, i: int, j: int, length: int, min_len: int):
    i0, j0, n = seg
    bad = sorted(
        (max(lo, 0), min(hi, n))
        for lo, hi in ((i - i0, i + length - i0), (j - j0, j + length - j0))
        if min(hi, n) > max(lo, 0)
    )
    if not bad:
        yield seg
        return
    pos = 0
    for lo, hi in bad:
        if lo - pos >= min_len:
            yield (i0 + pos, j0 + pos, lo - pos)
        pos = max(pos, hi)
    if n - pos >= min_len:
        yield (i0 + pos, j0 + pos, n - pos)


def _max_monotone_weight(matches: Sequence[tuple[int, int, int]]) -> int:
    """Heaviest chain of matches strictly increasing in both start positions."""
    ordered = sorted(matches)
    best = []
    for k, (c, r, n) in enumerate(ordered):
        prior = [best[l] for l in range(k) if ordered[l][0] < c and ordered[l][1] < r]
        best.append(n + max(prior, default=0))
    return max(best, default=0)


def charcut_match(cand: str, ref: str, config: CharCutConfig = ACCURACY_CONFIG) -> MatchResult:
    """Greedy longest-common-substring segmentation of ``cand`` against ``ref``.

    Substrings are extracted longest first. Equal-length candidates are
    ordered by the sum of their two start positions, then the smaller start;
    a remaining mirror tie is broken by the position in the lexicographically
    smaller string, which keeps the result invariant to swapping the inputs.
    """
    if config.min_len < 1:
        raise ValueError("min_len must be >= 1")
    a = _fold(cand, config.case_sensitive)
    b = _fold(ref, config.case_sensitive)
    la, lb = len(a), len(b)
    matches: list[tuple[int, int, int]] = []

    used_a = np.zeros(la, dtype=bool)
    used_b = np.zeros(lb, dtype=bool)
    if config.prefix_suffix:
        limit = min(la, lb)
        p = 0
        while p < limit and a[p] == b[p]:
            p += 1
        q = 0
        while q < limit - p and a[la - 1 - q] == b[lb - 1 - q]:
            q += 1
        if p:
            matches.append((0, 0, p))
            used_a[:p] = used_b[:p] = True
        if q:
            matches.append((la - q, lb - q, q))
            used_a[la - q:] = True
            used_b[lb - q:] = True

    if la and lb:
        vocab = {c: k for k, c in enumerate(dict.fromkeys(a + b))}
        codes_a = np.fromiter((vocab[c] for c in a), dtype=np.int64, count=la)
        codes_b = np.fromiter((vocab[c] for c in b), dtype=np.int64, count=lb)
        eq = (codes_a[:, None] == codes_b[None, :]) & ~used_a[:, None] & ~used_b[None, :]
        segments = _diagonal_segments(eq, config.min_len)
        a_first = "".join(a) <= "".join(b)
        while segments:
            longest = max(s[2] for s in segments)
            i, j, n = min(
                (s for s in segments if s[2] == longest),
                key=lambda s: (s[0] + s[1], min(s[0], s[1]), s[0] if a_first else s[1]),
            )
            matches.append((i, j, n))
            segments = [piece for s in segments for piece in _split(s, i, j, n, config.min_len)]

    matches.sort()
    matched_total = sum(n for _, _, n in matches)
    weight = _max_monotone_weight(matches)
    return MatchResult(
        matched=tuple(matches),
        monotone_weight=weight,
        shift_cost=matched_total - weight,
        insertions=la - matched_total,
        deletions=lb - matched_total,
        cand_len=la,
        ref_len=lb,
    )


def charcut(hyp_translation: str, ref_translation: str, config: CharCutConfig = ACCURACY_CONFIG) -> CharCutScore:
    hyp = unicodedata.normalize("NFC", hyp_translation)
    ref = unicodedata.normalize("NFC", ref_translation)
    res = charcut_match(hyp, ref, config)
    raw = res.cost / res.length if res.length else 0.0
    return CharCutScore(raw=raw, clipped=min(raw, 1.0), cost=res.cost, length=res.length)


# --------------------------------------------------------------------------- BLEU

MAX_ORDER = 4


def tokenize_13a(line: str) -> str:
    """mteval-v13a style tokenization (Western languages)."""
    norm = line.replace("<skipped>", "").replace("-\n", "").replace("\n", " ")
    norm = norm.replace("&quot;", '"').replace("&amp;", "&").replace("&lt;", "<").replace("&gt;", ">")
    norm = f" {norm} "
    norm = re.sub(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])", r" \1 ", norm)
    norm = re.sub(r"([^0-9])([\.,])", r"\1 \2 ", norm)
    norm = re.sub(r"([\.,])([^0-9])", r" \1 \2", norm)
    norm = re.sub(r"([0-9])(-)", r"\1 \2 ", norm)
    return " ".join(norm.split())


@dataclass(frozen=True)
class BleuStats:
    matches: tuple[int, ...]
    totals: tuple[int, ...]
    hyp_len: int
    ref_len: int

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            tuple(x + y for x, y in zip(self.matches, other.matches)),
            tuple(x + y for x, y in zip(self.totals, other.totals)),
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )

    def to_list(self) -> list[int]:
        return [*self.matches, *self.totals, self.hyp_len, self.ref_len]

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "BleuStats":
        v = [int(x) for x in values]
        return cls(tuple(v[:MAX_ORDER]), tuple(v[MAX_ORDER:2 * MAX_ORDER]), v[-2], v[-1])


ZERO_STATS = BleuStats((0,) * MAX_ORDER, (0,) * MAX_ORDER, 0, 0)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[k:k + n]) for k in range(len(tokens) - n + 1))


def sentence_stats(hyp: str, ref: str, lowercase: bool = True) -> BleuStats:
    if lowercase:
        hyp, ref = hyp.lower(), ref.lower()
    h = tokenize_13a(hyp).split()
    r = tokenize_13a(ref).split()
    matches, totals = [], []
    for n in range(1, MAX_ORDER + 1):
        hc, rc = _ngrams(h, n), _ngrams(r, n)
        matches.append(sum(min(c, rc[g]) for g, c in hc.items()))
        totals.append(max(len(h) - n + 1, 0))
    return BleuStats(tuple(matches), tuple(totals), len(h), len(r))


def bleu_from_stats(stats: BleuStats) -> float:
    """BLEU (0-100) with exponential smoothing of zero-match orders.

    Orders with no hypothesis n-grams at all are dropped from the geometric
    mean, so short but identical output still scores 100.
    """
    log_sum = 0.0
    order = 0
    smooth = 1.0
    for n in range(MAX_ORDER):
        total = stats.totals[n]
        if total == 0:
            break
        order += 1
        if stats.matches[n] == 0:
            smooth *= 2
            log_sum += math.log(1.0 / (smooth * total))
        else:
            log_sum += math.log(stats.matches[n] / total)
    if order == 0 or stats.hyp_len == 0:
        return 0.0
    bp = 1.0 if stats.hyp_len >= stats.ref_len else math.exp(1 - stats.ref_len / stats.hyp_len)
    return 100.0 * bp * math.exp(log_sum / order)


def corpus_bleu(hyps: Sequence[str], refs: Sequence[str], lowercase: bool = True) -> float:
    if len(hyps) != len(refs):
        raise MetricError(f"corpus_bleu: {len(hyps)} hypotheses but {len(refs)} references")
    if not hyps:
        raise MetricError("corpus_bleu needs at least one segment")
    stats = ZERO_STATS
    for h, r in zip(hyps, refs):
        stats = stats + sentence_stats(h, r, lowercase)
    return bleu_from_stats(stats)
