"""Kendall tau-b and paired bootstrap resampling."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .accuracy import BleuStats, bleu_from_stats
from .errors import MetricError

RNG_NAME = "numpy.random.PCG64"


def _count_inversions(values: list) -> int:
    """Number of pairs i < j with values[i] > values[j] (bottom-up merge sort)."""
    n = len(values)
    buf = list(values)
    tmp = [None] * n
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if buf[j] < buf[i]:
                    tmp[k] = buf[j]
                    inversions += mid - i
                    j += 1
                else:
                    tmp[k] = buf[i]
                    i += 1
                k += 1
            tmp[k:hi] = buf[i:mid] + buf[j:hi]
        buf, tmp = tmp, buf
        width *= 2
    return inversions


def _tied_pairs(sorted_values: Sequence) -> int:
    total = 0
    run = 1
    for prev, cur in zip(sorted_values, sorted_values[1:]):
        if cur == prev:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    return total + run * (run - 1) // 2


def kendall_tau_b(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Kendall's tau-b in O(n log n); ``None`` when either side is constant."""
    if len(xs) != len(ys):
        raise MetricError(f"kendall_tau_b: length mismatch ({len(xs)} vs {len(ys)})")
    n = len(xs)
    if n < 2:
        raise MetricError("kendall_tau_b needs at least two items")
    pairs = sorted(zip(xs, ys))
    n0 = n * (n - 1) // 2
    tied_x = _tied_pairs([p[0] for p in pairs])
    tied_xy = _tied_pairs(pairs)
    y_order = [p[1] for p in pairs]
    tied_y = _tied_pairs(sorted(y_order))
    discordant = _count_inversions(y_order)
    diff = n0 - tied_x - tied_y + tied_xy - 2 * discordant
    denom = (n0 - tied_x) * (n0 - tied_y)
    if denom == 0:
        return None
    return diff / math.sqrt(denom)


# --------------------------------------------------------------------------- bootstrap


@dataclass(frozen=True)
class Aggregator:
    """Corpus rule applied to column sums of per-utterance sufficient statistics."""

    name: str
    higher_is_better: bool
    finalize: Callable[[np.ndarray, int], float]


def _ratio(sums, n):
    return sums[0] / sums[1] if sums[1] else (0.0 if sums[0] == 0 else math.inf)


def _lex(sums, n):
    return 0.5 * (sums[0] / sums[2] + sums[1] / sums[3])


def _surface(sums, n):
    return max(0.0, 1.0 - sums[0] / sums[1]) if sums[1] else 0.0


def _bleu(sums, n):
    return bleu_from_stats(BleuStats.from_list([int(round(x)) for x in sums]))


def _mean(sums, n):
    return sums[0] / n


AGGREGATORS: dict[str, Aggregator] = {
    "wer": Aggregator("wer", False, _ratio),  # (errors, ref_len)
    "charcut": Aggregator("charcut", False, _ratio),  # (cost, length)
    "lex": Aggregator("lex", False, _lex),  # (t->s penalty, s->t penalty, |t|, |s|)
    "surface": Aggregator("surface", True, _surface),  # (cost, length)
    "bleu": Aggregator("bleu", True, _bleu),  # BleuStats.to_list()
    "combined": Aggregator("combined", True, _mean),  # P(succ)
    "mean_lower": Aggregator("mean_lower", False, _mean),
    "mean_higher": Aggregator("mean_higher", True, _mean),
}


def get_aggregator(tag: str) -> Aggregator:
    try:
        return AGGREGATORS[tag]
    except KeyError:
        raise MetricError(f"unknown aggregator {tag!r}; expected one of {sorted(AGGREGATORS)}") from None


@dataclass(frozen=True)
class SignificanceResult:
    metric_name: str
    delta: float
    p_value: float
    p_value_one_sided: float
    samples: int
    seed: int | None
    wins_a: int
    wins_b: int
    ties: int
    higher_is_better: bool
    rng: str = RNG_NAME
    p_value_convention: str = "two-sided: min(1, 2*(samples - wins_winner)/samples); one-sided: (samples - wins_winner)/samples"

    def to_json(self) -> dict:
        return asdict(self)


def _as_matrix(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def resample_indices(n: int, samples: int, seed: int) -> np.ndarray:
    """``samples`` rows of ``n`` utterance indices drawn with replacement."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.integers(0, n, size=(samples, n))


def bootstrap_tally(per_utt_a, per_utt_b, aggregator: str, indices: np.ndarray, seed: int | None = None) -> SignificanceResult:
    """Tally resample wins for explicit index rows (shared between the two systems)."""
    agg = get_aggregator(aggregator)
    a, b = _as_matrix(per_utt_a), _as_matrix(per_utt_b)
    if a.shape != b.shape:
        raise MetricError(f"per-utterance data shapes differ: {a.shape} vs {b.shape}")
    n = a.shape[0]
    if n < 2:
        raise MetricError("paired bootstrap needs at least two utterances")
    samples = indices.shape[0]
    sums_a = a[indices].sum(axis=1)
    sums_b = b[indices].sum(axis=1)
    wins_a = wins_b = ties = 0
    for k in range(samples):
        va = agg.finalize(sums_a[k], n)
        vb = agg.finalize(sums_b[k], n)
        if va == vb:
            ties += 1
        elif (va > vb) == agg.higher_is_better:
            wins_a += 1
        else:
            wins_b += 1
    delta = agg.finalize(a.sum(axis=0), n) - agg.finalize(b.sum(axis=0), n)
    one_sided = (samples - max(wins_a, wins_b)) / samples
    return SignificanceResult(
        metric_name=aggregator,
        delta=float(delta),
        p_value=min(1.0, 2.0 * one_sided),
        p_value_one_sided=one_sided,
        samples=samples,
        seed=seed,
        wins_a=wins_a,
        wins_b=wins_b,
        ties=ties,
        higher_is_better=agg.higher_is_better,
    )


def paired_bootstrap(per_utt_a, per_utt_b, aggregator: str, samples: int = 1000, seed: int = 13) -> SignificanceResult:
    """Paired bootstrap resampling test of system A against system B.

    ``per_utt_a``/``per_utt_b`` hold one row of sufficient statistics per
    utterance in the layout the aggregator expects (see ``AGGREGATORS``).
    Both systems are evaluated on the same resampled index lists.
    """
    get_aggregator(aggregator)
    if samples < 100:
        raise MetricError(f"samples must be >= 100, got {samples}")
    n = len(per_utt_a)
    if n != len(per_utt_b):
        raise MetricError(f"per-utterance vectors differ in length: {n} vs {len(per_utt_b)}")
    if n < 2:
        raise MetricError("paired bootstrap needs at least two utterances")
    return bootstrap_tally(per_utt_a, per_utt_b, aggregator, resample_indices(n, samples, seed), seed)
