"""Word translation tables estimated with IBM Model 1 EM.

A :class:`Lexicon` stores log p(target | source) for every co-occurring word
pair seen in training. Lookups for pairs missing from the table fall back to
the smallest log-probability in the table.
"""

from __future__ import annotations

import datetime as _dt
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus_io import Mode, TokenSeq, normalize, read_lines
from .errors import LexiconError

NULL = "<NULL>"
DIAGONAL_TENSION = 4.0
MIN_PROB = 1e-12
SUM_TOLERANCE = 1e-6
DEFAULT_ITERATIONS = 5


@dataclass(frozen=True)
class Bitext:
    pairs: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    skipped_pairs: int = 0

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Sequence[str], Sequence[str]]]) -> "Bitext":
        kept = []
        skipped = 0
        for src, tgt in pairs:
            src = tuple(src.tokens if isinstance(src, TokenSeq) else src)
            tgt = tuple(tgt.tokens if isinstance(tgt, TokenSeq) else tgt)
            if not src or not tgt:
                skipped += 1
                continue
            kept.append((src, tgt))
        return cls(tuple(kept), skipped)

    @classmethod
    def from_files(cls, src_path, tgt_path, normalize_text: bool = False) -> "Bitext":
        src_lines = read_lines(src_path)
        tgt_lines = read_lines(tgt_path)
        if len(src_lines) != len(tgt_lines):
            raise LexiconError(
                f"line count mismatch: {src_path} has {len(src_lines)}, {tgt_path} has {len(tgt_lines)}"
            )

        def tok(line: str) -> tuple[str, ...]:
            if normalize_text:
                return normalize(line, Mode.LEXICAL).tokens
            return tuple(line.split())

        return cls.from_pairs((tok(s), tok(t)) for s, t in zip(src_lines, tgt_lines))

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class Lexicon:
    direction: tuple[str, str]
    table: dict[tuple[str, str], float]
    floor_logprob: float
    meta: dict = field(default_factory=dict, compare=False)

    def logprob(self, source_word: str, target_word: str) -> float:
        return self.table.get((source_word, target_word), self.floor_logprob)

    def __len__(self) -> int:
        return len(self.table)


def logprob(lexicon: Lexicon, source_word: str, target_word: str) -> float:
    """log p(target_word | source_word), or the table floor for unseen pairs."""
    return lexicon.logprob(source_word, target_word)


def _alignment_prior(m: int, n: int, j: int, null_word: bool, diagonal_prior: bool) -> list[float]:
    """Prior over source positions (NULL first when enabled) for target position j (0-based)."""
    slots = m + 1 if null_word else m
    if not diagonal_prior:
        return [1.0 / slots] * slots
    weights = [math.exp(-DIAGONAL_TENSION * abs((i + 1) / m - (j + 1) / n)) for i in range(m)]
    z = sum(weights)
    real_mass = m / slots
    prior = [real_mass * w / z for w in weights]
    if null_word:
        prior.insert(0, 1.0 / slots)
    return prior


def _sweep(pairs, prob, null_word, diagonal_prior, counts=None):
    """One pass over the bitext. Returns corpus log-likelihood; fills expected counts if given."""
    loglik = 0.0
    for src, tgt in pairs:
        sources = (NULL,) + src if null_word else src
        m, n = len(src), len(tgt)
        uniform = None if diagonal_prior else _alignment_prior(m, n, 0, null_word, False)
        for j, f in enumerate(tgt):
            prior = uniform or _alignment_prior(m, n, j, null_word, True)
            weights = [a * prob[(e, f)] for a, e in zip(prior, sources)]
            z = sum(weights)
            loglik += math.log(z)
            if counts is not None:
                for e, w in zip(sources, weights):
                    counts[(e, f)] += w / z
    return loglik


def train(
    bitext: Bitext,
    iterations: int = DEFAULT_ITERATIONS,
    diagonal_prior: bool = False,
    null_word: bool = True,
    direction: tuple[str, str] = ("src", "tgt"),
    created: str | None = None,
) -> Lexicon:
    """Estimate p(target | source) with IBM Model 1.

    Starts from a table that is uniform over each source word's co-occurring
    targets. With ``diagonal_prior`` the alignment responsibilities are
    weighted by ``exp(-4 |i/m - j/n|)``; the NULL source (when enabled) keeps
    the share it has under the uniform prior. The log-likelihood of the
    parameters entering each iteration, plus that of the final table, is kept
    in ``meta["log_likelihood"]``.
    """
    if len(bitext) == 0:
        raise LexiconError("cannot train a lexicon on an empty bitext")
    if iterations < 1:
        raise LexiconError(f"iterations must be >= 1, got {iterations}")

    cooc: dict[str, dict[str, None]] = {}
    for src, tgt in bitext.pairs:
        sources = (NULL,) + src if null_word else src
        for e in sources:
            row = cooc.setdefault(e, {})
            for f in tgt:
                row[f] = None
    prob: dict[tuple[str, str], float] = {}
    for e, row in cooc.items():
        p = 1.0 / len(row)
        for f in row:
            prob[(e, f)] = p

    history = []
    for _ in range(iterations):
        counts: dict[tuple[str, str], float] = defaultdict(float)
        history.append(_sweep(bitext.pairs, prob, null_word, diagonal_prior, counts))
        totals: dict[str, float] = defaultdict(float)
        for (e, _f), c in counts.items():
            totals[e] += c
        prob = {(e, f): c / totals[e] for (e, f), c in counts.items()}
    history.append(_sweep(bitext.pairs, prob, null_word, diagonal_prior))

    table = {}
    for (e, f), p in prob.items():
        if e == NULL:
            continue
        table[(e, f)] = math.log(max(p, MIN_PROB))
    table = dict(sorted(table.items()))
    meta = {
        "iterations": iterations,
        "corpus_size": len(bitext),
        "skipped_pairs": bitext.skipped_pairs,
        "diagonal_prior": diagonal_prior,
        "null_word": null_word,
        "created": created or _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "log_likelihood": history,
    }
    return Lexicon(tuple(direction), table, min(table.values()), meta)


def source_sums(lexicon: Lexicon) -> dict[str, float]:
    sums: dict[str, float] = defaultdict(float)
    for (e, _f), lp in lexicon.table.items():
        sums[e] += math.exp(lp)
    return dict(sums)


def save(lexicon: Lexicon, path) -> None:
    src, tgt = lexicon.direction
    meta = lexicon.meta
    lines = [
        f"#direction={src}-{tgt}",
        f"#floor={lexicon.floor_logprob!r}",
        f"#iterations={meta.get('iterations', 0)}",
    ]
    for key in ("corpus_size", "diagonal_prior", "null_word", "created"):
        if key in meta:
            value = meta[key]
            if isinstance(value, bool):
                value = int(value)
            lines.append(f"#{key}={value}")
    for (e, f), lp in sorted(lexicon.table.items()):
        lines.append(f"{e}\t{f}\t{lp!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load(path) -> Lexicon:
    header: dict[str, str] = {}
    table: dict[tuple[str, str], float] = {}
    with open(path, encoding="utf-8", newline=None) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#") and "\t" not in line:
                key, sep, value = line[1:].partition("=")
                if not sep:
                    raise LexiconError(f"{path}:{lineno}: malformed header line")
                header[key] = value
                continue
            parts = line.split("\t")
            if len(parts) != 3 or not parts[0] or not parts[1]:
                raise LexiconError(f"{path}:{lineno}: expected 'source<TAB>target<TAB>log_prob'")
            try:
                lp = float(parts[2])
            except ValueError:
                raise LexiconError(f"{path}:{lineno}: bad log-probability {parts[2]!r}") from None
            if not math.isfinite(lp) or lp > 0:
                raise LexiconError(f"{path}:{lineno}: log-probability must be finite and <= 0")
            key = (parts[0], parts[1])
            if key in table:
                raise LexiconError(f"{path}:{lineno}: duplicate pair {key}")
            table[key] = lp
    if "direction" not in header or header["direction"].count("-") != 1:
        raise LexiconError(f"{path}: missing or malformed '#direction=<src>-<tgt>' header")
    if not table:
        raise LexiconError(f"{path}: lexicon has no entries")
    floor = min(table.values())
    if "floor" in header:
        try:
            stated = float(header["floor"])
        except ValueError:
            raise LexiconError(f"{path}: bad floor header {header['floor']!r}") from None
        if stated != floor:
            raise LexiconError(f"{path}: floor header {stated!r} does not match table minimum {floor!r}")
    meta: dict = {}
    for key in ("iterations", "corpus_size"):
        if key in header:
            meta[key] = int(header[key])
    for key in ("diagonal_prior", "null_word"):
        if key in header:
            meta[key] = header[key] == "1"
    if "created" in header:
        meta["created"] = header["created"]
    lexicon = Lexicon(tuple(header["direction"].split("-")), table, floor, meta)
    for e, total in source_sums(lexicon).items():
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise LexiconError(f"{path}: probabilities for source word {e!r} sum to {total:.9f}, not 1")
    return lexicon


def from_probs(probs: dict[tuple[str, str], float], direction: tuple[str, str] = ("src", "tgt")) -> Lexicon:
    """Build a lexicon from explicit probabilities (each source row should sum to 1)."""
    if not probs:
        raise LexiconError("lexicon has no entries")
    table = {}
    for key, p in sorted(probs.items()):
        if not 0.0 < p <= 1.0:
            raise LexiconError(f"probability for {key} must be in (0, 1], got {p}")
        table[key] = math.log(max(p, MIN_PROB))
    return Lexicon(tuple(direction), table, min(table.values()), {"iterations": 0})
