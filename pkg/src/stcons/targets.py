"""Consistency-oriented label smoothing targets for an external trainer.

Each output position gets (1 - eps) on its reference token and eps spread over
the tokens of the *other* output (the transcript when emitting translation
targets, and vice versa).
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Collection, Sequence

from .errors import TargetError

DEFAULT_EPSILON = 0.1


class Side(enum.Enum):
    TRANSCRIPT = "transcript"
    TRANSLATION = "translation"


@dataclass(frozen=True)
class SmoothedTargets:
    side: Side
    epsilon: float
    rows: tuple[dict[str, float], ...]
    vocab_ref: str = ""

    def to_json(self, uid: str) -> dict:
        return {
            "id": uid,
            "side": self.side.value,
            "epsilon": self.epsilon,
            "vocab_ref": self.vocab_ref,
            "rows": [[[tok, p] for tok, p in row.items()] for row in self.rows],
        }


def smoothing_targets(
    s_tokens: Sequence[str],
    t_tokens: Sequence[str],
    side: Side | str,
    epsilon: float = DEFAULT_EPSILON,
    vocab: Collection[str] | None = None,
    distinct_types: bool = False,
    vocab_ref: str = "",
) -> SmoothedTargets:
    """Build one sparse target row per position of ``side``.

    By default the smoothing mass follows token occurrences on the opposite
    side, so a word appearing twice receives twice the share. With
    ``distinct_types`` every distinct word gets an equal share instead.
    """
    side = Side(side)
    if not 0.0 <= epsilon <= 1.0:
        raise TargetError(f"epsilon must lie in [0, 1], got {epsilon}")
    s_tokens, t_tokens = list(s_tokens), list(t_tokens)
    if vocab is not None:
        for tok in s_tokens + t_tokens:
            if tok not in vocab:
                raise TargetError(f"token {tok!r} is not in the vocabulary")
    own, other = (t_tokens, s_tokens) if side is Side.TRANSLATION else (s_tokens, t_tokens)
    if epsilon > 0 and not other:
        raise TargetError(f"epsilon > 0 needs a non-empty {'transcript' if side is Side.TRANSLATION else 'translation'}")

    spread: dict[str, float] = {}
    if epsilon > 0:
        counts = Counter(other)
        if distinct_types:
            share = epsilon / len(counts)
            spread = {tok: share for tok in counts}
        else:
            spread = {tok: epsilon * c / len(other) for tok, c in counts.items()}

    rows = []
    for ref_tok in own:
        row = {ref_tok: 1.0 - epsilon}
        for tok, p in spread.items():
            row[tok] = row.get(tok, 0.0) + p
        rows.append(row)
    return SmoothedTargets(side, epsilon, tuple(rows), vocab_ref)
