"""Corpus and n-best list loading, plus the text normalization shared by every metric."""

from __future__ import annotations

import enum
import json
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterator

from .errors import CorpusError

APOSTROPHES = frozenset("'’")

# A parenthesized span with no period inside except an optional trailing one.
DEFAULT_MARKER_PATTERN = r"\([^().]*\.?\s*\)"


class Mode(enum.Enum):
    WER_TRANSCRIPT = "wer_transcript"
    LEXICAL = "lexical"
    RAW_CASED = "raw_cased"


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]
    mode: Mode

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class Utterance:
    id: str
    hyp_transcript: str
    hyp_translation: str
    ref_transcript: str | None = None
    ref_translation: str | None = None

    def to_json(self) -> dict:
        out = {"id": self.id, "hyp_transcript": self.hyp_transcript, "hyp_translation": self.hyp_translation}
        if self.ref_transcript is not None:
            out["ref_transcript"] = self.ref_transcript
        if self.ref_translation is not None:
            out["ref_translation"] = self.ref_translation
        return out


@dataclass(frozen=True)
class Corpus:
    utterances: tuple[Utterance, ...]
    source_path: str = field(default="", compare=False)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)

    def __getitem__(self, i):
        return self.utterances[i]

    @property
    def ids(self) -> list[str]:
        return [u.id for u in self.utterances]

    def has_references(self, side: str = "both") -> bool:
        """True when every utterance carries the requested reference(s)."""
        need_s = side in ("both", "transcript")
        need_t = side in ("both", "translation")
        return all(
            (not need_s or u.ref_transcript is not None) and (not need_t or u.ref_translation is not None)
            for u in self.utterances
        )


_marker_cache: dict[str, re.Pattern] = {}


def _marker_re(pattern: str) -> re.Pattern:
    if pattern not in _marker_cache:
        _marker_cache[pattern] = re.compile(pattern)
    return _marker_cache[pattern]


def _fold(text: str) -> str:
    # casefold and NFC do not commute for every code point; iterate to a fixed point
    prev = None
    while prev != text:
        prev = text
        text = unicodedata.normalize("NFC", text.casefold())
    return text


def _strip_punct(text: str) -> str:
    chars = []
    n = len(text)
    for i, ch in enumerate(text):
        if unicodedata.category(ch).startswith("P"):
            if (
                ch in APOSTROPHES
                and 0 < i < n - 1
                and text[i - 1].isalnum()
                and text[i + 1].isalnum()
            ):
                chars.append(ch)
            else:
                chars.append(" ")
        else:
            chars.append(ch)
    return "".join(chars)


def normalize(text: str, mode: Mode, marker_pattern: str = DEFAULT_MARKER_PATTERN) -> TokenSeq:
    """Tokenize ``text`` according to ``mode``.

    WER_TRANSCRIPT and LEXICAL share one pipeline: NFC, case folding,
    deletion of parenthesized non-speech markers, punctuation removal
    (word-internal apostrophes survive), whitespace split. RAW_CASED only
    applies NFC and returns the whole string as a single token.
    """
    if not isinstance(mode, Mode):
        raise ValueError(f"unknown normalization mode: {mode!r}")
    text = unicodedata.normalize("NFC", text)
    if mode is Mode.RAW_CASED:
        return TokenSeq((text,) if text else (), mode)
    text = _fold(text)
    text = _marker_re(marker_pattern).sub(" ", text)
    text = _strip_punct(text)
    return TokenSeq(tuple(text.split()), mode)


def remove_markers(text: str, marker_pattern: str = DEFAULT_MARKER_PATTERN) -> str:
    """Delete non-speech markers and collapse the whitespace left behind."""
    return " ".join(_marker_re(marker_pattern).sub(" ", text).split())


def _read_jsonl(path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8", newline=None) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _text_field(obj: dict, name: str, where: str, required: bool) -> str | None:
    value = obj.get(name)
    if value is None:
        if required:
            raise CorpusError(f"{where}: missing required field {name!r}")
        return None
    if not isinstance(value, str):
        raise CorpusError(f"{where}: field {name!r} must be a string")
    return value


def load_corpus(path) -> Corpus:
    utterances = []
    seen: set[str] = set()
    for lineno, obj in _read_jsonl(path):
        where = f"{path}:{lineno}"
        uid = _text_field(obj, "id", where, required=True)
        if not uid:
            raise CorpusError(f"{where}: field 'id' must be non-empty")
        if uid in seen:
            raise CorpusError(f"{where}: duplicate id {uid!r}")
        seen.add(uid)
        utterances.append(
            Utterance(
                id=uid,
                hyp_transcript=_text_field(obj, "hyp_transcript", where, required=True),
                hyp_translation=_text_field(obj, "hyp_translation", where, required=True),
                ref_transcript=_text_field(obj, "ref_transcript", where, required=False),
                ref_translation=_text_field(obj, "ref_translation", where, required=False),
            )
        )
    return Corpus(tuple(utterances), source_path=str(path))


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for utt in corpus:
            fh.write(json.dumps(utt.to_json(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class NBestEntry:
    rank: int
    transcript: str | None = None
    translation: str | None = None
    transcript_score: float | None = None
    translation_score: float | None = None
    joint_score: float | None = None

    @property
    def paired(self) -> bool:
        return self.transcript is not None and self.translation is not None


@dataclass(frozen=True)
class NBestList:
    id: str
    entries: tuple[NBestEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def mode(self) -> str:
        return "paired" if all(e.paired for e in self.entries) else "cross"

    @property
    def transcripts(self) -> list[NBestEntry]:
        return [e for e in self.entries if e.transcript is not None]

    @property
    def translations(self) -> list[NBestEntry]:
        return [e for e in self.entries if e.translation is not None]


def _score_field(obj: dict, name: str, where: str) -> float | None:
    value = obj.get(name)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CorpusError(f"{where}: field {name!r} must be a number")
    return float(value)


def load_nbest(path) -> list[NBestList]:
    """Group n-best records by utterance id, keeping first-appearance and file order."""
    groups: dict[str, list[NBestEntry]] = {}
    for lineno, obj in _read_jsonl(path):
        where = f"{path}:{lineno}"
        uid = _text_field(obj, "id", where, required=True)
        if not uid:
            raise CorpusError(f"{where}: field 'id' must be non-empty")
        rank = obj.get("rank")
        if isinstance(rank, bool) or not isinstance(rank, int):
            raise CorpusError(f"{where}: missing required integer field 'rank'")
        transcript = _text_field(obj, "transcript", where, required=False)
        translation = _text_field(obj, "translation", where, required=False)
        if transcript is None and translation is None:
            raise CorpusError(f"{where}: record has neither 'transcript' nor 'translation'")
        entry = NBestEntry(
            rank=rank,
            transcript=transcript,
            translation=translation,
            transcript_score=_score_field(obj, "transcript_score", where),
            translation_score=_score_field(obj, "translation_score", where),
            joint_score=_score_field(obj, "joint_score", where),
        )
        groups.setdefault(uid, []).append(entry)
    out = []
    for uid, entries in groups.items():
        if not entries:
            raise CorpusError(f"{path}: empty candidate list for id {uid!r}")
        out.append(NBestList(uid, tuple(entries)))
    return out


def read_lines(path) -> list[str]:
    """Read a plain one-item-per-line text file (LF or CRLF)."""
    with open(path, encoding="utf-8", newline=None) as fh:
        return [line.rstrip("\n") for line in fh]
