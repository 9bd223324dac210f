"""Duplicate-span detection and Reparandum/Interregnum/Repair segmentation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .corpus import Label, Sentence
from .errors import InconsistentSpans, InvalidConfig

BOS = "<BOS>"
EOS = "<EOS>"

# Negation and filler words commonly found between the copies of a
# disfluent repetition.
DEFAULT_EDITING_LEXICON = frozenset(
    {"nahi", "nahin", "matlab", "yaani", "um", "uh", "haan", "accha", "नहीं", "मतलब", "यानी", "अच्छा"}
)


@dataclass(frozen=True, order=True)
class RiRSpan:
    """One duplication. Ranges are half-open ``(start, end)`` pairs."""

    reparandum: tuple[int, int]
    interregnum: tuple[int, int]
    repair: tuple[int, int]

    def __post_init__(self):
        rs, re_ = self.reparandum
        is_, ie = self.interregnum
        ps, pe = self.repair
        if not (0 <= rs < re_ and re_ == is_ and is_ <= ie and ie == ps and ps < pe):
            raise InconsistentSpans(f"ranges out of order: {self}")
        if re_ - rs != pe - ps:
            raise InconsistentSpans(f"reparandum and repair lengths differ: {self}")

    @classmethod
    def build(cls, start: int, length: int, gap: int) -> "RiRSpan":
        mid = start + length
        return cls((start, mid), (mid, mid + gap), (mid + gap, mid + gap + length))

    @property
    def length(self) -> int:
        return self.reparandum[1] - self.reparandum[0]

    @property
    def gap(self) -> int:
        return self.interregnum[1] - self.interregnum[0]

    @property
    def start(self) -> int:
        return self.reparandum[0]

    @property
    def end(self) -> int:
        return self.repair[1]

    @property
    def offset(self) -> int:
        return self.repair[0] - self.reparandum[0]

    def contains(self, other: "RiRSpan") -> bool:
        """True when ``other`` is a sub-match of this span: same copy offset,
        both copies nested inside ours."""
        return (
            other.offset == self.offset
            and self.reparandum[0] <= other.reparandum[0]
            and other.reparandum[1] <= self.reparandum[1]
            and other != self
        )


@dataclass(frozen=True)
class RirConfig:
    max_interregnum_len: int = 2
    max_phrase_len: int = 3
    match_on: str = "normalized"

    def __post_init__(self):
        if self.max_interregnum_len < 0:
            raise InvalidConfig("max_interregnum_len must be >= 0")
        if self.max_phrase_len < 1:
            raise InvalidConfig("max_phrase_len must be >= 1")
        if self.match_on not in ("normalized", "surface"):
            raise InvalidConfig(f"match_on must be 'normalized' or 'surface', not {self.match_on!r}")


def _keys(sentence: Sentence, config: RirConfig) -> list[str]:
    if config.match_on == "surface":
        return sentence.words
    return sentence.normalized


def find_spans(sentence: Sentence, config: RirConfig = RirConfig()) -> list[RiRSpan]:
    """Scan left to right and emit at most one span per reparandum start.

    Candidates at a position are ranked by gap (smallest first), then by
    phrase length (longest first). A candidate that is a sub-match of an
    already emitted span is skipped, so ``a b a b`` gives a single phrase
    span rather than extra unit spans inside it.
    """
    words = _keys(sentence, config)
    n = len(words)
    spans: list[RiRSpan] = []
    for i in range(n):
        chosen = None
        for gap in range(config.max_interregnum_len + 1):
            for length in range(config.max_phrase_len, 0, -1):
                j = i + length + gap
                if j + length > n:
                    continue
                if words[i : i + length] != words[j : j + length]:
                    continue
                cand = RiRSpan.build(i, length, gap)
                if any(s.contains(cand) for s in spans):
                    continue
                chosen = cand
                break
            if chosen is not None:
                break
        if chosen is not None:
            spans.append(chosen)
    return spans


@dataclass(frozen=True)
class RirRecord:
    """Structural context of one token. Tokens outside every span get the
    empty record (``gap_len is None``)."""

    in_reparandum: bool = False
    in_repair: bool = False
    interregnum_tokens: tuple[str, ...] = ()
    gap_len: int | None = None
    left_word: str | None = None
    right_word: str | None = None

    @property
    def empty(self) -> bool:
        return self.gap_len is None


EMPTY_RECORD = RirRecord()


def annotate_rir_features(sentence: Sentence, spans: Sequence[RiRSpan]) -> list[RirRecord]:
    """Per-token RiR records.

    A token touched by several spans (the middle of a chain) takes its
    interregnum, gap and context words from the leftmost span; both role
    flags are set.
    """
    n = len(sentence)
    words = sentence.normalized
    in_rep = [False] * n
    in_fix = [False] * n
    first: list[RiRSpan | None] = [None] * n
    for span in sorted(spans):
        if span.end > n:
            raise InconsistentSpans(f"{span} exceeds sentence length {n}")
        for k in range(*span.reparandum):
            in_rep[k] = True
            first[k] = first[k] or span
        for k in range(*span.repair):
            in_fix[k] = True
            first[k] = first[k] or span
    out = []
    for k in range(n):
        span = first[k]
        if span is None:
            out.append(EMPTY_RECORD)
            continue
        out.append(
            RirRecord(
                in_reparandum=in_rep[k],
                in_repair=in_fix[k],
                interregnum_tokens=tuple(words[slice(*span.interregnum)]),
                gap_len=span.gap,
                left_word=words[span.start - 1] if span.start > 0 else BOS,
                right_word=words[span.end] if span.end < n else EOS,
            )
        )
    return out


@dataclass(frozen=True)
class HeuristicDecision:
    label: Label
    interregnum: tuple[str, ...]
    editing_terms: tuple[str, ...] = field(default=())


def heuristic_decide(span: RiRSpan, sentence: Sentence, editing_lexicon=DEFAULT_EDITING_LEXICON) -> HeuristicDecision:
    if span.end > len(sentence):
        raise InconsistentSpans(f"{span} exceeds sentence length {len(sentence)}")
    between = tuple(sentence.normalized[slice(*span.interregnum)])
    editing = tuple(w for w in between if w in editing_lexicon)
    label = Label.REP if between else Label.REDUP
    return HeuristicDecision(label, between, editing)


def heuristic_classify(span: RiRSpan, sentence: Sentence, editing_lexicon=DEFAULT_EDITING_LEXICON) -> Label:
    """Non-empty interregnum means disfluent repetition, empty means
    reduplication. The editing lexicon only feeds the decision trace."""
    return heuristic_decide(span, sentence, editing_lexicon).label


def format_range(r: tuple[int, int]) -> str:
    return f"[{r[0]},{r[1]})"


def format_span_line(sentence_id: str, span: RiRSpan, label: Label) -> str:
    return "\t".join(
        (sentence_id, format_range(span.reparandum), format_range(span.interregnum), format_range(span.repair), label.value)
    )
