"""Token corpora: data model, normalization, CoNLL I/O, stratified splits and
fixture verification."""

from __future__ import annotations

import enum
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyDocument,
    InvalidConfig,
    MalformedLine,
    MixedLabeling,
    UnknownLabel,
    UnlabeledCorpus,
)


class Label(enum.Enum):
    REDUP = "reduplication"
    REP = "repetition"
    OTHER = "other"
    O = "O"

    @property
    def index(self) -> int:
        return LABEL_INDEX[self]

    @classmethod
    def parse(cls, text: str) -> "Label":
        return _LABEL_BY_NAME[text]

    def __str__(self) -> str:
        return self.value


# Frozen global order; every tie-break in the package refers to it.
LABELS: tuple[Label, ...] = (Label.REDUP, Label.REP, Label.OTHER, Label.O)
LABEL_INDEX = {lab: i for i, lab in enumerate(LABELS)}
NUM_LABELS = len(LABELS)
_LABEL_BY_NAME = {lab.value: lab for lab in LABELS}

LANGUAGES = ("hi", "te", "mr", "other")
SENTINELS = frozenset({"<BOS>", "<EOS>"})


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def normalize_word(surface: str) -> str:
    """NFC-normalize and strip leading/trailing punctuation.

    Interior punctuation (hyphens, apostrophes) is kept. Sentinel words pass
    through untouched.
    """
    if surface in SENTINELS:
        return surface
    text = unicodedata.normalize("NFC", surface)
    start, end = 0, len(text)
    while start < end and _is_punct(text[start]):
        start += 1
    while end > start and _is_punct(text[end - 1]):
        end -= 1
    return text[start:end]


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    index: int

    @classmethod
    def from_surface(cls, surface: str, index: int) -> "Token":
        return cls(surface, normalize_word(surface), index)


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]
    labels: tuple[Label, ...] | None = None
    language: str = "other"

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"sentence {self.id!r} has no tokens")
        if self.labels is not None:
            labels = tuple(lab if isinstance(lab, Label) else Label.parse(lab) for lab in self.labels)
            object.__setattr__(self, "labels", labels)
        if self.labels is not None and len(self.labels) != len(self.tokens):
            raise ValueError(
                f"sentence {self.id!r}: {len(self.labels)} labels for {len(self.tokens)} tokens"
            )
        if self.language not in LANGUAGES:
            raise ValueError(f"sentence {self.id!r}: unknown language {self.language!r}")

    @classmethod
    def from_words(cls, id: str, words: Sequence[str], labels=None, language: str = "other"):
        tokens = tuple(Token.from_surface(w, i) for i, w in enumerate(words))
        return cls(id, tokens, None if labels is None else tuple(labels), language)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def words(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @property
    def normalized(self) -> list[str]:
        return [t.normalized for t in self.tokens]

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    def signature(self) -> frozenset[Label]:
        """Set of non-O classes present; the stratification key."""
        if self.labels is None:
            return frozenset()
        return frozenset(lab for lab in self.labels if lab is not Label.O)

    def with_labels(self, labels: Sequence[Label] | None) -> "Sentence":
        return Sentence(self.id, self.tokens, None if labels is None else tuple(labels), self.language)


@dataclass(frozen=True)
class CorpusStats:
    sentences: int
    words: int
    labels: Mapping[Label, int]
    languages: Mapping[str, int]
    words_by_language: Mapping[str, int]


@dataclass(frozen=True)
class LabeledCorpus:
    sentences: tuple[Sentence, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.sentences, tuple):
            object.__setattr__(self, "sentences", tuple(self.sentences))

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @cached_property
    def stats(self) -> CorpusStats:
        return recount(self.sentences)

    @property
    def is_labeled(self) -> bool:
        return all(s.labels is not None for s in self.sentences)


def recount(sentences: Iterable[Sentence]) -> CorpusStats:
    labels: Counter = Counter({lab: 0 for lab in LABELS})
    languages: Counter = Counter()
    words_by_language: Counter = Counter()
    n_sent = n_words = 0
    for s in sentences:
        n_sent += 1
        n_words += len(s)
        languages[s.language] += 1
        words_by_language[s.language] += len(s)
        if s.labels is not None:
            labels.update(s.labels)
    return CorpusStats(n_sent, n_words, dict(labels), dict(languages), dict(words_by_language))


def normalize_sentence(raw: Sequence[str]) -> list[Token]:
    out: list[Token] = []
    for surface in raw:
        norm = normalize_word(surface)
        if norm:
            out.append(Token(surface, norm, len(out)))
    return out


def normalize_corpus(corpus: LabeledCorpus) -> LabeledCorpus:
    """Drop tokens that normalize to nothing (with their labels) and any
    sentence left empty."""
    kept = []
    for s in corpus:
        keep = [i for i, t in enumerate(s.tokens) if t.normalized]
        if not keep:
            continue
        if len(keep) == len(s.tokens):
            kept.append(s)
            continue
        tokens = tuple(Token(s.tokens[i].surface, s.tokens[i].normalized, j) for j, i in enumerate(keep))
        labels = None if s.labels is None else tuple(s.labels[i] for i in keep)
        kept.append(Sentence(s.id, tokens, labels, s.language))
    return LabeledCorpus(tuple(kept))


# ---------------------------------------------------------------------------
# CoNLL format


def parse_conll(text: str) -> LabeledCorpus:
    sentences: list[Sentence] = []
    block: list[tuple[int, str, str | None]] = []
    meta: dict[str, str] = {}

    def flush():
        if not block:
            meta.clear()
            return
        has = [lab is not None for _, _, lab in block]
        if any(has) and not all(has):
            raise MixedLabeling(
                f"sentence ending at line {block[-1][0]} mixes labeled and unlabeled lines"
            )
        sid = meta.get("id", f"s{len(sentences) + 1}")
        lang = meta.get("lang", "other")
        if lang not in LANGUAGES:
            raise MalformedLine(block[0][0], f"# lang = {lang}", "unknown language tag")
        words = [w for _, w, _ in block]
        labels = [Label.parse(lab) for _, _, lab in block] if all(has) else None
        sentences.append(Sentence.from_words(sid, words, labels, lang))
        block.clear()
        meta.clear()

    lines = text.split("\n")
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("# "):
            key, sep, value = line[2:].partition("=")
            if sep and key.strip() in ("id", "lang"):
                meta[key.strip()] = value.strip()
            continue
        fields = line.split("\t")
        if len(fields) > 2 or not fields[0] or any(c.isspace() for c in fields[0]):
            raise MalformedLine(lineno, line)
        label = None
        if len(fields) == 2:
            label = fields[1]
            if label not in _LABEL_BY_NAME:
                raise UnknownLabel(lineno, label)
        block.append((lineno, fields[0], label))
    flush()
    if not sentences:
        raise EmptyDocument("document contains no sentences")
    return LabeledCorpus(tuple(sentences))


def write_conll(corpus: LabeledCorpus) -> str:
    out: list[str] = []
    for s in corpus:
        out.append(f"# id = {s.id}")
        out.append(f"# lang = {s.language}")
        if s.labels is None:
            out.extend(t.surface for t in s.tokens)
        else:
            out.extend(f"{t.surface}\t{lab.value}" for t, lab in zip(s.tokens, s.labels))
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


def read_conll(path) -> LabeledCorpus:
    with open(path, encoding="utf-8") as fh:
        return parse_conll(fh.read())


def save_conll(corpus: LabeledCorpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_conll(corpus))


# ---------------------------------------------------------------------------
# Splitting


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    stratify: bool = True

    def __post_init__(self):
        if len(self.ratios) != 3 or any(r < 0 or not math.isfinite(r) for r in self.ratios):
            raise InvalidConfig(f"split ratios must be three non-negative reals: {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise InvalidConfig(f"split ratios must sum to 1: {self.ratios}")


def largest_remainder(n: int, ratios: Sequence[float]) -> list[int]:
    """Apportion ``n`` items by ``ratios``; remainders break ties toward the
    earlier slot."""
    quotas = [n * r for r in ratios]
    sizes = [math.floor(q) for q in quotas]
    order = sorted(range(len(ratios)), key=lambda k: (-(quotas[k] - sizes[k]), k))
    for k in order[: n - sum(sizes)]:
        sizes[k] += 1
    return sizes


def _signature_key(sig: frozenset[Label]) -> tuple[int, ...]:
    return tuple(sorted(LABEL_INDEX[lab] for lab in sig))


def _allocate(bucket_sizes: list[int], ratios: Sequence[float]) -> list[list[int]]:
    """Per-bucket split sizes whose column sums hit the global
    largest-remainder targets exactly."""
    targets = largest_remainder(sum(bucket_sizes), ratios)
    alloc = [[math.floor(n * r) for r in ratios] for n in bucket_sizes]
    need_b = [n - sum(row) for n, row in zip(bucket_sizes, alloc)]
    need_s = [t - sum(row[k] for row in alloc) for k, t in enumerate(targets)]
    cells = sorted(
        ((b, k) for b in range(len(bucket_sizes)) for k in range(len(ratios))),
        key=lambda bk: (-(bucket_sizes[bk[0]] * ratios[bk[1]] - alloc[bk[0]][bk[1]]), bk),
    )
    for b, k in cells:
        if need_b[b] > 0 and need_s[k] > 0:
            alloc[b][k] += 1
            need_b[b] -= 1
            need_s[k] -= 1
    # greedy can strand a few units; place them anywhere still short
    for b in range(len(bucket_sizes)):
        for k in range(len(ratios)):
            while need_b[b] > 0 and need_s[k] > 0:
                alloc[b][k] += 1
                need_b[b] -= 1
                need_s[k] -= 1
    return alloc


def stratified_split(
    corpus: LabeledCorpus, spec: SplitSpec = SplitSpec()
) -> tuple[LabeledCorpus, LabeledCorpus, LabeledCorpus]:
    if not corpus.is_labeled:
        raise UnlabeledCorpus("stratified_split needs every sentence labeled")
    rng = np.random.default_rng(spec.seed)
    if spec.stratify:
        buckets: dict[tuple[int, ...], list[int]] = {}
        for i, s in enumerate(corpus.sentences):
            buckets.setdefault(_signature_key(s.signature()), []).append(i)
        groups = [buckets[k] for k in sorted(buckets)]
    else:
        groups = [list(range(len(corpus)))]
    alloc = _allocate([len(g) for g in groups], spec.ratios)
    parts: list[list[int]] = [[], [], []]
    for members, sizes in zip(groups, alloc):
        perm = rng.permutation(len(members))
        pos = 0
        for k, size in enumerate(sizes):
            parts[k].extend(members[j] for j in perm[pos : pos + size])
            pos += size
    return tuple(
        LabeledCorpus(tuple(corpus.sentences[i] for i in sorted(idx))) for idx in parts
    )


# ---------------------------------------------------------------------------
# Fixture verification

# Sentence and word counts per language and split.
TABLE2 = {
    "hi": {"train": (3622, 103602), "validation": (453, 12950), "test": (453, 12950)},
    "te": {"train": (1289, 36860), "validation": (161, 4608), "test": (161, 4608)},
    "mr": {"train": (1322, 37822), "validation": (165, 4728), "test": (165, 4728)},
}

# Label token counts per split, all languages pooled.
TABLE3 = {
    "train": {Label.REP: 2598, Label.REDUP: 1875, Label.OTHER: 462},
    "validation": {Label.REP: 335, Label.REDUP: 230, Label.OTHER: 62},
    "test": {Label.REP: 330, Label.REDUP: 235, Label.OTHER: 62},
    "total": {Label.REP: 3263, Label.REDUP: 2340, Label.OTHER: 586},
}


def indicredrep_fixture(language: str | None = None, split: str = "total") -> dict:
    """Expected-count table for one IndicRedRep slice.

    ``language`` selects one language's sentence/word counts; ``None`` gives
    the label counts pooled over all languages.
    """
    table: dict = {}
    if language is not None:
        splits = ("train", "validation", "test") if split == "total" else (split,)
        table["sentences"] = sum(TABLE2[language][s][0] for s in splits)
        table["words"] = sum(TABLE2[language][s][1] for s in splits)
    else:
        table["labels"] = {lab.value: n for lab, n in TABLE3[split].items()}
    return table


@dataclass(frozen=True)
class CheckRow:
    name: str
    expected: int
    observed: int

    @property
    def ok(self) -> bool:
        return self.expected == self.observed


@dataclass(frozen=True)
class VerificationReport:
    rows: tuple[CheckRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)

    def format(self) -> str:
        lines = [f"{r.name}\texpected={r.expected}\tobserved={r.observed}\t{'PASS' if r.ok else 'FAIL'}" for r in self.rows]
        lines.append("overall\t" + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "rows": [{"name": r.name, "expected": r.expected, "observed": r.observed, "ok": r.ok} for r in self.rows],
        }


def verify_statistics(corpus: LabeledCorpus, expected: Mapping) -> VerificationReport:
    """Compare corpus counts with a fixture table.

    Recognised keys: ``sentences``, ``words`` and ``labels`` (a mapping from
    serialized label to token count).
    """
    stats = corpus.stats
    rows = []
    if "sentences" in expected:
        rows.append(CheckRow("sentences", int(expected["sentences"]), stats.sentences))
    if "words" in expected:
        rows.append(CheckRow("words", int(expected["words"]), stats.words))
    for name, n in expected.get("labels", {}).items():
        lab = name if isinstance(name, Label) else Label.parse(name)
        rows.append(CheckRow(f"label:{lab.value}", int(n), stats.labels.get(lab, 0)))
    return VerificationReport(tuple(rows))
