"""Sparse feature templates and the frozen feature index."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import LabeledCorpus, Sentence
from .errors import DimensionMismatch, EmptyCorpus, IndexNotFrozen, InvalidConfig
from .rir import BOS, EOS, EMPTY_RECORD, RirConfig, RirRecord, annotate_rir_features, find_spans

LEXICAL_TEMPLATES = ("W0", "W-1", "W+1", "EQ_PREV", "EQ_NEXT", "PREFIX3", "SUFFIX3")
RIR_TEMPLATES = (
    "RIR_IN_REPARANDUM",
    "RIR_IN_REPAIR",
    "RIR_INTERREGNUM_WORD",
    "RIR_GAP_LEN",
    "RIR_LEFT_WORD",
    "RIR_RIGHT_WORD",
)
ALL_TEMPLATES = LEXICAL_TEMPLATES + RIR_TEMPLATES

OOV = "<OOV>"


@dataclass(frozen=True)
class TemplateSet:
    templates: tuple[str, ...] = ALL_TEMPLATES
    use_rir: bool = True

    def __post_init__(self):
        unknown = [t for t in self.templates if t not in ALL_TEMPLATES]
        if unknown:
            raise InvalidConfig(f"unknown templates: {', '.join(unknown)}")
        if not self.use_rir and any(t in RIR_TEMPLATES for t in self.templates):
            raise InvalidConfig("RIR_* templates enabled while use_rir is off")
        # canonical order so equal sets compare equal
        ordered = tuple(t for t in ALL_TEMPLATES if t in self.templates)
        object.__setattr__(self, "templates", ordered)

    @classmethod
    def default(cls, use_rir: bool = True) -> "TemplateSet":
        return cls(ALL_TEMPLATES if use_rir else LEXICAL_TEMPLATES, use_rir)

    @classmethod
    def parse(cls, text: str, use_rir: bool | None = None) -> "TemplateSet":
        names = tuple(t.strip() for t in text.split(",") if t.strip())
        if use_rir is None:
            use_rir = any(t in RIR_TEMPLATES for t in names)
        elif not use_rir:
            names = tuple(t for t in names if t not in RIR_TEMPLATES)
        return cls(names, use_rir)

    def without_rir(self) -> "TemplateSet":
        return TemplateSet(tuple(t for t in self.templates if t not in RIR_TEMPLATES), False)

    def with_rir(self) -> "TemplateSet":
        return TemplateSet(tuple(self.templates) + RIR_TEMPLATES, True)

    def __str__(self) -> str:
        return ",".join(self.templates)


def rir_records(sentence: Sentence, templates: TemplateSet, rir_config: RirConfig = RirConfig()) -> list[RirRecord]:
    """Records for extraction; skips span detection when RiR is off."""
    if not templates.use_rir:
        return [EMPTY_RECORD] * len(sentence)
    return annotate_rir_features(sentence, find_spans(sentence, rir_config))


def feature_names(sentence: Sentence, records: Sequence[RirRecord], templates: TemplateSet) -> list[list[str]]:
    words = sentence.normalized
    n = len(words)
    enabled = set(templates.templates)
    use_rir = templates.use_rir
    out = []
    for i, w in enumerate(words):
        prev = words[i - 1] if i > 0 else BOS
        nxt = words[i + 1] if i + 1 < n else EOS
        f = []
        if "W0" in enabled:
            f.append("W0=" + w)
        if "W-1" in enabled:
            f.append("W-1=" + prev)
        if "W+1" in enabled:
            f.append("W+1=" + nxt)
        if "EQ_PREV" in enabled and i > 0 and prev == w:
            f.append("EQ_PREV")
        if "EQ_NEXT" in enabled and i + 1 < n and nxt == w:
            f.append("EQ_NEXT")
        if "PREFIX3" in enabled:
            f.append("PREFIX3=" + w[:3])
        if "SUFFIX3" in enabled:
            f.append("SUFFIX3=" + w[-3:])
        rec = records[i]
        if use_rir and not rec.empty:
            if "RIR_IN_REPARANDUM" in enabled and rec.in_reparandum:
                f.append("RIR_IN_REPARANDUM")
            if "RIR_IN_REPAIR" in enabled and rec.in_repair:
                f.append("RIR_IN_REPAIR")
            if "RIR_INTERREGNUM_WORD" in enabled:
                f.extend("RIR_INTERREGNUM_WORD=" + x for x in dict.fromkeys(rec.interregnum_tokens))
            if "RIR_GAP_LEN" in enabled:
                f.append(f"RIR_GAP_LEN={rec.gap_len}")
            if "RIR_LEFT_WORD" in enabled:
                f.append("RIR_LEFT_WORD=" + rec.left_word)
            if "RIR_RIGHT_WORD" in enabled:
                f.append("RIR_RIGHT_WORD=" + rec.right_word)
        out.append(f)
    return out


class FeatureIndex:
    """Feature name <-> dense id. Id 0 is the reserved OOV slot; the rest
    are assigned in lexicographic name order."""

    def __init__(self, names: Iterable[str] = (), min_count: int = 1, frozen: bool = False):
        self.min_count = min_count
        self._names: list[str] = [OOV]
        self._ids: dict[str, int] = {OOV: 0}
        for name in names:
            self._add(name)
        self.frozen = frozen

    def _add(self, name: str) -> int:
        if name not in self._ids:
            self._ids[name] = len(self._names)
            self._names.append(name)
        return self._ids[name]

    def add(self, name: str) -> int:
        if self.frozen:
            return self._ids.get(name, 0)
        return self._add(name)

    def freeze(self) -> "FeatureIndex":
        self.frozen = True
        return self

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name) -> bool:
        return name in self._ids

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureIndex) and self._names == other._names

    def get(self, name: str) -> int:
        return self._ids.get(name, 0)

    def name(self, fid: int) -> str:
        return self._names[fid]

    @property
    def names(self) -> list[str]:
        return list(self._names)

    def as_dict(self) -> dict[str, int]:
        return dict(self._ids)


def fit_feature_index(
    corpus: LabeledCorpus | Sequence[Sentence],
    templates: TemplateSet,
    min_count: int = 1,
    rir_config: RirConfig = RirConfig(),
) -> FeatureIndex:
    sentences = list(corpus)
    if not sentences:
        raise EmptyCorpus("cannot fit a feature index on an empty corpus")
    counts: Counter = Counter()
    for s in sentences:
        for names in feature_names(s, rir_records(s, templates, rir_config), templates):
            counts.update(names)
    kept = sorted(n for n, c in counts.items() if c >= min_count and n != OOV)
    return FeatureIndex(kept, min_count=min_count, frozen=True)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    ids: np.ndarray
    values: np.ndarray

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FeatureVector)
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.values, other.values)
        )

    def __len__(self) -> int:
        return len(self.ids)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.ids.tolist(), self.values.tolist()))

    @classmethod
    def from_dict(cls, d: dict[int, float]) -> "FeatureVector":
        ids = np.array(sorted(d), dtype=np.int64)
        return cls(ids, np.array([d[i] for i in ids.tolist()], dtype=np.float64))


def vectorize(names: Sequence[str], index: FeatureIndex) -> FeatureVector:
    acc: dict[int, float] = {}
    for name in names:
        fid = index.get(name)
        acc[fid] = acc.get(fid, 0.0) + 1.0
    return FeatureVector.from_dict(acc)


def extract_features(
    sentence: Sentence,
    records: Sequence[RirRecord] | None,
    index: FeatureIndex,
    templates: TemplateSet,
) -> list[FeatureVector]:
    if not index.frozen:
        raise IndexNotFrozen("freeze the feature index before extraction")
    if records is None or not templates.use_rir:
        records = [EMPTY_RECORD] * len(sentence)
    if len(records) != len(sentence):
        raise DimensionMismatch(f"{len(records)} RiR records for {len(sentence)} tokens")
    return [vectorize(names, index) for names in feature_names(sentence, records, templates)]


@dataclass(frozen=True, eq=False)
class PackedSequence:
    """CSR layout of one sentence's feature vectors, as the kernels want it."""

    indptr: np.ndarray
    ids: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.indptr) - 1

    @property
    def max_id(self) -> int:
        return int(self.ids.max()) if len(self.ids) else -1


def pack(vectors: Sequence[FeatureVector]) -> PackedSequence:
    if isinstance(vectors, PackedSequence):
        return vectors
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    np.cumsum([len(v) for v in vectors], out=indptr[1:])
    if vectors:
        ids = np.concatenate([v.ids for v in vectors]).astype(np.int64, copy=False)
        values = np.concatenate([v.values for v in vectors]).astype(np.float64, copy=False)
    else:
        ids = np.zeros(0, dtype=np.int64)
        values = np.zeros(0, dtype=np.float64)
    return PackedSequence(indptr, ids, values)
