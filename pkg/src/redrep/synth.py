"""Seeded template generator for labeled reduplication/repetition corpora."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Label, LabeledCorpus, Sentence, LANGUAGES
from .errors import InvalidConfig

# Transliterated Hindi placeholders. Real word lists can be swapped in.
GENERAL_WORDS = (
    "aaj", "abhi", "apna", "baat", "bahar", "bazaar", "bachche", "chai", "chalo", "dekho",
    "dost", "din", "desh", "dukaan", "gaon", "gaadi", "ghar", "haath", "hum", "jaana",
    "kaam", "kab", "kal", "kitaab", "kuch", "khana", "log", "mausam", "mera", "mai",
    "naya", "paani", "padhai", "pita", "phool", "raat", "rasta", "sabzi", "sach", "school",
    "shaher", "subah", "tum", "uska", "vah", "yahan", "zindagi", "beta", "kisan", "sarkar",
    "paisa", "kheti", "bimari", "dawai", "mandir", "nadi", "pahad", "rail", "sadak", "mela",
)
REDUPLICABLE_WORDS = (
    "bohot", "jaldi", "dheere", "neela", "chhote", "bade", "alag", "saath", "kabhi", "roz",
    "garam", "thoda", "zor", "baar", "door", "paas", "sundar", "halke", "lambe", "meethe",
)
INTERREGNUM_WORDS = ("nahi", "matlab", "um", "yaani", "arre", "haan")
OTHER_WORDS = (
    "ek", "do", "teen", "char", "paanch", "chhah", "saat", "aath", "nau", "das",
    "ncc", "bjp", "sms", "atm", "upsc",
)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_sentences: int = 1000
    length_range: tuple[int, int] = (5, 12)
    p_redup: float = 0.3
    p_rep: float = 0.3
    p_other: float = 0.1
    p_interregnum: float = 0.5
    p_confusion: float = 0.1
    general: tuple[str, ...] = GENERAL_WORDS
    reduplicable: tuple[str, ...] = REDUPLICABLE_WORDS
    interregnum: tuple[str, ...] = INTERREGNUM_WORDS
    other: tuple[str, ...] = OTHER_WORDS
    language: str = "hi"
    id_prefix: str = "syn"

    def __post_init__(self):
        lo, hi = self.length_range
        if self.n_sentences < 0:
            raise InvalidConfig("n_sentences must be >= 0")
        if lo < 1 or hi < lo:
            raise InvalidConfig(f"bad length_range {self.length_range}")
        for name in ("p_redup", "p_rep", "p_other", "p_interregnum", "p_confusion"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidConfig(f"{name}={p} outside [0, 1]")
        if not self.general or not self.reduplicable:
            raise InvalidConfig("general and reduplicable lexicons must be non-empty")
        if self.p_rep > 0 and self.p_interregnum > 0 and not self.interregnum:
            raise InvalidConfig("interregnum lexicon is empty")
        if self.p_confusion > 0 and not self.interregnum:
            raise InvalidConfig("confusion chains need an interregnum lexicon")
        if self.p_other > 0 and not self.other:
            raise InvalidConfig("other lexicon is empty")
        lexicons = {"general": self.general, "reduplicable": self.reduplicable,
                    "interregnum": self.interregnum, "other": self.other}
        names = list(lexicons)
        for a in range(len(names)):
            for b in range(a + 1, len(names)):
                common = set(lexicons[names[a]]) & set(lexicons[names[b]])
                if common:
                    raise InvalidConfig(f"lexicons {names[a]} and {names[b]} share {sorted(common)[:3]}")
        for lex in lexicons.values():
            if len(set(lex)) != len(lex) or any(not w or any(c.isspace() for c in w) for w in lex):
                raise InvalidConfig("lexicon words must be unique and whitespace-free")
        if len(self.general) < hi + 1:
            raise InvalidConfig(f"general lexicon needs at least {hi + 1} words for length_range {self.length_range}")
        if self.language not in LANGUAGES:
            raise InvalidConfig(f"unknown language {self.language!r}")


@dataclass(frozen=True)
class Injection:
    kind: str  # redup | rep | other | confusion
    labeled: tuple[int, ...]
    interregnum: tuple[int, ...] = ()


@dataclass(frozen=True)
class GenerationTrace:
    records: tuple[tuple[str, tuple[Injection, ...]], ...] = field(default_factory=tuple)

    def lines(self) -> list[str]:
        out = []
        for sid, injections in self.records:
            for inj in injections:
                lab = ",".join(map(str, inj.labeled))
                mid = ",".join(map(str, inj.interregnum)) or "-"
                out.append(f"{sid}\t{inj.kind}\t{lab}\t{mid}")
        return out

    def write(self) -> str:
        lines = self.lines()
        return "\n".join(lines) + ("\n" if lines else "")


def _sentence_rng(seed: int, i: int) -> np.random.Generator:
    # per-sentence streams keep output independent of generation order
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, i])


def _pick(rng, lexicon: Sequence[str], exclude: set) -> str:
    pool = [w for w in lexicon if w not in exclude]
    if not pool:
        pool = list(lexicon)
    return pool[int(rng.integers(len(pool)))]


def _generate_one(cfg: SynthConfig, i: int):
    rng = _sentence_rng(cfg.seed, i)
    lo, hi = cfg.length_range
    base_len = int(rng.integers(lo, hi + 1))
    fire_redup = rng.random() < cfg.p_redup
    fire_rep = rng.random() < cfg.p_rep
    with_int = rng.random() < cfg.p_interregnum
    fire_other = rng.random() < cfg.p_other
    fire_conf = rng.random() < cfg.p_confusion

    general = rng.choice(len(cfg.general), size=base_len + 1, replace=False)
    base = [cfg.general[k] for k in general[:base_len]]
    used = set(base)
    used_int: set = set()
    segments: list[tuple[str, list[tuple[str, Label]]]] = []
    if fire_redup:
        w = _pick(rng, cfg.reduplicable, used)
        used.add(w)
        segments.append(("redup", [(w, Label.REDUP), (w, Label.REDUP)]))
    if fire_rep:
        w = cfg.general[general[base_len]]
        used.add(w)
        seg = [(w, Label.REP)]
        if with_int:
            x = _pick(rng, cfg.interregnum, used_int)
            used_int.add(x)
            seg.append((x, Label.O))
        seg.append((w, Label.REP))
        segments.append(("rep", seg))
    if fire_other:
        w = _pick(rng, cfg.other, used)
        used.add(w)
        segments.append(("other", [(w, Label.OTHER), (w, Label.OTHER)]))
    if fire_conf:
        w = _pick(rng, cfg.reduplicable, used)
        x = _pick(rng, cfg.interregnum, used_int)
        used.add(w)
        used_int.add(x)
        segments.append(("confusion", [(w, Label.REP), (x, Label.O), (w, Label.REP), (w, Label.REDUP)]))

    slots = rng.integers(0, base_len + 1, size=len(segments))
    placed = sorted(range(len(segments)), key=lambda k: (int(slots[k]), k))
    words: list[str] = []
    labels: list[Label] = []
    injections: list[Injection] = []
    seg_iter = iter(placed)
    nxt = next(seg_iter, None)
    for pos in range(base_len + 1):
        while nxt is not None and int(slots[nxt]) == pos:
            kind, seg = segments[nxt]
            start = len(words)
            labeled = tuple(start + k for k, (_, lab) in enumerate(seg) if lab is not Label.O)
            between = tuple(start + k for k, (_, lab) in enumerate(seg) if lab is Label.O)
            injections.append(Injection(kind, labeled, between))
            for w, lab in seg:
                words.append(w)
                labels.append(lab)
            nxt = next(seg_iter, None)
        if pos < base_len:
            words.append(base[pos])
            labels.append(Label.O)
    sid = f"{cfg.id_prefix}{i:06d}"
    return Sentence.from_words(sid, words, labels, cfg.language), tuple(injections)


def generate_corpus(config: SynthConfig) -> tuple[LabeledCorpus, GenerationTrace]:
    sentences = []
    records = []
    for i in range(config.n_sentences):
        s, inj = _generate_one(config, i)
        sentences.append(s)
        records.append((s.id, inj))
    return LabeledCorpus(tuple(sentences)), GenerationTrace(tuple(records))


@dataclass(frozen=True)
class CountExpectation:
    mean: float
    sd: float


def _bern_var(p: float) -> float:
    return p * (1.0 - p)


def expected_counts(config: SynthConfig) -> dict[Label, CountExpectation]:
    """Analytic mean and binomial standard deviation of each label's token
    total."""
    n = config.n_sentences
    pr, pp, po, pc = config.p_redup, config.p_rep, config.p_other, config.p_confusion
    q = pp * config.p_interregnum
    lo, hi = config.length_range
    width = hi - lo + 1
    per = {
        Label.REDUP: (2 * pr + pc, 4 * _bern_var(pr) + _bern_var(pc)),
        Label.REP: (2 * pp + 2 * pc, 4 * _bern_var(pp) + 4 * _bern_var(pc)),
        Label.OTHER: (2 * po, 4 * _bern_var(po)),
        Label.O: ((lo + hi) / 2 + q + pc, (width * width - 1) / 12 + _bern_var(q) + _bern_var(pc)),
    }
    return {lab: CountExpectation(n * m, math.sqrt(n * v)) for lab, (m, v) in per.items()}
