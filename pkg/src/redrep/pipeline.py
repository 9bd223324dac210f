"""Glue between corpora, features and models: training, tagging, scoring
and the RiR ablation."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import LabeledCorpus, Sentence
from .errors import InvalidConfig, UnlabeledCorpus
from .eval import EvalReport, evaluate
from .features import FeatureIndex, TemplateSet, extract_features, fit_feature_index, rir_records
from .models import Tagger, TrainConfig, crf_train, logreg_train
from .rir import RirConfig


def sentence_vectors(sentence: Sentence, index: FeatureIndex, templates: TemplateSet, rir_config: RirConfig):
    return extract_features(sentence, rir_records(sentence, templates, rir_config), index, templates)


def train_tagger(
    corpus: LabeledCorpus,
    kind: str = "crf",
    templates: TemplateSet | None = None,
    rir_config: RirConfig = RirConfig(),
    train_config: TrainConfig = TrainConfig(),
    min_count: int = 1,
    trace=None,
) -> Tagger:
    if not corpus.is_labeled:
        raise UnlabeledCorpus("training corpus has unlabeled sentences")
    templates = templates or TemplateSet.default()
    index = fit_feature_index(corpus, templates, min_count, rir_config)
    seqs = [(sentence_vectors(s, index, templates, rir_config), s.labels) for s in corpus]
    if kind == "crf":
        model = crf_train(seqs, train_config, num_features=len(index), trace=trace)
    elif kind == "logreg":
        tokens = [(v, lab) for vecs, labels in seqs for v, lab in zip(vecs, labels)]
        model = logreg_train(tokens, train_config, num_features=len(index), trace=trace)
    else:
        raise InvalidConfig(f"unknown model kind {kind!r}")
    return Tagger(kind, model, index, templates, rir_config)


def tag_sentence(tagger: Tagger, sentence: Sentence):
    return tagger.tag_vectors(sentence_vectors(sentence, tagger.index, tagger.templates, tagger.rir_config))


def predict_corpus(tagger: Tagger, corpus: LabeledCorpus) -> LabeledCorpus:
    return LabeledCorpus(tuple(s.with_labels(tag_sentence(tagger, s)) for s in corpus))


def evaluate_tagger(tagger: Tagger, corpus: LabeledCorpus) -> EvalReport:
    if not corpus.is_labeled:
        raise UnlabeledCorpus("evaluation corpus has unlabeled sentences")
    pred = predict_corpus(tagger, corpus)
    return evaluate([s.labels for s in corpus], [s.labels for s in pred])


@dataclass(frozen=True)
class AblationReport:
    without_rir: EvalReport
    with_rir: EvalReport

    @property
    def delta(self) -> float:
        return self.with_rir.macro_f1 - self.without_rir.macro_f1

    def to_json(self) -> dict:
        return {
            "without_rir": self.without_rir.to_json(),
            "with_rir": self.with_rir.to_json(),
            "macro_f1_delta": self.delta,
        }


def run_ablation(
    train: LabeledCorpus,
    test: LabeledCorpus,
    kind: str = "crf",
    templates: TemplateSet | None = None,
    rir_config: RirConfig = RirConfig(),
    train_config: TrainConfig = TrainConfig(),
    min_count: int = 1,
) -> AblationReport:
    """Train the same model kind with and without RIR_* templates on
    identical data and seeds and score both on ``test``."""
    templates = templates or TemplateSet.default()
    reports = []
    with_rir = templates if templates.use_rir else templates.with_rir()
    for ts in (templates.without_rir(), with_rir):
        tagger = train_tagger(train, kind, ts, rir_config, train_config, min_count)
        reports.append(evaluate_tagger(tagger, test))
    return AblationReport(*reports)
