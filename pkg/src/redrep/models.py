"""Token classifiers: multinomial logistic regression and a linear-chain CRF,
plus the on-disk model format."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .corpus import LABELS, NUM_LABELS, Label
from .errors import CorruptFile, DimensionMismatch, EmptyData, InvalidConfig, UnsupportedVersion
from .features import OOV, FeatureIndex, FeatureVector, PackedSequence, TemplateSet, pack
from .rir import RirConfig

log = logging.getLogger(__name__)

FORMAT_VERSION = "v1"
MAGIC = "redrep-model"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    batch_size: int = 8
    learning_rate: float = 0.1
    l2: float = 1e-4
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise InvalidConfig("epochs and batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise InvalidConfig("learning_rate must be > 0")
        if self.l2 < 0:
            raise InvalidConfig("l2 must be >= 0")


def _label_ids(labels) -> np.ndarray:
    return np.array([lab.index if isinstance(lab, Label) else int(lab) for lab in labels], dtype=np.int64)


def _check(seq: PackedSequence, num_features: int):
    if seq.max_id >= num_features:
        raise DimensionMismatch(f"feature id {seq.max_id} outside a {num_features}-feature model")


# ---------------------------------------------------------------------------
# Logistic regression


@dataclass
class LogRegModel:
    weights: np.ndarray  # [labels x features]

    @classmethod
    def zeros(cls, num_features: int) -> "LogRegModel":
        return cls(np.zeros((NUM_LABELS, num_features)))

    @property
    def num_features(self) -> int:
        return self.weights.shape[1]

    @property
    def params(self) -> list[np.ndarray]:
        return [self.weights]


def logreg_predict(model: LogRegModel, vector: FeatureVector) -> np.ndarray:
    """Label distribution in ``LABELS`` order."""
    seq = pack([vector])
    _check(seq, model.num_features)
    scores = kernels.emissions(model.weights, seq.indptr, seq.ids, seq.values)
    p = kernels.softmax_rows(scores)[0]
    return p / p.sum()


def logreg_predict_label(model: LogRegModel, vector: FeatureVector) -> Label:
    return LABELS[int(np.argmax(logreg_predict(model, vector)))]


def logreg_tag(model: LogRegModel, vectors: Sequence[FeatureVector]) -> list[Label]:
    seq = pack(vectors)
    _check(seq, model.num_features)
    scores = kernels.emissions(model.weights, seq.indptr, seq.ids, seq.values)
    return [LABELS[i] for i in np.argmax(scores, axis=1)]


def logreg_loglik_grad(model: LogRegModel, data, l2: float = 0.0):
    """Summed log-likelihood of ``(vector, label)`` pairs minus
    ``l2/2 * |W|^2``, and its gradient."""
    vectors = [v for v, _ in data]
    y = _label_ids([lab for _, lab in data])
    seq = pack(vectors)
    _check(seq, model.num_features)
    grad = np.zeros_like(model.weights)
    ll = kernels.logreg_accumulate(model.weights, seq.indptr, seq.ids, seq.values, y, grad, 1.0)
    ll -= 0.5 * l2 * float(np.sum(model.weights**2))
    grad -= l2 * model.weights
    return float(ll), LogRegModel(grad)


# ---------------------------------------------------------------------------
# Linear-chain CRF


@dataclass
class CrfModel:
    unary: np.ndarray  # [labels x features]
    transitions: np.ndarray  # [from x to]
    begin: np.ndarray
    end: np.ndarray

    @classmethod
    def zeros(cls, num_features: int) -> "CrfModel":
        L = NUM_LABELS
        return cls(np.zeros((L, num_features)), np.zeros((L, L)), np.zeros(L), np.zeros(L))

    @property
    def num_features(self) -> int:
        return self.unary.shape[1]

    @property
    def params(self) -> list[np.ndarray]:
        return [self.unary, self.transitions, self.begin, self.end]

    def sq_norm(self) -> float:
        return float(sum(np.sum(p**2) for p in self.params))


def _crf_emissions(model: CrfModel, vectors) -> np.ndarray:
    seq = pack(vectors)
    if len(seq) == 0:
        raise EmptyData("empty sequence")
    _check(seq, model.num_features)
    return kernels.emissions(model.unary, seq.indptr, seq.ids, seq.values)


def crf_log_partition(model: CrfModel, vectors) -> float:
    E = _crf_emissions(model, vectors)
    _, logz = kernels.forward(E, model.transitions, model.begin, model.end)
    return float(logz)


def crf_log_partition_backward(model: CrfModel, vectors) -> float:
    E = _crf_emissions(model, vectors)
    _, logz = kernels.backward(E, model.transitions, model.begin, model.end)
    return float(logz)


def crf_score(model: CrfModel, vectors, labels) -> float:
    E = _crf_emissions(model, vectors)
    return kernels.sequence_score(E, model.transitions, model.begin, model.end, _label_ids(labels))


def crf_marginals(model: CrfModel, vectors) -> np.ndarray:
    """Per-position label marginals, shape ``[n, labels]``."""
    E = _crf_emissions(model, vectors)
    return kernels.crf_marginals(E, model.transitions, model.begin, model.end)


def crf_loglik_grad(model: CrfModel, vectors, labels, l2: float = 0.0):
    seq = pack(vectors)
    y = _label_ids(labels)
    if len(seq) == 0:
        raise EmptyData("empty sequence")
    if len(y) != len(seq):
        raise DimensionMismatch(f"{len(y)} labels for {len(seq)} positions")
    _check(seq, model.num_features)
    grad = CrfModel.zeros(model.num_features)
    ll = kernels.crf_accumulate(
        model.unary, model.transitions, model.begin, model.end,
        seq.indptr, seq.ids, seq.values, y,
        grad.unary, grad.transitions, grad.begin, grad.end, 1.0,
    )
    ll -= 0.5 * l2 * model.sq_norm()
    for g, p in zip(grad.params, model.params):
        g -= l2 * p
    return float(ll), grad


def crf_viterbi(model: CrfModel, vectors) -> tuple[list[Label], float]:
    E = _crf_emissions(model, vectors)
    path, score = kernels.viterbi(E, model.transitions, model.begin, model.end)
    return [LABELS[i] for i in path], float(score)


# ---------------------------------------------------------------------------
# Training


class Adagrad:
    """Per-parameter adaptive steps for gradient ascent."""

    def __init__(self, params: list[np.ndarray], learning_rate: float, eps: float = 1e-8):
        self.params = params
        self.lr = learning_rate
        self.eps = eps
        self.acc = [np.zeros_like(p) for p in params]

    def step(self, grads: list[np.ndarray]) -> None:
        for p, g, a in zip(self.params, grads, self.acc):
            a += g * g
            p += self.lr * g / (np.sqrt(a) + self.eps)


def _batches(n: int, config: TrainConfig, rng: np.random.Generator):
    order = rng.permutation(n) if config.shuffle else np.arange(n)
    for start in range(0, n, config.batch_size):
        yield order[start : start + config.batch_size]


def _infer_features(seqs: Sequence[PackedSequence], num_features: int | None) -> int:
    top = max((s.max_id for s in seqs), default=-1) + 1
    if num_features is None:
        return max(top, 1)
    if top > num_features:
        raise DimensionMismatch(f"feature id {top - 1} outside a {num_features}-feature model")
    return num_features


@dataclass
class TrainTrace:
    epoch_loglik: list[float] = field(default_factory=list)


def logreg_train(data, config: TrainConfig = TrainConfig(), num_features: int | None = None, trace: TrainTrace | None = None) -> LogRegModel:
    """Mini-batch Adagrad on L2-regularized multinomial cross-entropy.

    ``data`` is a sequence of ``(FeatureVector, Label)`` pairs.
    """
    data = list(data)
    if not data:
        raise EmptyData("no training examples")
    seqs = [pack([v]) for v, _ in data]
    F = _infer_features(seqs, num_features)
    y_all = _label_ids([lab for _, lab in data])
    model = LogRegModel.zeros(F)
    opt = Adagrad(model.params, config.learning_rate)
    rng = np.random.default_rng(config.seed)
    grad = np.zeros_like(model.weights)
    for epoch in range(config.epochs):
        for batch in _batches(len(data), config, rng):
            seq = pack([data[i][0] for i in batch])
            grad.fill(0.0)
            kernels.logreg_accumulate(model.weights, seq.indptr, seq.ids, seq.values, y_all[batch], grad, 1.0 / len(batch))
            grad -= config.l2 * model.weights
            opt.step([grad])
        if trace is not None:
            seq = pack([v for v, _ in data])
            scratch = np.zeros_like(grad)
            ll = kernels.logreg_accumulate(model.weights, seq.indptr, seq.ids, seq.values, y_all, scratch, 0.0)
            trace.epoch_loglik.append(ll / len(data) - 0.5 * config.l2 * float(np.sum(model.weights**2)))
    return model


def crf_objective(model: CrfModel, seqs, labels, l2: float) -> float:
    """Mean per-sentence log-likelihood minus ``l2/2 * |theta|^2``."""
    total = 0.0
    for seq, y in zip(seqs, labels):
        E = kernels.emissions(model.unary, seq.indptr, seq.ids, seq.values)
        _, logz = kernels.forward(E, model.transitions, model.begin, model.end)
        total += kernels.sequence_score(E, model.transitions, model.begin, model.end, y) - logz
    return total / len(seqs) - 0.5 * l2 * model.sq_norm()


def crf_train(data, config: TrainConfig = TrainConfig(), num_features: int | None = None, trace: TrainTrace | None = None) -> CrfModel:
    """Mini-batch Adagrad ascent on the L2-regularized conditional
    log-likelihood. ``data`` is a sequence of ``(vectors, labels)`` pairs."""
    data = list(data)
    if not data:
        raise EmptyData("no training sequences")
    seqs = [pack(v) for v, _ in data]
    labels = [_label_ids(y) for _, y in data]
    for s, y in zip(seqs, labels):
        if len(s) == 0:
            raise EmptyData("empty training sequence")
        if len(s) != len(y):
            raise DimensionMismatch(f"{len(y)} labels for {len(s)} positions")
    F = _infer_features(seqs, num_features)
    model = CrfModel.zeros(F)
    grad = CrfModel.zeros(F)
    opt = Adagrad(model.params, config.learning_rate)
    rng = np.random.default_rng(config.seed)
    for epoch in range(config.epochs):
        for batch in _batches(len(data), config, rng):
            for g in grad.params:
                g.fill(0.0)
            scale = 1.0 / len(batch)
            for i in batch:
                s = seqs[i]
                kernels.crf_accumulate(
                    model.unary, model.transitions, model.begin, model.end,
                    s.indptr, s.ids, s.values, labels[i],
                    grad.unary, grad.transitions, grad.begin, grad.end, scale,
                )
            for g, p in zip(grad.params, model.params):
                g -= config.l2 * p
            opt.step(grad.params)
        if trace is not None:
            obj = crf_objective(model, seqs, labels, config.l2)
            trace.epoch_loglik.append(obj)
            log.info("epoch %d mean log-likelihood %.6f", epoch + 1, obj)
    return model


# ---------------------------------------------------------------------------
# Bundles and persistence


@dataclass
class Tagger:
    """A trained model together with everything needed to featurize input."""

    kind: str  # "crf" | "logreg"
    model: CrfModel | LogRegModel
    index: FeatureIndex
    templates: TemplateSet
    rir_config: RirConfig = field(default_factory=RirConfig)

    def __post_init__(self):
        if self.kind not in ("crf", "logreg"):
            raise InvalidConfig(f"unknown model kind {self.kind!r}")
        if self.model.num_features != len(self.index):
            raise DimensionMismatch(
                f"model has {self.model.num_features} features, index has {len(self.index)}"
            )

    def tag_vectors(self, vectors) -> list[Label]:
        if self.kind == "crf":
            return crf_viterbi(self.model, vectors)[0]
        return logreg_tag(self.model, vectors)


def _param_names(kind: str):
    if kind == "crf":
        return ("unary", "transitions", "begin", "end")
    return ("weights",)


def dump_model(tagger: Tagger) -> str:
    t = tagger
    lines = [
        f"{MAGIC} {FORMAT_VERSION} {t.kind}",
        "labels\t" + "\t".join(lab.value for lab in LABELS),
        f"templates\t{t.templates}",
        f"use_rir\t{int(t.templates.use_rir)}",
        f"rir\t{t.rir_config.max_interregnum_len}\t{t.rir_config.max_phrase_len}\t{t.rir_config.match_on}",
        f"min_count\t{t.index.min_count}",
        f"features\t{len(t.index)}",
    ]
    lines.extend(f"{i}\t{name}" for i, name in enumerate(t.index.names))
    for name, arr in zip(_param_names(t.kind), t.model.params):
        mat = np.atleast_2d(arr)
        lines.append(f"param\t{name}\t{mat.shape[0]}\t{mat.shape[1]}")
        lines.extend(" ".join(repr(float(x)) for x in row) for row in mat)
    lines.append("end")
    return "\n".join(lines) + "\n"


class _Cursor:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise CorruptFile("model file is truncated")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def field(self, key) -> list[str]:
        parts = self.next().split("\t")
        if parts[0] != key:
            raise CorruptFile(f"expected {key!r} line, found {parts[0]!r}")
        return parts[1:]


def parse_model(text: str) -> Tagger:
    lines = text.split("\n")
    header = lines[0].split(" ")
    if len(header) != 3 or header[0] != MAGIC:
        raise CorruptFile("not a redrep model file")
    if header[1] != FORMAT_VERSION:
        raise UnsupportedVersion(f"model format {header[1]!r} is not supported (expected {FORMAT_VERSION})")
    kind = header[2]
    if kind not in ("crf", "logreg"):
        raise CorruptFile(f"unknown model kind {kind!r}")
    cur = _Cursor(lines[1:])
    try:
        if tuple(cur.field("labels")) != tuple(lab.value for lab in LABELS):
            raise CorruptFile("label order differs from this build")
        (templates_text,) = cur.field("templates")
        use_rir = cur.field("use_rir") == ["1"]
        gap, phrase, match_on = cur.field("rir")
        (min_count,) = cur.field("min_count")
        (n,) = cur.field("features")
        names = []
        for i in range(int(n)):
            fid, name = cur.next().split("\t")
            if int(fid) != i:
                raise CorruptFile(f"feature ids are not dense at {i}")
            names.append(name)
        params = []
        for pname in _param_names(kind):
            name, rows, cols = cur.field("param")
            if name != pname:
                raise CorruptFile(f"expected parameter {pname!r}, found {name!r}")
            rows, cols = int(rows), int(cols)
            mat = np.array([[float(x) for x in cur.next().split(" ")] for _ in range(rows)], dtype=np.float64)
            if mat.shape != (rows, cols):
                raise CorruptFile(f"parameter {name!r} has shape {mat.shape}, header says {(rows, cols)}")
            params.append(mat)
        if cur.next() != "end":
            raise CorruptFile("missing end marker")
    except ValueError as exc:
        raise CorruptFile(f"malformed model file: {exc}") from exc

    if names[0] != OOV:
        raise CorruptFile("feature 0 must be the OOV slot")
    index = FeatureIndex(names[1:], min_count=int(min_count), frozen=True)
    templates = TemplateSet.parse(templates_text, use_rir=use_rir)
    try:
        rir_config = RirConfig(int(gap), int(phrase), match_on)
    except (ValueError, InvalidConfig) as exc:
        raise CorruptFile(f"bad rir settings: {exc}") from exc
    if kind == "crf":
        unary, transitions, begin, end = params
        model = CrfModel(unary, transitions, begin[0], end[0])
    else:
        model = LogRegModel(params[0])
    try:
        return Tagger(kind, model, index, templates, rir_config)
    except DimensionMismatch as exc:
        raise CorruptFile(str(exc)) from exc


def save_model(tagger: Tagger, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_model(tagger))


def load_model(path) -> Tagger:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptFile(f"model file is not UTF-8: {exc}") from exc
    return parse_model(text)
