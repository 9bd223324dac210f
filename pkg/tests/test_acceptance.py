"""Acceptance criteria 1-9. Each test prints one ``ACCEPTANCE`` line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or as a script:
``python tests/test_acceptance.py``.
"""

import io
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import brute_log_partition, brute_viterbi, finite_difference, max_rel_error, random_crf, random_vectors, sent  # noqa: E402
from redrep.corpus import (  # noqa: E402
    LABELS,
    Label,
    LabeledCorpus,
    SplitSpec,
    indicredrep_fixture,
    parse_conll,
    read_conll,
    stratified_split,
    verify_statistics,
    write_conll,
)
from redrep.errors import DegenerateAgreement  # noqa: E402
from redrep.eval import build_confusion, compute_metrics, fleiss_kappa  # noqa: E402
from redrep.features import TemplateSet  # noqa: E402
from redrep.models import LogRegModel, TrainConfig, crf_log_partition, crf_loglik_grad, crf_viterbi, load_model, logreg_loglik_grad, save_model  # noqa: E402
from redrep.pipeline import run_ablation, sentence_vectors, train_tagger  # noqa: E402
from redrep.rir import find_spans, heuristic_classify  # noqa: E402
from redrep.synth import SynthConfig, generate_corpus  # noqa: E402

F = 6


class Criterion:
    def __init__(self, number, title, limit=None):
        self.number, self.title, self.limit = number, title, limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        self.detail = ""
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        over = self.limit is not None and elapsed >= self.limit
        if exc_type is pytest.skip.Exception:
            status = "SKIP"
        else:
            status = "FAIL" if exc_type is not None or over else "PASS"
        note = self.detail or (str(exc).splitlines()[0] if exc else "")
        if over:
            note += f" (runtime {elapsed:.1f}s over the {self.limit}s limit)"
        print(f"\nACCEPTANCE {self.number} {status}: {self.title} [{elapsed:.1f}s] {note}", flush=True)
        if over and exc_type is None:
            raise AssertionError(f"criterion {self.number} exceeded {self.limit}s")
        return False


def test_criterion_1_crf_exactness():
    with Criterion(1, "Viterbi and log-partition equal brute force", limit=10) as c:
        worst = 0.0
        for seed in range(50):
            rng = np.random.default_rng(10_000 + seed)
            integer = seed % 2 == 1  # odd seeds: integer weights with many ties
            m = random_crf(rng, F, integer=integer)
            vecs = random_vectors(rng, int(rng.integers(1, 6)), F)
            if integer:
                vecs = [type(v)(v.ids, np.ones(len(v))) for v in vecs]
            path, _ = crf_viterbi(m, vecs)
            assert [lab.index for lab in path] == brute_viterbi(m, vecs)[0], f"seed {seed}"
            err = abs(crf_log_partition(m, vecs) - brute_log_partition(m, vecs))
            worst = max(worst, err)
            assert err < 1e-8, f"seed {seed}: logZ error {err}"
        c.detail = f"50 instances, max logZ error {worst:.1e}"


def test_criterion_2_gradients():
    with Criterion(2, "CRF and logreg gradients match central differences", limit=30) as c:
        worst = 0.0
        for seed in range(20):
            rng = np.random.default_rng(20_000 + seed)
            m = random_crf(rng, F)
            n = int(rng.integers(1, 6))
            vecs = random_vectors(rng, n, F)
            y = rng.integers(0, 4, size=n)
            _, g = crf_loglik_grad(m, vecs, y, l2=0.01)
            num = finite_difference(lambda: crf_loglik_grad(m, vecs, y, l2=0.01)[0], m.params, h=1e-5)
            worst = max(worst, max_rel_error(g.params, num))

            w = LogRegModel(rng.normal(size=(4, F)))
            data = [(v, LABELS[int(rng.integers(4))]) for v in random_vectors(rng, 6, F)]
            _, gl = logreg_loglik_grad(w, data, l2=0.01)
            numl = finite_difference(lambda: logreg_loglik_grad(w, data, l2=0.01)[0], w.params, h=1e-5)
            worst = max(worst, max_rel_error(gl.params, numl))
        c.detail = f"40 instances, max relative error {worst:.1e}"
        assert worst < 1e-4


def test_criterion_3_rir_ablation():
    with Criterion(3, "RiR features improve CRF macro F1 on synthetic data", limit=120) as c:
        cfg = SynthConfig(seed=42, n_sentences=2250, p_redup=0.3, p_rep=0.3, p_interregnum=0.6, p_confusion=0.3)
        corpus, _ = generate_corpus(cfg)
        train = LabeledCorpus(corpus.sentences[:2000])
        test = LabeledCorpus(corpus.sentences[2000:])
        report = run_ablation(train, test, "crf", TemplateSet.default(), train_config=TrainConfig(seed=42))
        a, b = report.without_rir.macro_f1, report.with_rir.macro_f1
        c.detail = f"without RiR {a:.4f}, with RiR {b:.4f}, delta {b - a:+.4f}"
        assert b > a
        assert b >= 0.90


def test_criterion_4_heuristic_oracle():
    with Criterion(4, "heuristic labels every generated span correctly", limit=None) as c:
        corpus, trace = generate_corpus(SynthConfig(seed=4, n_sentences=1000, p_interregnum=0.6, p_confusion=0.3))
        checked = 0
        for s, (_, injections) in zip(corpus, trace.records):
            by_start = {sp.reparandum[0]: sp for sp in find_spans(s)}
            for inj in injections:
                expect = []
                if inj.kind == "redup":
                    expect = [(inj.labeled[0], Label.REDUP)]
                elif inj.kind == "rep" and inj.interregnum:
                    expect = [(inj.labeled[0], Label.REP)]
                elif inj.kind == "confusion":
                    expect = [(inj.labeled[0], Label.REP), (inj.labeled[1], Label.REDUP)]
                for start, label in expect:
                    assert heuristic_classify(by_start[start], s) is label, (s.id, inj)
                    checked += 1
        c.detail = f"{checked} spans over 1000 sentences, 100% correct"


def test_criterion_5_metrics_oracle():
    with Criterion(5, "metrics and kappa reproduce hand-derived values") as c:
        m = build_confusion([[Label.REDUP, Label.REP, Label.O, Label.OTHER]],
                            [[Label.REDUP, Label.REDUP, Label.O, Label.OTHER]])
        macro = compute_metrics(m).macro_f1
        assert abs(macro - 5 / 9) <= 1e-15
        assert fleiss_kappa([[3, 0, 0], [0, 3, 0], [0, 0, 3]]) == 1.0
        k = fleiss_kappa([[2, 0], [1, 1]])
        assert abs(k + 1 / 3) <= 1e-12
        with pytest.raises(DegenerateAgreement):
            fleiss_kappa([[3, 0], [3, 0]])
        c.detail = f"macro_f1={macro:.6f}, kappa={k:.12f}"


def test_criterion_6_split_fidelity():
    with Criterion(6, "stratified split sizes and class proportions") as c:
        corpus, _ = generate_corpus(SynthConfig(seed=6, n_sentences=4528))
        parts = stratified_split(corpus, SplitSpec((0.8, 0.1, 0.1), seed=6))
        sizes = [len(p) for p in parts]
        assert sizes == [3622, 453, 453], sizes
        worst = 0.0
        for lab in (Label.REDUP, Label.REP, Label.OTHER):
            overall = sum(lab in s.signature() for s in corpus) / len(corpus)
            for p in parts:
                share = sum(lab in s.signature() for s in p) / len(p)
                worst = max(worst, abs(share - overall) / overall)
        c.detail = f"sizes {sizes}, worst relative deviation {worst:.2%}"
        assert worst <= 0.05


def test_criterion_7_roundtrips(tmp_path):
    with Criterion(7, "CoNLL and model save/load round-trips") as c:
        rng = np.random.default_rng(7)
        alphabet = list("abcdefghijklmnop") + ["नीला", "ঘর", "శుక్రియా", "-", "'", "1", "।"]
        sentences = []
        for i in range(1000):
            n = int(rng.integers(1, 12))
            words = ["".join(rng.choice(alphabet, size=int(rng.integers(1, 5)))) for _ in range(n)]
            labels = None if i % 7 == 0 else [LABELS[int(k)] for k in rng.integers(0, 4, size=n)]
            sentences.append(sent(words, labels, id=f"r{i}", language=["hi", "te", "mr", "other"][i % 4]))
        corpus = LabeledCorpus(tuple(sentences))
        assert parse_conll(write_conll(corpus)) == corpus

        data, _ = generate_corpus(SynthConfig(seed=70, n_sentences=250))
        train = LabeledCorpus(data.sentences[:150])
        tagger = train_tagger(train, "crf", train_config=TrainConfig(epochs=2, seed=0))
        save_model(tagger, tmp_path / "m.rr")
        back = load_model(tmp_path / "m.rr")
        for s in data.sentences[150:]:
            vecs = sentence_vectors(s, tagger.index, tagger.templates, tagger.rir_config)
            assert crf_viterbi(tagger.model, vecs) == crf_viterbi(back.model, vecs)
        for p, q in zip(tagger.model.params, back.model.params):
            assert np.array_equal(p, q)
        c.detail = "1000 CoNLL sentences identical; 100 Viterbi outputs identical"


SPLITS = ("train", "validation", "test")


def test_criterion_8_indicredrep_fixture():
    root = os.environ.get("REDREP_INDICREDREP")
    with Criterion(8, "IndicRedRep statistics match the published tables") as c:
        if not root or not Path(root).is_dir():
            pytest.skip("IndicRedRep not supplied (set REDREP_INDICREDREP=<dir>/<lang>/<split>.conll)")
        pooled = {split: [] for split in SPLITS}
        failures = []
        for lang in ("hi", "te", "mr"):
            for split in SPLITS:
                path = Path(root) / lang / f"{split}.conll"
                corpus = read_conll(path)
                pooled[split].extend(corpus.sentences)
                report = verify_statistics(corpus, indicredrep_fixture(lang, split))
                if not report.passed:
                    failures.append(f"{lang}/{split}")
        everything = LabeledCorpus(tuple(s for split in SPLITS for s in pooled[split]))
        if not verify_statistics(everything, indicredrep_fixture(None, "total")).passed:
            failures.append("labels:total")
        c.detail = "all tables match" if not failures else f"mismatch in {failures}"
        assert not failures


def _pipeline(directory: Path) -> bytes:
    directory.mkdir()
    env = {**os.environ}
    steps = [
        ["synth", "--seed", "9", "--n", "400", "--p-confusion", "0.3", "--out", "corpus.conll"],
        ["split", "--input", "corpus.conll", "--out-dir", ".", "--seed", "9"],
        ["train", "--train", "train.conll", "--out", "model.rr", "--seed", "9", "--epochs", "3"],
        ["eval", "--model", "model.rr", "--test", "test.conll", "--report", "report.json"],
        ["eval", "--train", "train.conll", "--test", "test.conll", "--runs", "2", "--epochs", "2", "--report", "multi.json"],
    ]
    for argv in steps:
        subprocess.run([sys.executable, "-m", "redrep.cli", *argv], cwd=directory, env=env, check=True,
                       stdout=subprocess.DEVNULL)
    return b"".join((directory / name).read_bytes() for name in ("report.json", "multi.json", "model.rr"))


def test_criterion_9_determinism(tmp_path):
    with Criterion(9, "full pipeline is byte-identical across executions") as c:
        first = _pipeline(tmp_path / "first")
        second = _pipeline(tmp_path / "second")
        assert first == second
        c.detail = f"{len(first)} bytes of reports and model compared"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
