import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import sent
from redrep.corpus import (
    LABELS,
    Label,
    LabeledCorpus,
    Sentence,
    SplitSpec,
    indicredrep_fixture,
    largest_remainder,
    normalize_corpus,
    normalize_sentence,
    normalize_word,
    parse_conll,
    recount,
    stratified_split,
    verify_statistics,
    write_conll,
)
from redrep.errors import (
    EmptyDocument,
    InvalidConfig,
    MalformedLine,
    MixedLabeling,
    UnknownLabel,
    UnlabeledCorpus,
)


def test_label_serialization():
    assert [lab.value for lab in LABELS] == ["reduplication", "repetition", "other", "O"]
    assert Label.parse("O") is Label.O
    with pytest.raises(KeyError):
        Label.parse("o")


def test_parse_doubled_word():
    c = parse_conll("bohot\treduplication\nbohot\treduplication\n\n")
    assert len(c) == 1
    assert c.sentences[0].words == ["bohot", "bohot"]
    assert c.sentences[0].labels == (Label.REDUP, Label.REDUP)


def test_parse_empty_document():
    with pytest.raises(EmptyDocument):
        parse_conll("")
    with pytest.raises(EmptyDocument):
        parse_conll("\n\n# id = x\n\n")


@pytest.mark.parametrize(
    "text, exc",
    [
        ("a\tO\textra\n", MalformedLine),
        ("a b\tO\n", MalformedLine),
        ("a\tREDUP\n", UnknownLabel),
        ("a\tO\nb\n\n", MixedLabeling),
    ],
)
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_conll(text)


def test_parse_error_reports_line_number():
    with pytest.raises(UnknownLabel, match="line 3"):
        parse_conll("a\tO\n\nb\tnope\n")


def test_parse_comments_and_unlabeled():
    text = "# id = s9\n# lang = te\n# some note\nx\ny\n\n# id = s10\nz\tO\n"
    c = parse_conll(text)
    assert [s.id for s in c] == ["s9", "s10"]
    assert c.sentences[0].language == "te"
    assert c.sentences[0].labels is None
    assert c.sentences[1].labels == (Label.O,)


def test_write_repetition_lines():
    c = LabeledCorpus((sent(["mai", "mai"], [Label.REP, Label.REP], id="r1"),))
    text = write_conll(c)
    assert "mai\trepetition\nmai\trepetition\n\n" in text
    assert text.startswith("# id = r1\n")


def test_write_unlabeled_bare_tokens():
    c = LabeledCorpus((sent(["vah", "ghar"], None, id="u"),))
    body = [ln for ln in write_conll(c).splitlines() if ln and not ln.startswith("# ")]
    assert body == ["vah", "ghar"]


def test_roundtrip_fixture_file(tmp_path):
    c = LabeledCorpus(
        (
            sent(["aapka", "bohot", "bohot", "shukriya"], ["O", "reduplication", "reduplication", "O"], id="a"),
            sent(["mai", "mai", "ghar"], ["repetition", "repetition", "O"], id="b", language="mr"),
            sent(["nau", "do", "ek", "ek"], None, id="c", language="other"),
        )
    )
    path = tmp_path / "three.conll"
    path.write_text(write_conll(c), encoding="utf-8")
    assert parse_conll(path.read_text(encoding="utf-8")) == c


words = st.text(
    alphabet=st.characters(blacklist_categories=("Cs", "Zs", "Zl", "Zp", "Cc")), min_size=1, max_size=6
).filter(lambda w: not w.startswith("#"))
sentence_strategy = st.integers(1, 8).flatmap(
    lambda n: st.tuples(
        st.lists(words, min_size=n, max_size=n),
        st.one_of(st.none(), st.lists(st.sampled_from(LABELS), min_size=n, max_size=n)),
        st.sampled_from(["hi", "te", "mr", "other"]),
    )
)


@settings(max_examples=60, deadline=None)
@given(st.lists(sentence_strategy, min_size=1, max_size=6))
def test_roundtrip_property(items):
    c = LabeledCorpus(tuple(sent(w, lab, id=f"s{i}", language=lang) for i, (w, lab, lang) in enumerate(items)))
    assert parse_conll(write_conll(c)) == c


# -- normalization ----------------------------------------------------------


def test_normalize_strips_danda():
    toks = normalize_sentence(["शुक्रिया।"])
    assert len(toks) == 1
    assert toks[0].normalized == "शुक्रिया"
    assert toks[0].surface == "शुक्रिया।"


def test_normalize_drops_punctuation_tokens():
    assert normalize_sentence(["।", "?"]) == []


def test_normalize_identity_on_clean():
    toks = normalize_sentence(["bohot", "bohot"])
    assert [t.surface for t in toks] == ["bohot", "bohot"]
    assert [t.normalized for t in toks] == ["bohot", "bohot"]
    assert [t.index for t in toks] == [0, 1]


def test_normalize_keeps_interior_hyphen_and_reindexes():
    toks = normalize_sentence(["\"mai-mai", ",", "ghar's!"])
    assert [t.normalized for t in toks] == ["mai-mai", "ghar's"]
    assert [t.index for t in toks] == [0, 1]


def test_normalize_nfc():
    decomposed = "é"
    assert normalize_word(decomposed) == "é"


@given(st.lists(st.text(max_size=5), max_size=6))
def test_normalize_idempotent(raw):
    once = normalize_sentence(raw)
    twice = normalize_sentence([t.normalized for t in once])
    assert [t.normalized for t in twice] == [t.normalized for t in once]


def test_normalize_corpus_drops_labels_with_tokens():
    c = LabeledCorpus((sent(["bohot", "bohot", "।"], ["reduplication", "reduplication", "O"], id="x"),
                       sent(["?"], ["O"], id="y")))
    n = normalize_corpus(c)
    assert len(n) == 1
    assert n.sentences[0].words == ["bohot", "bohot"]
    assert n.sentences[0].labels == (Label.REDUP, Label.REDUP)


# -- data model ---------------------------------------------------------------


def test_sentence_invariants():
    with pytest.raises(ValueError):
        Sentence("x", ())
    with pytest.raises(ValueError):
        sent(["a", "b"], ["O"])


def test_stats_consistent_with_recount():
    c = parse_conll("a\tO\nb\trepetition\n\nc\tother\n\n")
    assert c.stats == recount(c.sentences)
    assert c.stats.labels[Label.REP] == 1
    assert c.stats.words == 3


# -- splitting ----------------------------------------------------------------


def test_largest_remainder_hindi_shape():
    assert largest_remainder(4528, (0.8, 0.1, 0.1)) == [3622, 453, 453]


def _mk_corpus(signatures):
    out = []
    for i, sig in enumerate(signatures):
        labels = ["O", "O"] + [lab.value for lab in sig]
        words = [f"w{i}", "x"] + ["y"] * len(sig)
        out.append(sent(words, labels, id=f"s{i}"))
    return LabeledCorpus(tuple(out))


def test_split_4528_sizes():
    c = _mk_corpus([()] * 4528)
    parts = stratified_split(c, SplitSpec(seed=3))
    assert [len(p) for p in parts] == [3622, 453, 453]


def test_split_deterministic():
    c = _mk_corpus([(Label.REP,)] * 10)
    a = stratified_split(c, SplitSpec(seed=11))
    b = stratified_split(c, SplitSpec(seed=11))
    assert [[s.id for s in p] for p in a] == [[s.id for s in p] for p in b]


def test_split_stratified_proportions():
    # 25% of sentences carry reduplication
    sigs = [(Label.REDUP,) if i % 4 == 0 else (Label.REP,) for i in range(1000)]
    parts = stratified_split(_mk_corpus(sigs), SplitSpec(seed=5))
    for p in parts:
        share = sum(Label.REDUP in s.signature() for s in p) / len(p)
        assert abs(share - 0.25) <= 0.25 * 0.05


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.sampled_from([(), (Label.REDUP,), (Label.REP,), (Label.OTHER,), (Label.REDUP, Label.REP)]), min_size=1, max_size=80),
    st.integers(0, 2**63),
    st.booleans(),
)
def test_split_partition_property(sigs, seed, stratify):
    c = _mk_corpus(sigs)
    parts = stratified_split(c, SplitSpec(seed=seed, stratify=stratify))
    ids = [s.id for p in parts for s in p]
    assert sorted(ids) == sorted(s.id for s in c)
    assert len(set(ids)) == len(ids)
    targets = largest_remainder(len(c), (0.8, 0.1, 0.1))
    for p, t in zip(parts, targets):
        assert abs(len(p) - t) <= 1


def test_split_requires_labels():
    with pytest.raises(UnlabeledCorpus):
        stratified_split(LabeledCorpus((sent(["a"], None),)))


def test_split_spec_validation():
    with pytest.raises(InvalidConfig):
        SplitSpec((0.5, 0.5, 0.5))
    with pytest.raises(InvalidConfig):
        SplitSpec((1.2, -0.1, -0.1))


# -- fixture verification -------------------------------------------------------


def test_verify_empty_corpus_zero_fixture():
    report = verify_statistics(LabeledCorpus(()), {"sentences": 0, "words": 0, "labels": {"repetition": 0}})
    assert report.passed


def test_verify_reports_mismatch_rows():
    c = parse_conll("a\trepetition\na\trepetition\nb\tO\n\n")
    report = verify_statistics(c, {"sentences": 1, "words": 4, "labels": {"repetition": 2}})
    assert not report.passed
    rows = {r.name: r for r in report.rows}
    assert rows["words"].observed == 3 and not rows["words"].ok
    assert rows["label:repetition"].ok


def test_fixture_tables_published_counts():
    assert indicredrep_fixture("hi", "train") == {"sentences": 3622, "words": 103602}
    assert indicredrep_fixture(None, "total")["labels"] == {"repetition": 3263, "reduplication": 2340, "other": 586}
    # split columns add up to the total column
    per_split = [indicredrep_fixture(None, s)["labels"] for s in ("train", "validation", "test")]
    for lab in ("repetition", "reduplication", "other"):
        assert sum(t[lab] for t in per_split) == indicredrep_fixture(None, "total")["labels"][lab]
