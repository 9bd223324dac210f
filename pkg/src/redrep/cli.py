"""``redrep`` command line.

Every flag has a dotted config-file key (``rir.max_interregnum_len = 2``).
Values resolve as: built-in default < config file (``--config`` or
``$REDREP_CONFIG``) < command-line flag. The effective configuration is
embedded in every JSON report.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from . import kernels
from .corpus import (
    TABLE2,
    TABLE3,
    LabeledCorpus,
    SplitSpec,
    indicredrep_fixture,
    normalize_corpus,
    read_conll,
    save_conll,
    stratified_split,
    verify_statistics,
)
from .errors import DataError, InvalidConfig, RedRepError, RunFailed
from .eval import agreement_table, evaluate, fleiss_kappa, format_report, multi_run
from .features import TemplateSet
from .models import TrainConfig, TrainTrace, load_model, save_model
from .pipeline import evaluate_tagger, predict_corpus, run_ablation, train_tagger
from .rir import DEFAULT_EDITING_LEXICON, RirConfig, find_spans, format_span_line, heuristic_classify
from .synth import SynthConfig, generate_corpus

log = logging.getLogger("redrep")

COMMANDS = ("synth", "split", "train", "predict", "eval", "kappa", "verify-stats", "inspect-spans", "ablate")


class UsageError(RedRepError):
    pass


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, tuple):
        return text
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _strs(text) -> tuple[str, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(text)
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


@dataclass(frozen=True)
class Param:
    key: str
    flag: str
    kind: Callable[[Any], Any]
    default: Any
    help: str = ""
    multi: bool = False


RIR_PARAMS = [
    Param("rir.max_interregnum_len", "--max-interregnum-len", int, 2, "longest interregnum considered"),
    Param("rir.max_phrase_len", "--max-phrase-len", int, 3, "longest duplicated phrase"),
    Param("rir.match_on", "--match-on", str, "normalized", "normalized | surface"),
]
FEATURE_PARAMS = [
    Param("features.rir", "--rir", _bool, True, "use RIR_* templates (on/off)"),
    Param("features.templates", "--templates", str, "", "comma-separated template names; empty = all"),
    Param("features.min_count", "--min-count", int, 1, "feature count threshold"),
]
TRAIN_PARAMS = [
    Param("train.epochs", "--epochs", int, 5, ""),
    Param("train.batch_size", "--batch-size", int, 8, ""),
    Param("train.learning_rate", "--learning-rate", float, 0.1, ""),
    Param("train.l2", "--l2", float, 1e-4, ""),
    Param("train.seed", "--seed", int, 0, "shuffling seed"),
    Param("train.shuffle", "--shuffle", _bool, True, ""),
]
NORMALIZE = Param("data.normalize", "--normalize", _bool, True, "strip punctuation tokens before use")

PARAMS: dict[str, list[Param]] = {
    "synth": [
        Param("synth.seed", "--seed", int, 0),
        Param("synth.n", "--n", int, 1000, "number of sentences"),
        Param("synth.min_len", "--min-len", int, 5, "shortest base sentence"),
        Param("synth.max_len", "--max-len", int, 12, "longest base sentence"),
        Param("synth.p_redup", "--p-redup", float, 0.3),
        Param("synth.p_rep", "--p-rep", float, 0.3),
        Param("synth.p_other", "--p-other", float, 0.1),
        Param("synth.p_interregnum", "--p-interregnum", float, 0.5),
        Param("synth.p_confusion", "--p-confusion", float, 0.1),
        Param("synth.language", "--language", str, "hi"),
        Param("synth.id_prefix", "--id-prefix", str, "syn"),
        Param("synth.general_lexicon", "--general-lexicon", str, "", "word-per-line file"),
        Param("synth.reduplicable_lexicon", "--reduplicable-lexicon", str, "", "word-per-line file"),
        Param("synth.interregnum_lexicon", "--interregnum-lexicon", str, "", "word-per-line file"),
        Param("synth.other_lexicon", "--other-lexicon", str, "", "word-per-line file"),
        Param("synth.out", "--out", str, None, "output CoNLL path"),
        Param("synth.trace", "--trace", str, "", "optional injection trace path"),
    ],
    "split": [
        Param("split.input", "--input", str, None, "labeled CoNLL corpus"),
        Param("split.out_dir", "--out-dir", str, None, "writes train/validation/test.conll"),
        Param("split.ratios", "--ratios", _floats, (0.8, 0.1, 0.1), "comma-separated"),
        Param("split.seed", "--seed", int, 0),
        Param("split.stratify", "--stratify", _bool, True),
        Param("split.report", "--report", str, "", "optional JSON report"),
    ],
    "train": [
        Param("model.kind", "--model", str, "crf", "crf | logreg"),
        Param("train.train", "--train", str, None, "training corpus"),
        Param("train.out", "--out", str, None, "model output path"),
        Param("train.report", "--report", str, "", "optional JSON training report"),
        NORMALIZE,
        *FEATURE_PARAMS,
        *RIR_PARAMS,
        *TRAIN_PARAMS,
    ],
    "predict": [
        Param("predict.model", "--model", str, None, "model file"),
        Param("predict.input", "--input", str, None, "CoNLL input (labels ignored)"),
        Param("predict.out", "--out", str, None, "CoNLL output with predicted labels"),
        NORMALIZE,
    ],
    "eval": [
        Param("eval.model", "--model", str, "", "model file to score on --test"),
        Param("eval.test", "--test", str, "", "gold test corpus"),
        Param("eval.gold", "--gold", str, "", "gold corpus (with --pred)"),
        Param("eval.pred", "--pred", str, "", "predicted corpus (with --gold)"),
        Param("eval.train", "--train", str, "", "retrain per run on this corpus"),
        Param("eval.runs", "--runs", int, 1, "number of seeded runs"),
        Param("eval.base_seed", "--base-seed", int, 0, "seed of the first run"),
        Param("eval.report", "--report", str, "", "JSON report path"),
        Param("model.kind", "--model-kind", str, "crf", "kind when retraining without --model"),
        NORMALIZE,
        *FEATURE_PARAMS,
        *RIR_PARAMS,
        *TRAIN_PARAMS,
    ],
    "kappa": [
        Param("kappa.table", "--table", str, "", "TSV/CSV of per-item category counts"),
        Param("kappa.annotations", "--annotations", _strs, (), "one CoNLL file per annotator", multi=True),
        Param("kappa.report", "--report", str, "", "JSON report path"),
    ],
    "verify-stats": [
        Param("verify.corpus", "--corpus", _strs, (), "CoNLL files, pooled", multi=True),
        Param("verify.fixture", "--fixture", str, "", "LANG:SPLIT (hi/te/mr) or labels:SPLIT"),
        Param("verify.expected", "--expected", str, "", "JSON file of expected counts"),
        Param("verify.report", "--report", str, "", "JSON report path"),
        Param("verify.strict", "--strict", _bool, False, "exit 2 when any check fails"),
    ],
    "inspect-spans": [
        Param("inspect.input", "--input", str, None, "CoNLL corpus"),
        Param("inspect.editing_lexicon", "--editing-lexicon", str, "", "word-per-line file"),
        NORMALIZE,
        *RIR_PARAMS,
    ],
    "ablate": [
        Param("model.kind", "--model", str, "crf", "crf | logreg"),
        Param("ablate.train", "--train", str, None, "training corpus"),
        Param("ablate.test", "--test", str, None, "test corpus"),
        Param("ablate.report", "--report", str, "", "JSON report path"),
        NORMALIZE,
        *FEATURE_PARAMS,
        *RIR_PARAMS,
        *TRAIN_PARAMS,
    ],
}

ALL_KEYS = {p.key for ps in PARAMS.values() for p in ps}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="redrep", description="Reduplication / repetition token tagging.")
    parser.add_argument("--config", help="key = value config file (default: $REDREP_CONFIG)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        for param in PARAMS[name]:
            kw = {
                "dest": param.key.replace(".", "__"),
                "default": None,
                "metavar": param.flag.lstrip("-").replace("-", "_").upper(),
                "help": f"{param.help} [{param.key}]".strip(),
            }
            if param.multi:
                kw["nargs"] = "+"
            p.add_argument(param.flag, **kw)
    return parser


def read_config_file(path) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            if key not in ALL_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = value.strip()
    return values


def resolve_config(command: str, args: argparse.Namespace) -> dict[str, Any]:
    path = args.config or os.environ.get("REDREP_CONFIG")
    file_values = read_config_file(path) if path else {}
    cfg: dict[str, Any] = {}
    for param in PARAMS[command]:
        value = param.default
        if param.key in file_values:
            value = file_values[param.key]
        flag_value = getattr(args, param.key.replace(".", "__"))
        if flag_value is not None:
            value = flag_value
        if value is None:
            raise UsageError(f"{command}: {param.flag} is required")
        if value is not param.default or param.multi:
            try:
                value = param.kind(value)
            except ValueError as exc:
                raise UsageError(f"{param.flag}: {exc}") from exc
        cfg[param.key] = value
    return cfg


# ---------------------------------------------------------------------------
# helpers


def _jsonable(cfg: dict) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(cfg.items())}


def _write_json(path: str, payload: dict) -> None:
    if not path:
        return
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def _load(path: str, cfg: dict) -> LabeledCorpus:
    corpus = read_conll(path)
    if cfg.get("data.normalize", False):
        corpus = normalize_corpus(corpus)
    return corpus


def _templates(cfg: dict) -> TemplateSet:
    use_rir = cfg["features.rir"]
    text = cfg["features.templates"]
    if not text:
        return TemplateSet.default(use_rir)
    return TemplateSet.parse(text, use_rir=use_rir)


def _rir(cfg: dict) -> RirConfig:
    return RirConfig(cfg["rir.max_interregnum_len"], cfg["rir.max_phrase_len"], cfg["rir.match_on"])


def _train_config(cfg: dict, seed: int | None = None) -> TrainConfig:
    return TrainConfig(
        epochs=cfg["train.epochs"],
        batch_size=cfg["train.batch_size"],
        learning_rate=cfg["train.learning_rate"],
        l2=cfg["train.l2"],
        seed=cfg["train.seed"] if seed is None else seed,
        shuffle=cfg["train.shuffle"],
    )


def _lexicon(path: str, default):
    if not path:
        return default
    words = [w.strip() for w in Path(path).read_text(encoding="utf-8").splitlines()]
    return tuple(w for w in words if w and not w.startswith("#"))


# ---------------------------------------------------------------------------
# commands


def cmd_synth(cfg, out):
    base = SynthConfig()
    config = SynthConfig(
        seed=cfg["synth.seed"],
        n_sentences=cfg["synth.n"],
        length_range=(cfg["synth.min_len"], cfg["synth.max_len"]),
        p_redup=cfg["synth.p_redup"],
        p_rep=cfg["synth.p_rep"],
        p_other=cfg["synth.p_other"],
        p_interregnum=cfg["synth.p_interregnum"],
        p_confusion=cfg["synth.p_confusion"],
        general=_lexicon(cfg["synth.general_lexicon"], base.general),
        reduplicable=_lexicon(cfg["synth.reduplicable_lexicon"], base.reduplicable),
        interregnum=_lexicon(cfg["synth.interregnum_lexicon"], base.interregnum),
        other=_lexicon(cfg["synth.other_lexicon"], base.other),
        language=cfg["synth.language"],
        id_prefix=cfg["synth.id_prefix"],
    )
    corpus, trace = generate_corpus(config)
    save_conll(corpus, cfg["synth.out"])
    if cfg["synth.trace"]:
        Path(cfg["synth.trace"]).write_text(trace.write(), encoding="utf-8")
    st = corpus.stats
    print(f"wrote {st.sentences} sentences, {st.words} tokens to {cfg['synth.out']}", file=out)
    for lab, n in st.labels.items():
        print(f"  {lab.value:<14}{n:8d}", file=out)
    return 0


def cmd_split(cfg, out):
    corpus = read_conll(cfg["split.input"])
    spec = SplitSpec(tuple(cfg["split.ratios"]), cfg["split.seed"], cfg["split.stratify"])
    parts = stratified_split(corpus, spec)
    out_dir = Path(cfg["split.out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {}
    for name, part in zip(("train", "validation", "test"), parts):
        save_conll(part, out_dir / f"{name}.conll")
        st = part.stats
        summary[name] = {"sentences": st.sentences, "words": st.words, "labels": {k.value: v for k, v in st.labels.items()}}
        print(f"{name:<12}{st.sentences:8d} sentences{st.words:10d} words", file=out)
    _write_json(cfg["split.report"], {"config": _jsonable(cfg), "splits": summary})
    return 0


def cmd_train(cfg, out):
    corpus = _load(cfg["train.train"], cfg)
    trace = TrainTrace()
    tagger = train_tagger(
        corpus, cfg["model.kind"], _templates(cfg), _rir(cfg), _train_config(cfg), cfg["features.min_count"], trace
    )
    save_model(tagger, cfg["train.out"])
    for k, ll in enumerate(trace.epoch_loglik, 1):
        print(f"epoch {k}\tmean log-likelihood {ll:.6f}", file=out)
    print(f"saved {tagger.kind} model with {len(tagger.index)} features to {cfg['train.out']}", file=out)
    _write_json(cfg["train.report"], {
        "config": _jsonable(cfg),
        "features": len(tagger.index),
        "epoch_loglik": trace.epoch_loglik,
        "backend": kernels.BACKEND,
    })
    return 0


def cmd_predict(cfg, out):
    tagger = load_model(cfg["predict.model"])
    corpus = _load(cfg["predict.input"], cfg)
    save_conll(predict_corpus(tagger, corpus), cfg["predict.out"])
    print(f"tagged {len(corpus)} sentences -> {cfg['predict.out']}", file=out)
    return 0


def cmd_eval(cfg, out):
    runs = cfg["eval.runs"]
    if runs < 1:
        raise UsageError("--runs must be >= 1")
    if cfg["eval.gold"] or cfg["eval.pred"]:
        if not (cfg["eval.gold"] and cfg["eval.pred"]):
            raise UsageError("--gold and --pred go together")
        gold = _load(cfg["eval.gold"], cfg)
        pred = _load(cfg["eval.pred"], cfg)
        if [s.id for s in gold] != [s.id for s in pred]:
            raise DataError("gold and predicted corpora hold different sentences")
        report = evaluate([s.labels for s in gold], [s.labels for s in pred])
        summary = multi_run(lambda seed: report, runs, cfg["eval.base_seed"])
    else:
        if not cfg["eval.test"]:
            raise UsageError("eval needs --test (with --model or --train) or --gold/--pred")
        test = _load(cfg["eval.test"], cfg)
        if cfg["eval.train"]:
            train = _load(cfg["eval.train"], cfg)
            if cfg["eval.model"]:
                ref = load_model(cfg["eval.model"])
                kind, templates, rir = ref.kind, ref.templates, ref.rir_config
            else:
                kind, templates, rir = cfg["model.kind"], _templates(cfg), _rir(cfg)

            def experiment(seed):
                tagger = train_tagger(train, kind, templates, rir, _train_config(cfg, seed), cfg["features.min_count"])
                return evaluate_tagger(tagger, test)
        elif cfg["eval.model"]:
            tagger = load_model(cfg["eval.model"])

            def experiment(seed):
                return evaluate_tagger(tagger, test)
        else:
            raise UsageError("eval --test needs --model or --train")
        summary = multi_run(experiment, runs, cfg["eval.base_seed"])
    payload = summary.to_json()
    payload["config"] = _jsonable(cfg)
    payload["retrained"] = bool(cfg["eval.train"]) and not (cfg["eval.gold"] or cfg["eval.pred"])
    _write_json(cfg["eval.report"], payload)
    print(format_report(summary.reports[0]) if runs == 1 else _format_summary(summary), file=out)
    return 0


def _format_summary(summary) -> str:
    lines = [f"{'metric':<12}{'mean':>10}{'std':>10}"]
    for key in ("redup_f1", "rep_f1", "other_f1", "macro_p", "macro_r", "macro_f1"):
        lines.append(f"{key:<12}{summary.mean[key]:10.4f}{summary.std[key]:10.4f}")
    lines.append(f"runs={len(summary.reports)} seeds={list(summary.seeds)}")
    return "\n".join(lines)


def cmd_kappa(cfg, out):
    if cfg["kappa.table"]:
        rows = []
        for line in Path(cfg["kappa.table"]).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([int(x) for x in line.replace(",", "\t").split()])
        table = rows
        source = "table"
    elif cfg["kappa.annotations"]:
        corpora = [read_conll(p) for p in cfg["kappa.annotations"]]
        if len(corpora) < 2:
            raise UsageError("--annotations needs at least two files")
        annotations = []
        for c in corpora:
            if not c.is_labeled:
                raise DataError("annotation files must be fully labeled")
            annotations.append([lab for s in c for lab in s.labels])
        table = agreement_table(annotations)
        source = "annotations"
    else:
        raise UsageError("kappa needs --table or --annotations")
    try:
        kappa = fleiss_kappa(table)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    print(f"fleiss_kappa\t{kappa:.6f}", file=out)
    _write_json(cfg["kappa.report"], {"config": _jsonable(cfg), "fleiss_kappa": kappa, "source": source})
    return 0


def _fixture(spec: str) -> dict:
    lang, _, split = spec.partition(":")
    split = split or "total"
    if lang == "labels":
        if split not in TABLE3:
            raise UsageError(f"unknown split {split!r}")
        return indicredrep_fixture(None, split)
    if lang not in TABLE2 or (split != "total" and split not in TABLE2[lang]):
        raise UsageError(f"unknown fixture {spec!r}; use hi|te|mr|labels[:train|validation|test|total]")
    return indicredrep_fixture(lang, split)


def cmd_verify_stats(cfg, out):
    if not cfg["verify.corpus"]:
        raise UsageError("verify-stats needs --corpus")
    sentences = []
    for path in cfg["verify.corpus"]:
        sentences.extend(read_conll(path).sentences)
    corpus = LabeledCorpus(tuple(sentences))
    if cfg["verify.expected"]:
        expected = json.loads(Path(cfg["verify.expected"]).read_text(encoding="utf-8"))
    elif cfg["verify.fixture"]:
        expected = _fixture(cfg["verify.fixture"])
    else:
        raise UsageError("verify-stats needs --fixture or --expected")
    report = verify_statistics(corpus, expected)
    print(report.format(), file=out)
    _write_json(cfg["verify.report"], {"config": _jsonable(cfg), **report.to_dict()})
    if cfg["verify.strict"] and not report.passed:
        raise DataError("corpus statistics do not match the fixture")
    return 0


def cmd_inspect_spans(cfg, out):
    corpus = _load(cfg["inspect.input"], cfg)
    lexicon = frozenset(_lexicon(cfg["inspect.editing_lexicon"], DEFAULT_EDITING_LEXICON))
    rir = _rir(cfg)
    for s in corpus:
        for span in find_spans(s, rir):
            print(format_span_line(s.id, span, heuristic_classify(span, s, lexicon)), file=out)
    return 0


def cmd_ablate(cfg, out):
    train = _load(cfg["ablate.train"], cfg)
    test = _load(cfg["ablate.test"], cfg)
    report = run_ablation(train, test, cfg["model.kind"], _templates(cfg), _rir(cfg), _train_config(cfg), cfg["features.min_count"])
    print(f"macro_f1 without RiR\t{report.without_rir.macro_f1:.4f}", file=out)
    print(f"macro_f1 with RiR\t{report.with_rir.macro_f1:.4f}", file=out)
    print(f"delta\t{report.delta:+.4f}", file=out)
    _write_json(cfg["ablate.report"], {"config": _jsonable(cfg), **report.to_json()})
    return 0


HANDLERS = {
    "synth": cmd_synth,
    "split": cmd_split,
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "kappa": cmd_kappa,
    "verify-stats": cmd_verify_stats,
    "inspect-spans": cmd_inspect_spans,
    "ablate": cmd_ablate,
}


def _is_data_error(exc: BaseException) -> bool:
    if isinstance(exc, RunFailed):
        return _is_data_error(exc.__cause__)
    return isinstance(exc, (DataError, OSError, UnicodeDecodeError, json.JSONDecodeError))


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError(f"choose a command: {' | '.join(COMMANDS)}")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=err)
        cfg = resolve_config(args.command, args)
        return HANDLERS[args.command](cfg, out)
    except (UsageError, InvalidConfig) as exc:
        print(f"redrep: usage error: {exc}", file=err)
        return 1
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        msg = " ".join(str(exc).split())
        if _is_data_error(exc):
            print(f"redrep: data error: {msg}", file=err)
            return 2
        print(f"redrep: internal error: {type(exc).__name__}: {msg}", file=err)
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
