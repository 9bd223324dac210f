"""Token-level reduplication vs. repetition tagging."""

from .corpus import LABELS, Label, LabeledCorpus, Sentence, Token
from .rir import RiRSpan, RirConfig, find_spans

__version__ = "0.1.0"

__all__ = ["LABELS", "Label", "LabeledCorpus", "Sentence", "Token", "RiRSpan", "RirConfig", "find_spans"]
