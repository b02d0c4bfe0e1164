"""Toxic span detection: corpus I/O, span algebra, iterative detection, scoring and audits."""
from .corpus import Corpus, CorpusFormatError, Post, corpus_stats, export_ner, kfold_split, parse_corpus, read_corpus
from .metrics import EvalReport, evaluate, per_post_f1, toxic_fraction
from .models import GateModel, LexiconModel, TrainConfig, train_gate, train_lexicon
from .pipeline import PipelineConfig, detect_spans, run_corpus
from .spans import ContiguousSpan, OffsetMap, Token, offsets_to_ranges, ranges_to_offsets, tokenize

__version__ = "0.1.0"

__all__ = [
    "ContiguousSpan", "Corpus", "CorpusFormatError", "EvalReport", "GateModel", "LexiconModel",
    "OffsetMap", "PipelineConfig", "Post", "Token", "TrainConfig", "corpus_stats", "detect_spans",
    "evaluate", "export_ner", "kfold_split", "offsets_to_ranges", "parse_corpus", "per_post_f1",
    "ranges_to_offsets", "read_corpus", "run_corpus", "tokenize", "toxic_fraction", "train_gate",
    "train_lexicon",
]
