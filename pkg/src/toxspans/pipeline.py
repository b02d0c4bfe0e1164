"""Iterative gate / extract / remove / recheck span detection.

The working text shrinks every round; an :class:`~toxspans.spans.OffsetMap`
composed across rounds keeps every reported offset in the coordinates of
the original post.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Protocol

from . import spans as sp
from .corpus import Corpus
from .spans import OffsetMap, SpanSet

log = logging.getLogger(__name__)


class Gate(Protocol):
    def score(self, text: str) -> float: ...


class Extractor(Protocol):
    def extract_one(self, text: str) -> SpanSet: ...


@dataclass(frozen=True)
class PipelineConfig:
    gate_threshold: float = 0.5
    max_iterations: int = 10
    absorb_whitespace: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class Detection:
    spans: SpanSet
    iterations: int  # rounds that removed text
    stopped_by: str  # "gate", "empty", "max_iterations"


def run_detection(gate: Gate, extractor: Extractor, text: str, cfg: PipelineConfig = PipelineConfig()) -> Detection:
    current = text
    offset_map = OffsetMap.identity(len(text))
    found: set[int] = set()
    for iteration in range(cfg.max_iterations):
        if gate.score(current) < cfg.gate_threshold:
            return Detection(sp.as_spanset(found), iteration, "gate")
        span = sp.as_spanset(extractor.extract_one(current))
        if not span:
            return Detection(sp.as_spanset(found), iteration, "empty")
        found.update(sp.remap_to_original(offset_map, span))
        ranges = sp.offsets_to_ranges(span)
        if cfg.absorb_whitespace:
            ranges = sp.widen_with_space(current, ranges)
        current, step = sp.delete_ranges(current, ranges)
        offset_map = offset_map.then(step)
    log.warning("span detection hit max_iterations=%d", cfg.max_iterations)
    return Detection(sp.as_spanset(found), cfg.max_iterations, "max_iterations")


def detect_spans(gate: Gate, extractor: Extractor, text: str, cfg: PipelineConfig = PipelineConfig()) -> SpanSet:
    """Offsets (original coordinates) found by repeatedly extracting while the gate fires."""
    return run_detection(gate, extractor, text, cfg).spans


def run_corpus(
    gate: Gate,
    extractor: Extractor,
    corpus: Corpus,
    cfg: PipelineConfig = PipelineConfig(),
    jobs: int = 1,
) -> list[tuple[int, SpanSet]]:
    texts = [post.text for post in corpus]
    if jobs > 1 and len(texts) > 1:
        work = partial(detect_spans, gate, extractor, cfg=cfg)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            found = list(pool.map(work, texts, chunksize=max(1, len(texts) // (4 * jobs))))
    else:
        found = [detect_spans(gate, extractor, text, cfg) for text in texts]
    return [(post.id, spans) for post, spans in zip(corpus, found)]
