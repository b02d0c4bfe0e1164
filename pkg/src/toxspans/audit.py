"""Annotation-quality audits over a gold corpus and, optionally, predictions.

Automatable checks:

* lexemes labeled toxic in some occurrences and not in others;
* gold ranges with a suspicious shape (punctuation inside, or cutting a token);
* per-post prediction/gold disagreements at the range level.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from . import spans as sp
from .corpus import Corpus
from .models import normalize_token
from .spans import ContiguousSpan

NON_WORD = "non-word characters"
PARTIAL_TOKEN = "partial token"
MAX_EXAMPLES = 3


@dataclass(frozen=True)
class LexemeInconsistency:
    lexeme: str
    toxic_occurrences: int
    total_occurrences: int
    toxic_examples: tuple[int, ...]
    clean_examples: tuple[int, ...]


@dataclass(frozen=True)
class ShapeFlag:
    post_id: int
    span: ContiguousSpan
    surface: str
    reason: str


@dataclass(frozen=True)
class SpanDiff:
    post_id: int
    missed: tuple[ContiguousSpan, ...]
    spurious: tuple[ContiguousSpan, ...]


def consistency_report(corpus: Corpus, min_total: int = 2) -> list[LexemeInconsistency]:
    if min_total < 2:
        raise ValueError("min_total must be >= 2")
    total: dict[str, int] = defaultdict(int)
    toxic: dict[str, int] = defaultdict(int)
    examples: dict[tuple[str, bool], list[int]] = defaultdict(list)
    for post in corpus:
        for tok, is_toxic in sp.label_tokens(post.text, post.gold):
            lexeme = normalize_token(tok.surface)[0]
            if not lexeme:
                continue
            total[lexeme] += 1
            toxic[lexeme] += is_toxic
            ids = examples[lexeme, is_toxic]
            if len(ids) < MAX_EXAMPLES and post.id not in ids:
                ids.append(post.id)
    report = [
        LexemeInconsistency(
            lexeme,
            toxic[lexeme],
            n,
            tuple(examples[lexeme, True]),
            tuple(examples[lexeme, False]),
        )
        for lexeme, n in total.items()
        if n >= min_total and 0 < toxic[lexeme] < n
    ]
    report.sort(key=lambda r: (-r.total_occurrences, r.lexeme))
    return report


def _has_non_word(surface: str) -> bool:
    if surface != surface.strip():
        return True
    return any(not (ch.isalnum() or ch in "'-" or ch == " ") for ch in surface)


def _cuts_token(text: str, start: int, end: int) -> bool:
    starts_inside = start > 0 and not text[start - 1].isspace() and not text[start].isspace()
    ends_inside = end < len(text) and not text[end - 1].isspace() and not text[end].isspace()
    return starts_inside or ends_inside


def shape_flags(corpus: Corpus) -> list[ShapeFlag]:
    flags = []
    for post in corpus:
        for r in post.ranges:
            surface = post.text[r.start:r.end]
            if _has_non_word(surface):
                flags.append(ShapeFlag(post.id, r, surface, NON_WORD))
            if _cuts_token(post.text, r.start, r.end):
                flags.append(ShapeFlag(post.id, r, surface, PARTIAL_TOKEN))
    return flags


def diff_report(preds: Sequence[tuple[int, Iterable[int]]], corpus: Corpus) -> list[SpanDiff]:
    by_id = {pid: set(offsets) for pid, offsets in preds}
    missing = [pid for pid in corpus.ids if pid not in by_id]
    if missing:
        raise ValueError(f"no prediction for post ids {missing[:10]}")
    report = []
    for post in corpus:
        pred, gold = by_id[post.id], set(post.gold)
        missed = tuple(r for r in post.ranges if not _overlaps(r, pred))
        spurious = tuple(r for r in sp.offsets_to_ranges(pred) if not _overlaps(r, gold))
        if missed or spurious:
            report.append(SpanDiff(post.id, missed, spurious))
    return report


def _overlaps(r: tuple[int, int], offsets: set[int]) -> bool:
    return any(i in offsets for i in range(r[0], r[1]))


def report_to_json(consistency, flags, diffs=None) -> str:
    doc = {
        "inconsistent_lexemes": [asdict(r) for r in consistency],
        "shape_flags": [
            {"post_id": f.post_id, "start": f.span.start, "end": f.span.end, "surface": f.surface, "reason": f.reason}
            for f in flags
        ],
    }
    if diffs is not None:
        doc["diffs"] = [
            {"post_id": d.post_id, "missed": [list(r) for r in d.missed], "spurious": [list(r) for r in d.spurious]}
            for d in diffs
        ]
    return json.dumps(doc, ensure_ascii=False)


def report_to_text(consistency, flags, diffs=None) -> str:
    lines = [f"inconsistent lexemes: {len(consistency)}"]
    lines += [f"  {r.lexeme:<20} {r.toxic_occurrences:>5}/{r.total_occurrences:<5}" for r in consistency]
    lines.append(f"shape flags: {len(flags)}")
    lines += [f"  post {f.post_id:<6} [{f.span.start}, {f.span.end}) {f.surface!r}: {f.reason}" for f in flags]
    if diffs is not None:
        lines.append(f"posts with diffs: {len(diffs)}")
        for d in diffs:
            lines.append(f"  post {d.post_id:<6} missed={[tuple(r) for r in d.missed]} spurious={[tuple(r) for r in d.spurious]}")
    return "\n".join(lines)
