"""Reading, writing, splitting and summarizing span-annotated corpora.

The task files are headered CSV with two columns::

    spans,text
    "[7, 8, 9, 10, 11, 12]",Pretty damned eloquent ... :)

Posts carry no id column, so a post's id is its 0-based row index.
"""
from __future__ import annotations

import csv
import json
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Sequence

from . import spans as sp
from .spans import SpanSet

NER_LABEL = "TOXIC"
JACCARD_BINS = 20

_PRED_LINE_RE = re.compile(r"^(-?\d+)\t(\[.*\])$")


class CorpusFormatError(ValueError):
    """Raised for malformed corpus or prediction files."""

    def __init__(self, message: str, row: int | None = None, source: str | None = None):
        self.row = row
        self.source = source
        where = ", ".join(p for p in (source, f"row {row}" if row is not None else None) if p)
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class Post:
    id: int
    text: str
    gold: SpanSet = ()

    def __post_init__(self):
        object.__setattr__(self, "gold", sp.as_spanset(self.gold))
        if self.gold and (self.gold[0] < 0 or self.gold[-1] >= len(self.text)):
            bad = self.gold[0] if self.gold[0] < 0 else self.gold[-1]
            raise ValueError(f"post {self.id}: offset {bad} out of bounds for text of length {len(self.text)}")

    @property
    def ranges(self) -> list[sp.ContiguousSpan]:
        return sp.offsets_to_ranges(self.gold)

    def surfaces(self) -> list[str]:
        return [self.text[start:end] for start, end in self.ranges]


@dataclass(frozen=True)
class Corpus:
    """An ordered, immutable collection of posts with unique ids.

    Corpora read from disk number their posts by row. Sub-corpora produced
    by :func:`kfold_split` keep the ids of the corpus they came from.
    """

    posts: tuple[Post, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "posts", tuple(self.posts))
        seen = set()
        for post in self.posts:
            if post.id in seen:
                raise ValueError(f"duplicate post id {post.id}")
            seen.add(post.id)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, Iterable[int]]]) -> "Corpus":
        return cls(tuple(Post(i, text, gold) for i, (text, gold) in enumerate(pairs)))

    def __len__(self) -> int:
        return len(self.posts)

    def __iter__(self) -> Iterator[Post]:
        return iter(self.posts)

    def __getitem__(self, i: int) -> Post:
        return self.posts[i]

    @property
    def ids(self) -> list[int]:
        return [p.id for p in self.posts]


def parse_offsets(field_value: str) -> list[int]:
    """Parse a bracketed integer list such as ``"[1, 2, 3]"`` or ``"[]"``."""
    s = field_value.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError(f"spans field is not a bracketed list: {field_value!r}")
    body = s[1:-1].strip()
    if not body:
        return []
    out = []
    for tok in body.split(","):
        tok = tok.strip()
        try:
            out.append(int(tok))
        except ValueError:
            raise ValueError(f"non-integer offset token {tok!r}") from None
    return out


def format_offsets(offsets: Iterable[int]) -> str:
    return "[" + ", ".join(str(i) for i in offsets) + "]"


def parse_corpus(stream: IO[str], source: str | None = None) -> Corpus:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise CorpusFormatError("empty file, expected header 'spans,text'", source=source) from None
    except csv.Error as exc:
        raise CorpusFormatError(f"malformed header: {exc}", source=source) from None
    try:
        spans_col, text_col = header.index("spans"), header.index("text")
    except ValueError:
        raise CorpusFormatError(f"header must contain 'spans' and 'text', got {header}", source=source) from None

    posts = []
    row = 0
    while True:
        try:
            record = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise CorpusFormatError(f"malformed table row: {exc}", row=row, source=source) from None
        if not record:
            continue
        if len(record) != len(header):
            raise CorpusFormatError(
                f"expected {len(header)} fields, found {len(record)}", row=row, source=source
            )
        text = record[text_col]
        try:
            offsets = parse_offsets(record[spans_col])
        except ValueError as exc:
            raise CorpusFormatError(f"field 'spans': {exc}", row=row, source=source) from None
        for off in offsets:
            if not 0 <= off < len(text):
                raise CorpusFormatError(
                    f"field 'spans': offset {off} out of bounds for text of length {len(text)}",
                    row=row,
                    source=source,
                )
        posts.append(Post(row, text, offsets))
        row += 1
    return Corpus(tuple(posts))


def read_corpus(path) -> Corpus:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_corpus(f, source=str(path))


def write_corpus(corpus: Iterable[Post], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["spans", "text"])
    for post in corpus:
        writer.writerow([format_offsets(post.gold), post.text])


def kfold_split(corpus: Corpus, k: int, seed: int = 0) -> list[tuple[Corpus, Corpus]]:
    """Seeded k-fold partition; pair i holds fold i out."""
    n = len(corpus)
    if k < 2 or k > n:
        raise ValueError(f"k must be in [2, {n}], got {k}")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    base, extra = divmod(n, k)
    folds = []
    cursor = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(sorted(order[cursor:cursor + size]))
        cursor += size
    pairs = []
    for i, fold in enumerate(folds):
        held = set(fold)
        train = Corpus(tuple(p for j, p in enumerate(corpus.posts) if j not in held))
        heldout = Corpus(tuple(corpus.posts[j] for j in fold))
        pairs.append((train, heldout))
    return pairs


def split_post(post: Post) -> list[Post]:
    """Multi-span splitting at the post level; derived posts share the source id."""
    derived = sp.split_multispan(post.text, post.gold)
    if len(derived) == 1:
        return [post]
    return [Post(post.id, text, gold) for text, gold in derived]


def split_corpus(corpus: Corpus) -> Corpus:
    """Apply :func:`split_post` to every post and renumber the result by row."""
    derived = [p for post in corpus for p in split_post(post)]
    return Corpus.from_pairs((p.text, p.gold) for p in derived)


@dataclass
class StatsReport:
    record_count: int
    span_count_histogram: dict[int, int]
    zero_span_fraction: float
    single_span_fraction: float
    jaccard_histogram: list[int] = field(default_factory=lambda: [0] * JACCARD_BINS)

    @property
    def jaccard_bin_edges(self) -> list[float]:
        return [round(i / JACCARD_BINS, 10) for i in range(JACCARD_BINS + 1)]

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "span_count_histogram": {str(k): v for k, v in sorted(self.span_count_histogram.items())},
            "zero_span_fraction": self.zero_span_fraction,
            "single_span_fraction": self.single_span_fraction,
            "jaccard_bin_edges": self.jaccard_bin_edges,
            "jaccard_histogram": list(self.jaccard_histogram),
        }


def jaccard_bin(value: float, bins: int = JACCARD_BINS) -> int:
    """Bin index for a value in [0, 1]; 1.0 falls in the top bin."""
    return min(int(value * bins), bins - 1)


def corpus_stats(corpus: Corpus) -> StatsReport:
    from .metrics import toxic_fraction

    n = len(corpus)
    span_counts = Counter(len(post.ranges) for post in corpus)
    jaccard = [0] * JACCARD_BINS
    for post in corpus:
        # an empty text has no characters to be toxic
        value = toxic_fraction(post) if post.text else 0.0
        jaccard[jaccard_bin(value)] += 1
    return StatsReport(
        record_count=n,
        span_count_histogram=dict(sorted(span_counts.items())),
        zero_span_fraction=span_counts.get(0, 0) / n if n else 0.0,
        single_span_fraction=span_counts.get(1, 0) / n if n else 0.0,
        jaccard_histogram=jaccard,
    )


@dataclass(frozen=True)
class NerRecord:
    text: str
    entities: tuple[tuple[int, int, str], ...]

    def to_json(self) -> str:
        return json.dumps({"text": self.text, "entities": [list(e) for e in self.entities]}, ensure_ascii=False)


def export_ner(corpus: Iterable[Post]) -> list[NerRecord]:
    return [
        NerRecord(post.text, tuple((r.start, r.end, NER_LABEL) for r in post.ranges))
        for post in corpus
    ]


def write_ner(records: Iterable[NerRecord], stream: IO[str]) -> None:
    for rec in records:
        stream.write(rec.to_json() + "\n")


def read_ner(stream: IO[str]) -> list[NerRecord]:
    records = []
    for line in stream:
        if line.strip():
            obj = json.loads(line)
            records.append(NerRecord(obj["text"], tuple(tuple(e) for e in obj["entities"])))
    return records


def write_predictions(preds: Sequence[tuple[int, Iterable[int]]], stream: IO[str]) -> None:
    seen = set()
    lines = []
    for pid, offsets in preds:
        if pid in seen:
            raise ValueError(f"duplicate prediction id {pid}")
        seen.add(pid)
        lines.append(f"{pid}\t{format_offsets(sp.as_spanset(offsets))}\n")
    stream.writelines(lines)


def read_predictions(stream: IO[str], source: str | None = None) -> list[tuple[int, SpanSet]]:
    preds = []
    seen = set()
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\r\n")
        if not line:
            continue
        m = _PRED_LINE_RE.match(line)
        if not m:
            raise CorpusFormatError(f"expected '<id>\\t[offsets]', got {line!r}", row=lineno, source=source)
        pid = int(m.group(1))
        if pid in seen:
            raise CorpusFormatError(f"duplicate prediction id {pid}", row=lineno, source=source)
        seen.add(pid)
        try:
            offsets = parse_offsets(m.group(2))
        except ValueError as exc:
            raise CorpusFormatError(str(exc), row=lineno, source=source) from None
        preds.append((pid, sp.as_spanset(offsets)))
    return preds
