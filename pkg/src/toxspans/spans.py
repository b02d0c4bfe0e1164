"""Character-offset span arithmetic.

Two span representations are used throughout the package:

* a *span set*: a sorted tuple of unique character offsets, the format the
  task files use (``[7, 8, 9, 10, 11, 12]``);
* a list of :class:`ContiguousSpan` ranges, half-open ``[start, end)``.

Offsets index Python ``str`` positions, i.e. Unicode code points.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import groupby
from typing import Iterable, NamedTuple, Sequence

SpanSet = tuple[int, ...]

_TOKEN_RE = re.compile(r"\S+")


class ContiguousSpan(NamedTuple):
    start: int
    end: int

    def __len__(self) -> int:  # type: ignore[override]
        return self.end - self.start


class Token(NamedTuple):
    surface: str
    start: int
    end: int


class PhraseNotFound(ValueError):
    """A predicted phrase has no unconsumed occurrence in the text."""


def as_spanset(offsets: Iterable[int]) -> SpanSet:
    return tuple(sorted(set(offsets)))


def offsets_to_ranges(offsets: Iterable[int]) -> list[ContiguousSpan]:
    """Collapse maximal runs of consecutive offsets into half-open ranges.

    >>> offsets_to_ranges([0, 1, 2, 5])
    [ContiguousSpan(start=0, end=3), ContiguousSpan(start=5, end=6)]
    """
    ranges = []
    for _, run in groupby(enumerate(as_spanset(offsets)), lambda p: p[1] - p[0]):
        run = [offset for _, offset in run]
        ranges.append(ContiguousSpan(run[0], run[-1] + 1))
    return ranges


def ranges_to_offsets(ranges: Iterable[tuple[int, int]]) -> SpanSet:
    covered: set[int] = set()
    for start, end in ranges:
        covered.update(range(start, end))
    return as_spanset(covered)


def span_surface(text: str, span: tuple[int, int]) -> str:
    start, end = span
    if not 0 <= start <= end <= len(text):
        raise IndexError(f"range ({start}, {end}) out of bounds for text of length {len(text)}")
    return text[start:end]


def tokenize(text: str) -> list[Token]:
    """Whitespace tokenizer: maximal runs of non-whitespace characters."""
    return [Token(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def label_tokens(text: str, gold: Iterable[int]) -> list[tuple[Token, bool]]:
    """Label each token toxic iff any of its characters is a gold offset."""
    gold = set(gold)
    return [(tok, any(i in gold for i in range(tok.start, tok.end))) for tok in tokenize(text)]


@dataclass(frozen=True)
class OffsetMap:
    """Maps every character of a derived text to its index in the original."""

    forward: tuple[int, ...]
    original_length: int

    @classmethod
    def identity(cls, length: int) -> "OffsetMap":
        return cls(tuple(range(length)), length)

    def __len__(self) -> int:
        return len(self.forward)

    def then(self, inner: "OffsetMap") -> "OffsetMap":
        """Compose with a map produced by a further edit of the derived text.

        ``inner`` maps positions of a newer text into this map's derived
        text; the result maps the newer text straight to the original.
        """
        if inner.original_length != len(self.forward):
            raise ValueError("offset maps do not chain")
        return OffsetMap(tuple(self.forward[i] for i in inner.forward), self.original_length)


def _check_disjoint(ranges: Sequence[tuple[int, int]], length: int) -> list[ContiguousSpan]:
    ordered = sorted(ContiguousSpan(*r) for r in ranges)
    prev_end = 0
    for start, end in ordered:
        if not 0 <= start < end <= length:
            raise ValueError(f"range ({start}, {end}) out of bounds for text of length {length}")
        if start < prev_end:
            raise ValueError(f"range ({start}, {end}) overlaps a preceding range")
        prev_end = end
    return ordered


def delete_ranges(text: str, ranges: Sequence[tuple[int, int]]) -> tuple[str, OffsetMap]:
    """Excise disjoint ranges from ``text`` and return the surviving text with its map."""
    ordered = _check_disjoint(ranges, len(text))
    keep = []
    cursor = 0
    for start, end in ordered:
        keep.extend(range(cursor, start))
        cursor = end
    keep.extend(range(cursor, len(text)))
    return "".join(text[i] for i in keep), OffsetMap(tuple(keep), len(text))


def remap_to_original(offset_map: OffsetMap, offsets: Iterable[int]) -> SpanSet:
    forward = offset_map.forward
    out = []
    for i in as_spanset(offsets):
        if not 0 <= i < len(forward):
            raise IndexError(f"offset {i} beyond derived text of length {len(forward)}")
        out.append(forward[i])
    return as_spanset(out)


def widen_with_space(text: str, ranges: Sequence[tuple[int, int]]) -> list[ContiguousSpan]:
    """Extend each range by one adjacent whitespace character.

    The preceding character is taken when it is whitespace, otherwise the
    following one. A character already claimed by another range is never
    taken twice, so the output stays disjoint.
    """
    ordered = sorted(ContiguousSpan(*r) for r in ranges)
    claimed = set()
    for start, end in ordered:
        claimed.update(range(start, end))
    widened = []
    for start, end in ordered:
        if start > 0 and text[start - 1].isspace() and start - 1 not in claimed:
            start -= 1
            claimed.add(start)
        elif end < len(text) and text[end].isspace() and end not in claimed:
            claimed.add(end)
            end += 1
        widened.append(ContiguousSpan(start, end))
    return widened


def split_multispan(text: str, gold: Iterable[int]) -> list[tuple[str, SpanSet]]:
    """Turn a post with k > 1 contiguous gold ranges into k single-range posts.

    Derived post i keeps range i; every other range is deleted together
    with one adjacent space.
    """
    gold = as_spanset(gold)
    ranges = offsets_to_ranges(gold)
    if len(ranges) <= 1:
        return [(text, gold)]
    derived = []
    for i, kept in enumerate(ranges):
        others = widen_with_space(text, ranges[:i] + ranges[i + 1:])
        new_text, offset_map = delete_ranges(text, others)
        position = {orig: new for new, orig in enumerate(offset_map.forward)}
        derived.append((new_text, tuple(position[j] for j in range(kept.start, kept.end))))
    return derived


def match_phrase_offsets(text: str, phrases: Iterable[str]) -> SpanSet:
    """Locate each phrase at its leftmost occurrence not overlapping an earlier match."""
    consumed: set[int] = set()
    for phrase in phrases:
        if not phrase:
            continue
        pos = text.find(phrase)
        while pos != -1 and any(i in consumed for i in range(pos, pos + len(phrase))):
            pos = text.find(phrase, pos + 1)
        if pos == -1:
            raise PhraseNotFound(f"no unconsumed occurrence of {phrase!r}")
        consumed.update(range(pos, pos + len(phrase)))
    return as_spanset(consumed)
