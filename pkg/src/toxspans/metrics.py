"""Per-post span F1, corpus aggregation and the toxic-fraction statistic."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Corpus, Post


def per_post_f1(pred: Iterable[int], gold: Iterable[int]) -> float:
    """Character-offset F1 of one post.

    Both empty scores 1.0; exactly one empty scores 0.0.
    """
    pred, gold = set(pred), set(gold)
    if not gold and not pred:
        return 1.0
    if not gold or not pred:
        return 0.0
    return 2 * len(pred & gold) / (len(pred) + len(gold))


@dataclass
class EvalReport:
    per_post: list[tuple[int, float]]
    mean_f1: float

    def to_dict(self) -> dict:
        return {
            "mean_f1": self.mean_f1,
            "n_posts": len(self.per_post),
            "per_post": [{"id": pid, "f1": f1} for pid, f1 in self.per_post],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def summary(self) -> str:
        scores = [f for _, f in self.per_post]
        perfect = sum(1 for f in scores if f == 1.0)
        zero = sum(1 for f in scores if f == 0.0)
        rows = [
            ("posts", str(len(scores))),
            ("mean F1", f"{self.mean_f1:.4f}"),
            ("F1 = 1", str(perfect)),
            ("F1 = 0", str(zero)),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def evaluate(preds: Sequence[tuple[int, Iterable[int]]], corpus: Corpus) -> EvalReport:
    by_id = {}
    for pid, offsets in preds:
        if pid in by_id:
            raise ValueError(f"duplicate prediction id {pid}")
        by_id[pid] = offsets
    corpus_ids = set(corpus.ids)
    missing = sorted(corpus_ids - by_id.keys())
    extra = sorted(by_id.keys() - corpus_ids)
    if missing or extra:
        raise ValueError(f"prediction ids do not match corpus: missing {missing[:10]}, extra {extra[:10]}")
    per_post = [(post.id, per_post_f1(by_id[post.id], post.gold)) for post in corpus]
    mean = sum(f for _, f in per_post) / len(per_post) if per_post else 0.0
    return EvalReport(per_post, mean)


def toxic_fraction(post: Post) -> float:
    """Jaccard index of the gold offsets against all offsets of the text.

    Gold is a subset of the text's offsets, so this is the fraction of
    characters annotated toxic.
    """
    if not post.text:
        raise ValueError(f"post {post.id} has empty text")
    return len(post.gold) / len(post.text)
