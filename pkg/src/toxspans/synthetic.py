"""Synthetic corpora with a fixed, consistently annotated toxic lexicon.

Useful for end-to-end checks where the right answer is known exactly: every
occurrence of a toxic word is gold, nothing else is.
"""
from __future__ import annotations

import random

from .corpus import Corpus

TOXIC_WORDS = (
    "idiot", "moron", "stupid", "dumb", "loser", "pathetic", "scum", "trash",
    "clown", "imbecile", "hypocrite", "coward", "liar", "fool", "garbage",
    "disgusting", "worthless", "creep", "jerk", "bigot",
)

NEUTRAL_WORDS = (
    "the", "a", "an", "council", "meeting", "was", "about", "budget", "roads", "and",
    "schools", "this", "plan", "will", "cost", "more", "than", "expected", "we",
    "should", "vote", "on", "it", "next", "week", "mayor", "said", "city", "tax",
    "money", "people", "think", "really", "policy", "change", "year", "state",
    "report", "shows", "numbers", "are", "up", "again", "in", "for", "local", "news",
    "article", "writer", "point", "agree", "with", "that", "housing", "market",
    "prices", "rent", "water", "park", "bridge", "bus", "train", "station", "library",
    "hospital", "doctor", "nurse", "teacher", "student", "class", "lesson", "garden",
    "farm", "river", "lake", "mountain", "forest", "weather", "rain", "snow", "summer",
    "winter", "spring", "autumn", "morning", "evening", "night", "today", "tomorrow",
    "yesterday", "election", "candidate", "district", "county", "office", "building",
    "street", "avenue", "traffic", "parking", "permit", "license", "fee", "fund",
    "grant", "project", "contract", "company", "business", "store", "shop", "coffee",
    "bread", "dinner", "lunch", "breakfast", "family", "friend", "neighbor",
    "community", "church", "festival", "concert", "music", "movie", "book", "paper",
    "phone", "email", "letter", "message", "question", "answer", "reason", "result",
    "issue", "problem", "solution", "idea", "option", "choice", "history", "future",
    "present", "number", "percent", "million", "thousand", "hundred", "dollar",
    "value", "price", "rate", "level", "amount", "team", "game", "season", "coach",
    "player", "score", "win", "match", "field", "ticket", "crowd", "fans", "travel",
    "trip", "flight", "airport", "hotel", "beach", "island", "coast", "border",
    "tunnel", "highway", "power", "energy", "solar", "wind", "oil", "gas", "pipeline",
    "climate", "carbon", "science", "research", "study", "data", "survey", "poll",
    "record", "court", "judge", "law", "rule", "board", "member", "chair", "staff",
    "worker", "union", "wage", "job", "hire", "retire", "pension", "health", "care",
    "insurance", "clinic", "program", "service", "support", "public", "private",
)


def generate_corpus(
    n: int,
    seed: int = 0,
    toxic_rate: float = 0.6,
    max_toxic: int = 3,
    length: tuple[int, int] = (6, 14),
) -> Corpus:
    """Generate ``n`` posts; toxic ones hold 1..max_toxic non-adjacent toxic words."""
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        words = [rng.choice(NEUTRAL_WORDS) for _ in range(rng.randint(*length))]
        toxic_at: set[int] = set()
        if rng.random() < toxic_rate:
            # replace rather than insert, so post length carries no label signal
            k = min(rng.randint(1, max_toxic), (len(words) + 1) // 2)
            while True:
                toxic_at = set(rng.sample(range(len(words)), k))
                if all(i + 1 not in toxic_at for i in toxic_at):
                    break
            for i in toxic_at:
                words[i] = rng.choice(TOXIC_WORDS)
        text_parts, gold, pos = [], [], 0
        for i, word in enumerate(words):
            surface = word.capitalize() if i == 0 else word
            if i == len(words) - 1:
                surface += rng.choice((".", "!", "?", ""))
            if i in toxic_at:
                gold.extend(range(pos, pos + len(word)))
            text_parts.append(surface)
            pos += len(surface) + 1
        pairs.append((" ".join(text_parts), gold))
    return Corpus.from_pairs(pairs)
