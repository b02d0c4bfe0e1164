"""Desk-scale stand-in models.

Two roles are filled:

* a post-level toxicity *gate*: a logistic model over hashed character
  n-gram counts of each token, pooled over the post, trained with mini-batch
  SGD on a compounding batch schedule;
* a span *extractor*: a lexicon of token surfaces whose occurrences fall
  inside gold spans often enough.

Both serialize to versioned JSON documents.
"""
from __future__ import annotations

import json
import math
import random
import zlib
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Iterator

import numpy as np
from scipy import sparse
from scipy.special import expit

from . import spans as sp
from .corpus import Corpus
from .spans import SpanSet

MODEL_VERSION = 1
GATE_FORMAT = "toxspans.gate"
LEXICON_FORMAT = "toxspans.lexicon"

DEFAULT_BUCKETS = 2**16
NGRAM_ORDERS = (1, 2, 3)
ADAGRAD_EPS = 1e-8


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 45
    batch_start: float = 4.0
    batch_stop: float = 32.0
    batch_factor: float = 1.001
    learning_rate: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.batch_start < 1:
            raise ValueError("batch_start must be >= 1")
        if self.batch_factor <= 1:
            raise ValueError("batch_factor must be > 1")
        if self.batch_stop < self.batch_start:
            raise ValueError("batch_stop must be >= batch_start")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


def compounding(start: float, stop: float, factor: float) -> Iterator[float]:
    """Yield start, start*factor, ... clipped at stop, forever."""
    b = start
    while True:
        yield b
        b = min(stop, b * factor)


def multiplications_below_cap(cfg: TrainConfig) -> int:
    """Count the multiplications whose product is still below ``batch_stop``.

    The next multiplication after these is the one that reaches the cap.
    """
    b, n = cfg.batch_start, 0
    while b * cfg.batch_factor < cfg.batch_stop:
        b *= cfg.batch_factor
        n += 1
    return n


def compounding_batches(cfg: TrainConfig, n_items: int) -> list[list[int]]:
    """Partition a seeded shuffle of ``range(n_items)`` into growing batches."""
    order = list(range(n_items))
    random.Random(cfg.seed).shuffle(order)
    batches = []
    cursor = 0
    sizes = compounding(cfg.batch_start, cfg.batch_stop, cfg.batch_factor)
    while cursor < n_items:
        size = int(math.floor(next(sizes)))
        batches.append(order[cursor:cursor + size])
        cursor += size
    return batches


# -- lexicon extractor -------------------------------------------------------

def normalize_token(surface: str) -> tuple[str, int, int]:
    """Lowercase a token and strip non-alphanumerics from both ends.

    Returns the normalized lexeme and the [start, end) of its core within
    ``surface``; the lexeme is empty when nothing alphanumeric remains.
    """
    start, end = 0, len(surface)
    while start < end and not surface[start].isalnum():
        start += 1
    while end > start and not surface[end - 1].isalnum():
        end -= 1
    return surface[start:end].lower(), start, end


@dataclass(frozen=True)
class LexiconModel:
    entries: dict[str, tuple[int, int]] = field(default_factory=dict)
    min_count: int = 2
    min_ratio: float = 0.5

    def __post_init__(self):
        for lexeme, (toxic, total) in self.entries.items():
            if not 0 <= toxic <= total:
                raise ValueError(f"entry {lexeme!r}: toxic count {toxic} exceeds total {total}")
        active = frozenset(
            lexeme
            for lexeme, (toxic, total) in self.entries.items()
            if total >= self.min_count and toxic / total >= self.min_ratio
        )
        object.__setattr__(self, "_active", active)

    @property
    def active(self) -> frozenset[str]:
        return self._active

    def is_active(self, lexeme: str) -> bool:
        return lexeme in self._active

    def _cores(self, text: str) -> list[tuple[int, int, bool]]:
        out = []
        for tok in sp.tokenize(text):
            lexeme, a, b = normalize_token(tok.surface)
            out.append((tok.start + a, tok.start + b, bool(lexeme) and lexeme in self._active))
        return out

    def extract_all(self, text: str) -> SpanSet:
        return sp.as_spanset(i for a, b, hit in self._cores(text) if hit for i in range(a, b))

    def extract_one(self, text: str) -> SpanSet:
        """Leftmost maximal run of active tokens, internal whitespace included."""
        run = None
        for a, b, hit in self._cores(text):
            if hit:
                run = (a, b) if run is None else (run[0], b)
            elif run is not None:
                break
        return tuple(range(*run)) if run else ()

    def to_dict(self) -> dict:
        return {
            "format": LEXICON_FORMAT,
            "version": MODEL_VERSION,
            "min_count": self.min_count,
            "min_ratio": self.min_ratio,
            "entries": {k: list(v) for k, v in sorted(self.entries.items())},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LexiconModel":
        _check_header(doc, LEXICON_FORMAT)
        entries = {k: (int(v[0]), int(v[1])) for k, v in doc["entries"].items()}
        return cls(entries, int(doc["min_count"]), float(doc["min_ratio"]))


def train_lexicon(corpus: Corpus, min_count: int = 2, min_ratio: float = 0.5) -> LexiconModel:
    if len(corpus) == 0:
        raise ValueError("cannot train a lexicon on an empty corpus")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    if not 0 < min_ratio <= 1:
        raise ValueError("min_ratio must be in (0, 1]")
    toxic: dict[str, int] = {}
    total: dict[str, int] = {}
    for post in corpus:
        for tok, is_toxic in sp.label_tokens(post.text, post.gold):
            lexeme = normalize_token(tok.surface)[0]
            if not lexeme:
                continue
            total[lexeme] = total.get(lexeme, 0) + 1
            toxic[lexeme] = toxic.get(lexeme, 0) + int(is_toxic)
    return LexiconModel({k: (toxic[k], total[k]) for k in total}, min_count, min_ratio)


def extract_all(model: LexiconModel, text: str) -> SpanSet:
    return model.extract_all(text)


def extract_one(model: LexiconModel, text: str) -> SpanSet:
    return model.extract_one(text)


# -- gate --------------------------------------------------------------------
#
# Each whitespace token is embedded as L2-normalized hashed counts of the
# character 1-, 2- and 3-grams of "<token>" (lowercased) and scored linearly.
# The post logit pools token scores with a log-mean-exp that includes one
# null token of score 0:
#
#     logit = bias + log((1 + sum_t exp(s_t)) / (1 + T))
#
# so a zero model scores exactly 0.5, and a single strongly toxic token can
# carry a long post. Gradients with respect to the weights are softmax-weighted
# sums of token features.

def _bucket(order: int, gram: str, buckets: int) -> int:
    return zlib.crc32(f"{order}\x00{gram}".encode("utf-8")) % buckets


def token_features(surface: str, buckets: int) -> dict[int, float]:
    marked = f"<{surface.lower()}>"
    counts: dict[int, float] = {}
    for n in NGRAM_ORDERS:
        for i in range(len(marked) - n + 1):
            j = _bucket(n, marked[i:i + n], buckets)
            counts[j] = counts.get(j, 0.0) + 1.0
    norm = math.sqrt(sum(v * v for v in counts.values()))
    return {j: v / norm for j, v in counts.items()}


@dataclass(frozen=True)
class TokenMatrix:
    """Token feature rows for a batch of texts; ``owner[r]`` is the text of row r."""

    features: sparse.csr_matrix
    owner: np.ndarray
    n_texts: int

    def subset(self, texts: list[int]) -> "TokenMatrix":
        starts = np.searchsorted(self.owner, texts)
        ends = np.searchsorted(self.owner, texts, side="right")
        rows = np.concatenate([np.arange(a, b) for a, b in zip(starts, ends)] or [np.zeros(0, int)])
        owner = np.repeat(np.arange(len(texts)), ends - starts)
        return TokenMatrix(self.features[rows], owner, len(texts))


def encode(texts: Iterable[str], buckets: int) -> TokenMatrix:
    rows, cols, vals, owner = [], [], [], []
    n = 0
    for n, text in enumerate(texts, 1):
        for tok in sp.tokenize(text):
            r = len(owner)
            for j, v in sorted(token_features(tok.surface, buckets).items()):
                rows.append(r)
                cols.append(j)
                vals.append(v)
            owner.append(n - 1)
    X = sparse.csr_matrix((vals, (rows, cols)), shape=(len(owner), buckets), dtype=np.float64)
    return TokenMatrix(X, np.asarray(owner, dtype=np.int64), n)


def pooled_logits(weights: np.ndarray, bias: float, enc: TokenMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Post logits and per-token scores."""
    s = enc.features @ weights
    peak = np.zeros(enc.n_texts)
    np.maximum.at(peak, enc.owner, s)
    mass = np.exp(-peak)
    np.add.at(mass, enc.owner, np.exp(s - peak[enc.owner]))
    count = np.bincount(enc.owner, minlength=enc.n_texts) + 1.0
    return bias + peak + np.log(mass) - np.log(count), s


def log_loss(weights: np.ndarray, bias: float, enc: TokenMatrix, y: np.ndarray) -> float:
    """Mean logistic loss of labels ``y``."""
    z, _ = pooled_logits(weights, bias, enc)
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def log_loss_grad(weights: np.ndarray, bias: float, enc: TokenMatrix, y: np.ndarray) -> tuple[np.ndarray, float]:
    z, s = pooled_logits(weights, bias, enc)
    residual = (expit(z) - y) / len(y)
    count = np.bincount(enc.owner, minlength=enc.n_texts) + 1.0
    # softmax weight of each token within its post, null token included
    share = np.exp(s - (z - bias + np.log(count))[enc.owner])
    grad_w = enc.features.T @ (share * residual[enc.owner])
    return np.asarray(grad_w).ravel(), float(residual.sum())


@dataclass(eq=False)
class GateModel:
    weights: np.ndarray
    bias: float = 0.0
    hash_buckets: int = DEFAULT_BUCKETS
    config: TrainConfig | None = None
    train_losses: tuple[float, ...] = ()

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.hash_buckets,):
            raise ValueError("weights length must equal hash_buckets")
        if not (np.all(np.isfinite(self.weights)) and math.isfinite(self.bias)):
            raise ValueError("gate weights must be finite")

    @classmethod
    def zeros(cls, hash_buckets: int = DEFAULT_BUCKETS) -> "GateModel":
        return cls(np.zeros(hash_buckets), 0.0, hash_buckets)

    def logit(self, text: str) -> float:
        scores = [0.0]
        for tok in sp.tokenize(text):
            feats = token_features(tok.surface, self.hash_buckets)
            scores.append(math.fsum(self.weights[j] * v for j, v in sorted(feats.items())))
        peak = max(scores)
        mass = math.fsum(math.exp(s - peak) for s in scores)
        return self.bias + peak + math.log(mass) - math.log(len(scores))

    def score(self, text: str) -> float:
        return float(expit(self.logit(text)))

    def to_dict(self) -> dict:
        nz = np.flatnonzero(self.weights)
        return {
            "format": GATE_FORMAT,
            "version": MODEL_VERSION,
            "hash_buckets": self.hash_buckets,
            "bias": self.bias,
            "weights": {str(int(j)): float(self.weights[j]) for j in nz},
            "config": asdict(self.config) if self.config else None,
            "train_losses": list(self.train_losses),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GateModel":
        _check_header(doc, GATE_FORMAT)
        buckets = int(doc["hash_buckets"])
        weights = np.zeros(buckets)
        for j, w in doc["weights"].items():
            weights[int(j)] = w
        config = TrainConfig(**doc["config"]) if doc.get("config") else None
        return cls(weights, float(doc["bias"]), buckets, config, tuple(doc.get("train_losses", ())))


def gate_score(gate: GateModel, text: str) -> float:
    return gate.score(text)


def gate_training_pairs(corpus: Corpus, expand: bool = True) -> list[tuple[str, bool]]:
    """(text, toxic) examples for the gate; toxic iff the gold set is nonempty.

    With ``expand``, a toxic post contributes one example per contiguous gold
    range (the others deleted, as in multi-span splitting) plus a copy with
    every gold range deleted, labeled non-toxic. That mirrors the recheck the
    gate faces after each extraction.
    """
    pairs = []
    for post in corpus:
        if not expand or not post.gold:
            pairs.append((post.text, bool(post.gold)))
            continue
        pairs.extend((text, True) for text, _ in sp.split_multispan(post.text, post.gold))
        cleaned, _ = sp.delete_ranges(post.text, sp.widen_with_space(post.text, post.ranges))
        pairs.append((cleaned, False))
    return pairs


def train_gate(
    corpus: Corpus,
    cfg: TrainConfig = TrainConfig(),
    hash_buckets: int = DEFAULT_BUCKETS,
    expand: bool = True,
) -> GateModel:
    """Fit the gate by mini-batch SGD with AdaGrad step scaling.

    Each epoch reshuffles with a seed derived from ``cfg.seed`` and the epoch
    number, so training is reproducible bit for bit.
    """
    pairs = gate_training_pairs(corpus, expand)
    y = np.array([1.0 if toxic else 0.0 for _, toxic in pairs])
    if len(y) == 0 or y.min() == y.max():
        raise ValueError("gate training needs both toxic and non-toxic posts")
    enc = encode((text for text, _ in pairs), hash_buckets)
    w = np.zeros(hash_buckets)
    b = 0.0
    sq_w = np.zeros(hash_buckets)
    sq_b = 0.0
    losses = []
    for epoch in range(cfg.epochs):
        epoch_cfg = replace(cfg, seed=cfg.seed * 1_000_003 + epoch)
        for batch in compounding_batches(epoch_cfg, len(y)):
            gw, gb = log_loss_grad(w, b, enc.subset(batch), y[batch])
            sq_w += gw * gw
            sq_b += gb * gb
            w -= cfg.learning_rate * gw / (np.sqrt(sq_w) + ADAGRAD_EPS)
            b -= cfg.learning_rate * gb / (math.sqrt(sq_b) + ADAGRAD_EPS)
        losses.append(log_loss(w, b, enc, y))
    return GateModel(w, b, hash_buckets, cfg, tuple(losses))


# -- baseline & serialization -------------------------------------------------

def random_baseline(p: float, seed: int, text: str) -> SpanSet:
    """Include each character offset independently with probability ``p``."""
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    rng = random.Random(seed)
    return tuple(i for i in range(len(text)) if rng.random() < p)


def _check_header(doc: dict, expected: str) -> None:
    if doc.get("format") != expected:
        raise ModelFormatError(f"expected model format {expected!r}, got {doc.get('format')!r}")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")


def save_model(model: GateModel | LexiconModel, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.to_dict(), f)


def load_model(path) -> GateModel | LexiconModel:
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not a JSON model document ({exc})") from None
    fmt = doc.get("format") if isinstance(doc, dict) else None
    if fmt == GATE_FORMAT:
        return GateModel.from_dict(doc)
    if fmt == LEXICON_FORMAT:
        return LexiconModel.from_dict(doc)
    raise ModelFormatError(f"{path}: unknown model format {fmt!r}")
