"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per criterion
is printed in the terminal summary.
"""
import io
import json
import math
import os
import random
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ROW1, ROW2, ROW3, ROW4
from toxspans import corpus as cp, models, spans as sp
from toxspans.cli import main
from toxspans.metrics import per_post_f1, toxic_fraction
from toxspans.models import GateModel, LexiconModel, TrainConfig
from toxspans.pipeline import PipelineConfig, run_detection
from toxspans.synthetic import generate_corpus

TRAIN_ENV, TEST_ENV = "TOXSPANS_TRAIN_CSV", "TOXSPANS_TEST_CSV"


def oracle_f1(pred, gold):
    """Enumerate the union of both sets and count memberships one offset at a time."""
    universe = sorted(set(pred) | set(gold))
    n_pred = sum(1 for i in universe if i in pred)
    n_gold = sum(1 for i in universe if i in gold)
    n_both = sum(1 for i in universe if i in pred and i in gold)
    if n_pred == 0 and n_gold == 0:
        return 1.0
    if n_pred == 0 or n_gold == 0:
        return 0.0
    return 2 * n_both / (n_pred + n_gold)


@pytest.mark.criterion("1 metric oracle equivalence (10,000 pairs, bit-exact, < 5 s)")
def test_metric_oracle_equivalence():
    rng = random.Random(20210801)
    pairs = []
    for i in range(10_000):
        kind = i % 4  # cycle through empty/nonempty combinations
        pred = set() if kind in (0, 1) else {rng.randrange(60) for _ in range(rng.randint(1, 30))}
        gold = set() if kind in (0, 2) else {rng.randrange(60) for _ in range(rng.randint(1, 30))}
        pairs.append((pred, gold))
    t0 = time.perf_counter()
    ours = [per_post_f1(p, g) for p, g in pairs]
    elapsed = time.perf_counter() - t0
    theirs = [oracle_f1(p, g) for p, g in pairs]
    mismatches = [i for i, (a, b) in enumerate(zip(ours, theirs)) if a.hex() != b.hex()]
    assert mismatches == []
    assert elapsed < 5.0


@pytest.mark.criterion("2 sample rows parse to the expected gold surfaces")
def test_sample_rows(sample_csv):
    c = cp.parse_corpus(io.StringIO(sample_csv))
    assert [p.text for p in c] == [ROW1, ROW2, ROW3, ROW4]
    assert c[0].surfaces() == ["damned"]
    assert c[1].surfaces() == ["He might fire you to the moon"]
    assert set(c[2].surfaces()) == {"Nauseating", "disgusting", "stupidity"}
    assert c[3].surfaces() == []


@pytest.mark.criterion("3 multi-span splitting reproduces the two derived posts")
def test_split_fidelity(split_post):
    derived = sp.split_multispan(split_post.text, split_post.gold)
    assert [t for t, _ in derived] == ["This bitch is so.", "This is so fucking idiot."]
    ranges = [sp.offsets_to_ranges(g) for _, g in derived]
    assert all(len(r) == 1 for r in ranges)
    assert [sp.span_surface(t, r[0]) for (t, _), r in zip(derived, ranges)] == ["bitch", "fucking idiot"]


def _dataset(var):
    path = os.environ.get(var)
    if not path or not Path(path).is_file():
        pytest.skip(f"set {var} to the task's CSV file to run this check")
    return cp.read_corpus(path)


@pytest.mark.criterion("4 statistics of the public task files (needs $TOXSPANS_TRAIN_CSV, $TOXSPANS_TEST_CSV)")
def test_dataset_statistics():
    train, test = _dataset(TRAIN_ENV), _dataset(TEST_ENV)
    tr, te = cp.corpus_stats(train), cp.corpus_stats(test)
    assert (tr.record_count, te.record_count) == (7939, 2000)
    assert abs(tr.single_span_fraction - 0.688) <= 0.005
    assert abs(te.single_span_fraction - 0.708) <= 0.005
    assert abs(tr.zero_span_fraction - 0.0615) <= 0.005
    assert abs(te.zero_span_fraction - 0.197) <= 0.005
    assert sum(1 for p in train if p.text and 0.95 <= toxic_fraction(p) <= 1.0) == 212
    assert int(np.argmax(tr.jaccard_histogram)) == 0


@pytest.mark.criterion("5 synthetic end-to-end through the CLI: mean F1 = 1.0, < 30 s")
def test_synthetic_end_to_end(tmp_path, capsys):
    t0 = time.perf_counter()
    data = tmp_path / "synth.csv"
    assert main(["synth", str(data), "-n", "200", "--seed", "0"]) == 0
    folds = tmp_path / "folds"
    assert main(["kfold", str(data), "-k", "5", "--seed", "0", "--out-dir", str(folds)]) == 0
    train, held = folds / "fold0_train.csv", folds / "fold0_heldout.csv"
    lex, gate, pred = tmp_path / "lex.json", tmp_path / "gate.json", tmp_path / "pred.tsv"
    assert main(["train", "--lexicon", str(train), "--out", str(lex)]) == 0
    assert main(["train", "--gate", str(train), "--out", str(gate)]) == 0
    assert main(["predict", "--gate", str(gate), "--lexicon", str(lex), str(held), "--out", str(pred)]) == 0
    capsys.readouterr()
    assert main(["eval", "--pred", str(pred), "--gold", str(held)]) == 0
    report = json.loads(capsys.readouterr().out)
    elapsed = time.perf_counter() - t0
    assert report["n_posts"] == 40
    assert report["mean_f1"] == 1.0
    assert elapsed < 30.0


class _HashGate:
    """Fires on a pseudo-random subset of texts, fixed per seed."""

    def __init__(self, seed, rate):
        self.seed, self.rate = seed, rate

    def score(self, text):
        return 1.0 if random.Random(f"{self.seed}|{text}").random() < self.rate else 0.0


class _ConstantGate:
    def score(self, text):
        return 1.0


@pytest.mark.criterion("6 pipeline terminates within min(10, |text|) iterations with in-bounds offsets")
def test_pipeline_termination():
    rng = random.Random(6)
    pool = ["idiot", "jerk", "ok", "the", "a", "fool!", "x", "...", "Idiot,", "zz"]
    cfg = PipelineConfig()
    for trial in range(1000):
        words = [rng.choice(pool) + rng.choice(["", "", ".", "?"]) for _ in range(rng.randint(0, 40))]
        text = rng.choice([" ", "  ", "\t"]).join(words)[: rng.randint(0, 200)]
        active = rng.sample(["idiot", "jerk", "fool", "x", "zz", "ok"], rng.randint(0, 4))
        lexicon = LexiconModel({w: (1, 1) for w in active}, min_count=1)
        kind = trial % 3
        if kind == 0:
            gate = _ConstantGate()
        elif kind == 1:
            gate = _HashGate(trial, rng.random())
        else:
            gate = GateModel(np.random.default_rng(trial).normal(size=64), rng.uniform(-1, 3), 64)
        det = run_detection(gate, lexicon, text, cfg)
        assert det.iterations <= min(cfg.max_iterations, len(text))
        assert all(0 <= i < len(text) for i in det.spans)


@pytest.mark.criterion("7 round trips: offsets/ranges, delete+remap, corpus parse/write")
def test_round_trips():
    rng = random.Random(7)
    for _ in range(10_000):
        offsets = {rng.randrange(500) for _ in range(rng.randint(0, 60))}
        ranges = sp.offsets_to_ranges(offsets)
        assert sp.ranges_to_offsets(ranges) == tuple(sorted(offsets))
        assert sp.offsets_to_ranges(sp.ranges_to_offsets(ranges)) == ranges

    for _ in range(1000):
        text = "".join(rng.choice("ab c.") for _ in range(rng.randint(1, 80)))
        cuts = sorted(rng.sample(range(len(text) + 1), min(len(text) + 1, 2 * rng.randint(0, 4))))
        ranges = [(a, b) for a, b in zip(cuts[::2], cuts[1::2])]
        derived, offset_map = sp.delete_ranges(text, ranges)
        kept = [i for i in range(len(text)) if not any(a <= i < b for a, b in ranges)]
        assert derived == "".join(text[i] for i in kept)
        if derived:
            a = rng.randrange(len(derived))
            b = rng.randint(a + 1, len(derived))
            original = sp.remap_to_original(offset_map, range(a, b))
            assert "".join(text[i] for i in original) == derived[a:b]

    synth = generate_corpus(200, seed=7)
    first = io.StringIO()
    cp.write_corpus(synth, first)
    parsed = cp.parse_corpus(io.StringIO(first.getvalue()))
    second = io.StringIO()
    cp.write_corpus(parsed, second)
    assert parsed == synth
    assert second.getvalue() == first.getvalue()


@pytest.mark.criterion("8 gate gradient vs central differences, relative error < 1e-5 on 100 models")
def test_gradient_check():
    rng = np.random.default_rng(8)
    vocab = ["zzz", "ok", "idiot", "the", "a", "Fool!", "x"]
    h = 1e-5
    worst = 0.0
    for _ in range(100):
        buckets = int(rng.integers(8, 33))
        texts = [" ".join(rng.choice(vocab, size=rng.integers(0, 6))) for _ in range(int(rng.integers(2, 7)))]
        y = rng.integers(0, 2, size=len(texts)).astype(float)
        enc = models.encode(texts, buckets)
        w, b = rng.normal(scale=2.0, size=buckets), float(rng.normal())
        gw, gb = models.log_loss_grad(w, b, enc, y)
        analytic = np.append(gw, gb)
        numeric = np.empty(buckets + 1)
        for j in range(buckets):
            e = np.zeros(buckets)
            e[j] = h
            numeric[j] = (models.log_loss(w + e, b, enc, y) - models.log_loss(w - e, b, enc, y)) / (2 * h)
        numeric[-1] = (models.log_loss(w, b + h, enc, y) - models.log_loss(w, b - h, enc, y)) / (2 * h)
        scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)
        worst = max(worst, float(np.linalg.norm(analytic - numeric) / scale))
    assert worst < 1e-5, worst


@pytest.mark.criterion("9 compounding schedule: starts at 4, non-decreasing, capped at 32, 2080 multiplications")
def test_compounding_schedule():
    cfg = TrainConfig()
    batches = models.compounding_batches(cfg, 10_000)
    sizes = [len(b) for b in batches]
    assert sum(sizes) == 10_000
    assert sizes[0] == 4
    floored = [math.floor(b) for b, _ in zip(models.compounding(4.0, 32.0, 1.001), range(3000))]
    # every batch follows the floored schedule; the final one may be cut short
    assert sizes[:-1] == floored[: len(sizes) - 1]
    assert sizes[-1] <= floored[len(sizes) - 1]
    assert all(a <= b for a, b in zip(sizes[:-1], sizes[1:-1]))
    assert max(sizes) <= 32
    assert all(a <= b for a, b in zip(floored, floored[1:]))
    assert floored[-1] == 32 and max(floored) == 32

    b, below = 4.0, 0
    while b * 1.001 < 32.0:
        b *= 1.001
        below += 1
    assert below == 2080 == models.multiplications_below_cap(cfg)
    assert b * 1.001 >= 32.0


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
