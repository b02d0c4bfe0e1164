import json

import pytest

from toxspans import corpus as cp
from toxspans.cli import main


@pytest.fixture
def synth(tmp_path):
    path = tmp_path / "synth.csv"
    assert main(["synth", str(path), "-n", "60", "--seed", "2"]) == 0
    return path


def test_stats_emits_json(synth, capsys):
    assert main(["stats", str(synth)]) == 0
    out, err = capsys.readouterr()
    doc = json.loads(out)
    assert doc["record_count"] == 60 and len(doc["jaccard_histogram"]) == 20
    assert "60 records" in err


def test_split_and_export(tmp_path, sample_csv, capsys):
    src = tmp_path / "t1.csv"
    src.write_text(sample_csv, encoding="utf-8")
    assert main(["split", str(src), str(tmp_path / "split.csv")]) == 0
    assert len(cp.read_corpus(tmp_path / "split.csv")) == 6
    assert main(["export-ner", str(src), str(tmp_path / "ner.jsonl")]) == 0
    first = json.loads((tmp_path / "ner.jsonl").read_text().splitlines()[0])
    assert first["entities"] == [[7, 13, "TOXIC"]]


def test_train_predict_eval_audit(synth, tmp_path, capsys):
    gate, lex, pred = tmp_path / "gate.json", tmp_path / "lex.json", tmp_path / "pred.tsv"
    assert main(["train", "--lexicon", str(synth), "--out", str(lex)]) == 0
    assert main(["train", "--gate", str(synth), "--out", str(gate), "--epochs", "10", "--buckets", "4096"]) == 0
    assert main(["predict", "--gate", str(gate), "--lexicon", str(lex), str(synth), "--out", str(pred)]) == 0
    capsys.readouterr()
    assert main(["eval", "--pred", str(pred), "--gold", str(synth)]) == 0
    assert json.loads(capsys.readouterr().out)["n_posts"] == 60
    assert main(["audit", str(synth), "--pred", str(pred)]) == 0
    assert "diffs" in json.loads(capsys.readouterr().out)


def test_kfold_writes_files(synth, tmp_path):
    out = tmp_path / "folds"
    assert main(["kfold", str(synth), "-k", "3", "--seed", "1", "--out-dir", str(out)]) == 0
    manifest = json.loads((out / "folds.json").read_text())
    held = sorted(i for f in manifest["folds"] for i in f["heldout_ids"])
    assert held == list(range(60))
    assert len(cp.read_corpus(out / "fold2_heldout.csv")) == 20


@pytest.mark.parametrize(
    "argv",
    [
        ["stats", "/nonexistent/file.csv"],
        ["frobnicate"],
        ["kfold", "{synth}", "-k", "1", "--out-dir", "{tmp}"],
    ],
)
def test_input_errors_exit_one(argv, synth, tmp_path, capsys):
    argv = [a.format(synth=synth, tmp=tmp_path) for a in argv]
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_malformed_corpus_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text('spans,text\n"[0, 9]",abc\n', encoding="utf-8")
    assert main(["stats", str(bad)]) == 1
    assert "row 0" in capsys.readouterr().err


def test_single_class_training_exit_one(tmp_path):
    clean = tmp_path / "clean.csv"
    clean.write_text('spans,text\n"[]",nothing here\n', encoding="utf-8")
    assert main(["train", "--gate", str(clean), "--out", str(tmp_path / "g.json")]) == 1


def test_wrong_model_kind_exit_one(synth, tmp_path):
    lex = tmp_path / "lex.json"
    main(["train", "--lexicon", str(synth), "--out", str(lex)])
    assert main(["predict", "--gate", str(lex), "--lexicon", str(lex), str(synth), "--out", str(tmp_path / "p")]) == 1


def test_mismatched_predictions_exit_one(synth, tmp_path):
    pred = tmp_path / "pred.tsv"
    pred.write_text("0\t[]\n", encoding="utf-8")
    assert main(["eval", "--pred", str(pred), "--gold", str(synth)]) == 1
