import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from prufercode.cli import cli, main

from conftest import FIVE_NODE_DOC


@pytest.fixture
def runner():
    return CliRunner()


def _corpus_line(rng=None, comment="does a thing"):
    return json.dumps({"ast": FIVE_NODE_DOC, "comment": comment})


def _write_corpus(path: Path, n: int, comment_pool=("sorts input", "merges output", "reads file")):
    lines = [
        json.dumps({"ast": FIVE_NODE_DOC, "comment": comment_pool[i % len(comment_pool)]})
        for i in range(n)
    ]
    path.write_text("\n".join(lines) + "\n")


def test_encode_three_trees(tmp_path, runner):
    src = tmp_path / "in.jsonl"
    src.write_text("\n".join(_corpus_line() for _ in range(3)) + "\n")
    out = tmp_path / "codes.jsonl"
    result = runner.invoke(cli, ["encode", str(src), "-o", str(out), "--syntactic"])
    assert result.exit_code == 0, result.output
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(rows) == 3
    assert rows[0]["sequence"] == [2, 2, 1]
    assert rows[0]["syntactic"] == ["B", "B", "A"]
    manifest = json.loads((tmp_path / "codes.jsonl.manifest.json").read_text())
    assert manifest["counts"] == {"written": 3, "skipped": 0}


def test_encode_malformed_line_strict_vs_lenient(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text(_corpus_line() + "\n" + "{not json}\n" + _corpus_line() + "\n")
    out = tmp_path / "codes.jsonl"
    with pytest.raises(SystemExit) as exc:
        main(["encode", str(src), "-o", str(out)])
    assert exc.value.code == 1

    runner = CliRunner()
    result = runner.invoke(cli, ["encode", str(src), "-o", str(out), "--lenient"])
    assert result.exit_code == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 2
    manifest = json.loads((tmp_path / "codes.jsonl.manifest.json").read_text())
    assert manifest["counts"]["skipped"] == 1


def test_encode_empty_file_exits_one(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text("")
    with pytest.raises(SystemExit) as exc:
        main(["encode", str(src), "-o", str(tmp_path / "o.jsonl")])
    assert exc.value.code == 1


def test_stats_star_corpus_closed_forms(tmp_path, runner):
    star = {"label": "R", "children": [{"label": f"l{i}", "children": []} for i in range(3)]}
    src = tmp_path / "stars.jsonl"
    src.write_text("\n".join(json.dumps({"ast": star}) for _ in range(4)) + "\n")
    out = tmp_path / "stats.json"
    result = runner.invoke(cli, ["stats", str(src), "-o", str(out), "--threshold", "200"])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    reps = report["representations"]
    assert reps["prufer"]["average"] == 2.0
    assert reps["sbt"]["average"] == 12.0
    assert reps["bfs"]["average"] == 4.0
    assert reps["sbt"]["average"] == 3 * reps["bfs"]["average"]
    for rep in reps.values():
        assert 0.0 <= rep["pct_under_threshold"] <= 100.0


def test_represent_kinds(tmp_path, runner):
    src = tmp_path / "in.jsonl"
    src.write_text(_corpus_line() + "\n")
    for kind, expected in [
        ("sbt", ["(", "A", "(", "B", "(", "x", ")", "(", "y", ")", ")", "(", "foo", ")", ")"]),
        ("bfs", ["A", "B", "foo", "x", "y"]),
        ("flat", ["x", "y", "foo"]),
        ("encoder-input", ["B", "B", "A", "x", "y", "foo"]),
        ("context", ["x", "y", "x", "y", "foo"]),
    ]:
        out = tmp_path / f"{kind}.jsonl"
        result = runner.invoke(cli, ["represent", str(src), "--kind", kind, "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert json.loads(out.read_text().splitlines()[0]) == expected


def test_full_pipeline_and_determinism(tmp_path, runner, monkeypatch):
    # two identical runs in sibling directories, relative paths throughout
    corpus = tmp_path / "corpus.jsonl"
    rng = np.random.default_rng(0)
    names = ["alpha", "beta", "gamma", "delta", "omega", "kappa"]
    lines = []
    for i in range(30):
        k = int(rng.integers(2, 5))
        leaves = [{"label": names[int(rng.integers(0, len(names)))], "children": []} for _ in range(k)]
        ast = {"label": "M", "children": [{"label": "B", "children": leaves}]}
        lines.append(json.dumps({"ast": ast, "comment": " ".join(l["label"] for l in leaves[:3])}))
    corpus.write_text("\n".join(lines) + "\n")

    def run_once(workdir: Path):
        workdir.mkdir()
        monkeypatch.chdir(workdir)
        args_list = [
            ["encode", "../corpus.jsonl", "-o", "codes.jsonl", "--syntactic"],
            ["dataset", "../corpus.jsonl", "-o", "ds", "--vocab-size", "100", "--seed", "3"],
            ["train", "ds", "-o", "model.json", "--hidden", "12", "--embed", "8",
             "--epochs", "4", "--seed", "3", "--lr", "0.3"],
            ["decode", "model.json", "ds/test.jsonl", "-o", "hyp.jsonl", "--refs-out", "ref.jsonl"],
            ["score", "hyp.jsonl", "ref.jsonl", "-o", "score.json"],
        ]
        for args in args_list:
            result = runner.invoke(cli, args)
            assert result.exit_code == 0, (args, result.output)

    run_once(tmp_path / "run1")
    run_once(tmp_path / "run2")

    files = [
        "codes.jsonl", "ds/train.jsonl", "ds/valid.jsonl", "ds/test.jsonl",
        "ds/vocab.prufer.txt", "ds/vocab.context.txt", "ds/vocab.comment.txt",
        "model.json", "model.loss.csv", "hyp.jsonl", "ref.jsonl", "score.json",
    ]
    for name in files:
        a = (tmp_path / "run1" / name).read_bytes()
        b = (tmp_path / "run2" / name).read_bytes()
        assert a == b, f"{name} differs between identical runs"

    manifests = [
        "codes.jsonl.manifest.json", "ds/dataset.manifest.json",
        "model.json.manifest.json", "hyp.jsonl.manifest.json", "score.json.manifest.json",
    ]
    for name in manifests:
        a = json.loads((tmp_path / "run1" / name).read_text())
        b = json.loads((tmp_path / "run2" / name).read_text())
        a.pop("duration_seconds")
        b.pop("duration_seconds")
        assert a == b, f"{name} differs beyond duration"


def test_score_identical_files_c_bleu_100(tmp_path, runner):
    tokens = [["a", "b", "c", "d"], ["x", "y", "z", "w", "q"]]
    hyp = tmp_path / "hyp.jsonl"
    hyp.write_text("\n".join(json.dumps(t) for t in tokens) + "\n")
    out = tmp_path / "score.json"
    result = runner.invoke(cli, ["score", str(hyp), str(hyp), "-o", str(out)])
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["scores"]["c_bleu"] == 100.0
    assert payload["scores"]["rouge_l"] == 100.0


def test_score_buckets_one_row_per_nonempty_bucket(tmp_path, runner):
    rows = [["a"] * 3, ["b"] * 55, ["c"] * 4]
    hyp = tmp_path / "hyp.jsonl"
    hyp.write_text("\n".join(json.dumps(t) for t in rows) + "\n")
    out = tmp_path / "score.json"
    result = runner.invoke(cli, ["score", str(hyp), str(hyp), "-o", str(out)])
    assert result.exit_code == 0
    payload = json.loads(out.read_text())
    assert [b["bucket_start"] for b in payload["buckets"]] == [0, 50]
    assert payload["buckets"][0]["count"] == 2
    assert payload["buckets"][1]["count"] == 1


def test_score_length_mismatch_exits_one(tmp_path):
    hyp = tmp_path / "hyp.jsonl"
    ref = tmp_path / "ref.jsonl"
    hyp.write_text('["a"]\n["b"]\n')
    ref.write_text('["a"]\n')
    with pytest.raises(SystemExit) as exc:
        main(["score", str(hyp), str(ref), "-o", str(tmp_path / "s.json")])
    assert exc.value.code == 1


def test_out_dir_env_var(tmp_path, runner, monkeypatch):
    src = tmp_path / "in.jsonl"
    src.write_text(_corpus_line() + "\n")
    target = tmp_path / "outputs"
    monkeypatch.setenv("PRUFERCODE_OUT", str(target))
    result = runner.invoke(cli, ["encode", str(src)])
    assert result.exit_code == 0, result.output
    assert (target / "in.prufer.jsonl").exists()


def test_unknown_flag_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["encode", "--no-such-flag"])
    assert exc.value.code == 1
