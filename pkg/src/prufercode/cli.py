"""Command-line interface: representation conversion, statistics, dataset
preparation, training, decoding, and scoring.

Every command writes a JSON manifest next to its outputs recording the
command, paths, options, seed, tool version, record counts, and wall-clock
duration.  Exit codes: 0 success, 1 input error, 2 internal invariant
violation.  The PRUFERCODE_OUT environment variable sets the default output
directory.
"""

from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .baselines import bfs_sequence, flat_tokens, leaf_paths, sbt_sequence
from .errors import EmptyInput, MalformedDocument, NotATree, PruferCodeError, TooSmall
from .metrics import corpus_report, sentence_bleu_s4
from .model import (
    ModelConfig,
    greedy_decode,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .pipeline import (
    DEFAULT_COMMENT_MAX,
    DEFAULT_CONTEXT_MAX,
    DEFAULT_PRUFER_MAX,
    DEFAULT_VOCAB_SIZE,
    CorpusRecord,
    EncodedExample,
    SequenceLimits,
    Vocabulary,
    build_vocab,
    context_subtokens,
    encode_example,
    encoder_input_subtokens,
    parse_corpus_record,
    read_jsonl,
    split_corpus,
    stats,
    tokenize_comment,
    write_jsonl,
)
from .prufer import build_encoder_input, context_sequence, encode, syntactic_sequence


def _out_dir() -> Path:
    return Path(os.environ.get("PRUFERCODE_OUT", "."))


def _resolve_out(out: str | None, default_name: str) -> Path:
    if out:
        return Path(out)
    d = _out_dir()
    d.mkdir(parents=True, exist_ok=True)
    return d / default_name


def _write_manifest(
    anchor: Path,
    command: str,
    inputs: dict,
    outputs: dict,
    options: dict,
    counts: dict,
    started: float,
    seed: int | None = None,
) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "inputs": inputs,
        "outputs": outputs,
        "options": options,
        "counts": counts,
        "duration_seconds": round(time.time() - started, 3),
    }
    path = anchor.with_name(anchor.name + ".manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def _load_corpus(path: str, lenient: bool) -> tuple[list[CorpusRecord], int]:
    """Parse a corpus JSONL file; skip-and-report bad lines when lenient."""
    records: list[CorpusRecord] = []
    skipped = 0
    for lineno, line in read_jsonl(path):
        try:
            records.append(parse_corpus_record(line))
        except (MalformedDocument, NotATree, TooSmall) as exc:
            if not lenient:
                raise MalformedDocument(f"{path}:{lineno}: {exc}") from exc
            skipped += 1
            click.echo(f"warning: {path}:{lineno}: skipped ({exc})", err=True)
    if not records:
        raise EmptyInput(f"no usable records in {path}")
    return records, skipped


def _read_token_jsonl(path: str) -> list[list[str]]:
    rows: list[list[str]] = []
    for lineno, line in read_jsonl(path):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"{path}:{lineno}: {exc}") from exc
        if not isinstance(obj, list):
            raise MalformedDocument(f"{path}:{lineno}: expected a JSON array of tokens")
        rows.append([str(t) for t in obj])
    if not rows:
        raise EmptyInput(f"no records in {path}")
    return rows


@click.group()
@click.version_option(version=__version__, prog_name="prufercode")
def cli():
    """Prufer-sequence AST toolkit."""


# ---------------------------------------------------------------------------
# encode
# ---------------------------------------------------------------------------


@cli.command("encode")
@click.argument("input_path", metavar="INPUT")
@click.option("-o", "--out", help="Output JSONL path.")
@click.option("--syntactic", is_flag=True, help="Include the syntactic token sequence.")
@click.option("--encoder-input", "encoder_input", is_flag=True, help="Include the encoder input tokens.")
@click.option("--context", is_flag=True, help="Include the context token sequence.")
@click.option("--lenient", is_flag=True, help="Skip malformed records instead of failing.")
def cmd_encode(input_path, out, syntactic, encoder_input, context, lenient):
    """Prufer-encode each AST in a JSONL corpus."""
    started = time.time()
    out_path = _resolve_out(out, Path(input_path).stem + ".prufer.jsonl")
    records, skipped = _load_corpus(input_path, lenient)

    def rows():
        for rec in records:
            code = encode(rec.tree)
            row = code.to_json()
            if syntactic:
                row["syntactic"] = syntactic_sequence(code)
            if encoder_input:
                row["encoder_input"] = build_encoder_input(rec.tree)
            if context:
                row["context"] = context_sequence(rec.tree, code)
            yield row

    written = write_jsonl(out_path, rows())
    _write_manifest(
        out_path,
        "encode",
        inputs={"corpus": str(input_path)},
        outputs={"codes": str(out_path)},
        options={
            "syntactic": syntactic,
            "encoder_input": encoder_input,
            "context": context,
            "lenient": lenient,
        },
        counts={"written": written, "skipped": skipped},
        started=started,
    )
    click.echo(f"encoded {written} tree(s) -> {out_path} ({skipped} skipped)")


# ---------------------------------------------------------------------------
# represent
# ---------------------------------------------------------------------------

_KINDS = ["sbt", "bfs", "flat", "paths", "syntactic", "encoder-input", "context"]


@cli.command("represent")
@click.argument("input_path", metavar="INPUT")
@click.option("--kind", type=click.Choice(_KINDS), required=True)
@click.option("-o", "--out", help="Output JSONL path.")
@click.option("--max-paths", default=100, show_default=True, help="Path cap for --kind paths.")
@click.option("--max-path-len", default=16, show_default=True, help="Length cap for --kind paths.")
@click.option("--lenient", is_flag=True)
def cmd_represent(input_path, kind, out, max_paths, max_path_len, lenient):
    """Emit a baseline or Prufer-derived token sequence per tree (JSONL arrays)."""
    started = time.time()
    out_path = _resolve_out(out, Path(input_path).stem + f".{kind}.jsonl")
    records, skipped = _load_corpus(input_path, lenient)

    def convert(tree):
        if kind == "sbt":
            return sbt_sequence(tree)
        if kind == "bfs":
            return bfs_sequence(tree)
        if kind == "flat":
            return flat_tokens(tree)
        if kind == "paths":
            return [list(p) for p in leaf_paths(tree, max_paths, max_path_len).paths]
        if kind == "syntactic":
            return syntactic_sequence(encode(tree))
        if kind == "encoder-input":
            return build_encoder_input(tree)
        return context_sequence(tree, encode(tree))

    written = write_jsonl(out_path, (convert(rec.tree) for rec in records))
    _write_manifest(
        out_path,
        "represent",
        inputs={"corpus": str(input_path)},
        outputs={"tokens": str(out_path)},
        options={
            "kind": kind,
            "max_paths": max_paths,
            "max_path_len": max_path_len,
            "lenient": lenient,
        },
        counts={"written": written, "skipped": skipped},
        started=started,
    )
    click.echo(f"wrote {written} {kind} sequence(s) -> {out_path}")


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


@cli.command("stats")
@click.argument("input_path", metavar="INPUT")
@click.option("--threshold", default=200, show_default=True)
@click.option("-o", "--out", help="Output JSON path.")
@click.option("--lenient", is_flag=True)
def cmd_stats(input_path, threshold, out, lenient):
    """Length statistics of each representation over an AST corpus."""
    started = time.time()
    out_path = _resolve_out(out, Path(input_path).stem + ".stats.json")
    records, skipped = _load_corpus(input_path, lenient)
    lengths: dict[str, list[int]] = {
        "prufer": [],
        "sbt": [],
        "bfs": [],
        "flat": [],
        "encoder_input": [],
    }
    for rec in records:
        tree = rec.tree
        lengths["prufer"].append(tree.n - 2)
        lengths["sbt"].append(3 * tree.n)
        lengths["bfs"].append(tree.n)
        lengths["flat"].append(len(flat_tokens(tree)))
        lengths["encoder_input"].append(len(build_encoder_input(tree)))
    report = {
        "threshold": threshold,
        "count": len(records),
        "representations": {
            name: stats(vals, threshold).to_json() for name, vals in lengths.items()
        },
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_manifest(
        out_path,
        "stats",
        inputs={"corpus": str(input_path)},
        outputs={"report": str(out_path)},
        options={"threshold": threshold, "lenient": lenient},
        counts={"trees": len(records), "skipped": skipped},
        started=started,
    )
    click.echo(json.dumps(report, sort_keys=True, indent=2))


# ---------------------------------------------------------------------------
# dataset
# ---------------------------------------------------------------------------


@cli.command("dataset")
@click.argument("input_path", metavar="INPUT")
@click.option("-o", "--out", help="Output directory.")
@click.option("--vocab-size", default=DEFAULT_VOCAB_SIZE, show_default=True)
@click.option("--prufer-max", default=DEFAULT_PRUFER_MAX, show_default=True)
@click.option("--context-max", default=DEFAULT_CONTEXT_MAX, show_default=True)
@click.option("--comment-max", default=DEFAULT_COMMENT_MAX, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--lenient", is_flag=True)
def cmd_dataset(input_path, out, vocab_size, prufer_max, context_max, comment_max, seed, lenient):
    """Split a corpus 8:1:1, build vocabularies on train, and encode all examples."""
    started = time.time()
    out_dir = Path(out) if out else _out_dir() / "dataset"
    out_dir.mkdir(parents=True, exist_ok=True)
    records, skipped = _load_corpus(input_path, lenient)
    train_recs, valid_recs, test_recs = split_corpus(records, seed)

    prufer_vocab = build_vocab((encoder_input_subtokens(r.tree) for r in train_recs), vocab_size)
    context_vocab = build_vocab((context_subtokens(r.tree) for r in train_recs), vocab_size)
    comment_vocab = build_vocab((tokenize_comment(r.comment) for r in train_recs), vocab_size)
    prufer_vocab.save(out_dir / "vocab.prufer.txt")
    context_vocab.save(out_dir / "vocab.context.txt")
    comment_vocab.save(out_dir / "vocab.comment.txt")

    limits = SequenceLimits(prufer_max=prufer_max, context_max=context_max, comment_max=comment_max)
    counts = {"skipped": skipped}
    for name, recs in (("train", train_recs), ("valid", valid_recs), ("test", test_recs)):
        encoded = (
            encode_example(r.tree, r.comment, prufer_vocab, context_vocab, comment_vocab, limits).to_json()
            for r in recs
        )
        counts[name] = write_jsonl(out_dir / f"{name}.jsonl", encoded)

    anchor = out_dir / "dataset"
    _write_manifest(
        anchor,
        "dataset",
        inputs={"corpus": str(input_path)},
        outputs={
            "dir": str(out_dir),
            "splits": ["train.jsonl", "valid.jsonl", "test.jsonl"],
            "vocabs": ["vocab.prufer.txt", "vocab.context.txt", "vocab.comment.txt"],
        },
        options={
            "vocab_size": vocab_size,
            "prufer_max": prufer_max,
            "context_max": context_max,
            "comment_max": comment_max,
            "lenient": lenient,
        },
        counts=counts,
        started=started,
        seed=seed,
    )
    click.echo(
        f"dataset -> {out_dir} (train {counts['train']}, valid {counts['valid']}, "
        f"test {counts['test']}, skipped {skipped})"
    )


def _load_examples(path: Path) -> list[EncodedExample]:
    rows = []
    for lineno, line in read_jsonl(path):
        try:
            rows.append(EncodedExample.from_json(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MalformedDocument(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise EmptyInput(f"no examples in {path}")
    return rows


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


@cli.command("train")
@click.argument("dataset_dir", metavar="DATASET_DIR")
@click.option("-o", "--out", help="Checkpoint output path.")
@click.option("--hidden", default=64, show_default=True)
@click.option("--embed", default=64, show_default=True)
@click.option("--lr", default=0.5, show_default=True)
@click.option("--lr-decay", default=0.99, show_default=True)
@click.option("--clip", default=5.0, show_default=True)
@click.option("--epochs", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--max-decode-len", default=30, show_default=True)
@click.option("--prufer-only", is_flag=True, help="Ablation: drop the context encoder.")
def cmd_train(dataset_dir, out, hidden, embed, lr, lr_decay, clip, epochs, seed, max_decode_len, prufer_only):
    """Train the dual-encoder GRU model on a prepared dataset directory."""
    started = time.time()
    dataset_dir = Path(dataset_dir)
    out_path = _resolve_out(out, "model.json")
    examples = _load_examples(dataset_dir / "train.jsonl")
    prufer_vocab = Vocabulary.load(dataset_dir / "vocab.prufer.txt")
    context_vocab = Vocabulary.load(dataset_dir / "vocab.context.txt")
    comment_vocab = Vocabulary.load(dataset_dir / "vocab.comment.txt")
    config = ModelConfig(
        prufer_vocab_size=len(prufer_vocab),
        context_vocab_size=len(context_vocab),
        target_vocab_size=len(comment_vocab),
        hidden_dim=hidden,
        embed_dim=embed,
        max_decode_len=max_decode_len,
        learning_rate=lr,
        lr_decay=lr_decay,
        grad_clip_norm=clip,
        epochs=epochs,
        seed=seed,
        use_context=not prufer_only,
    )
    result = train(examples, config)
    save_checkpoint(out_path, result.params)
    loss_path = out_path.with_suffix(".loss.csv")
    with open(loss_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,lr,mean_loss\n")
        for epoch, rate, mean_loss in result.loss_log:
            fh.write(f"{epoch},{rate!r},{mean_loss!r}\n")
    _write_manifest(
        out_path,
        "train",
        inputs={"dataset_dir": str(dataset_dir)},
        outputs={"checkpoint": str(out_path), "loss_log": str(loss_path)},
        options={
            "hidden": hidden,
            "embed": embed,
            "lr": lr,
            "lr_decay": lr_decay,
            "clip": clip,
            "epochs": epochs,
            "max_decode_len": max_decode_len,
            "prufer_only": prufer_only,
        },
        counts={"train_examples": len(examples)},
        started=started,
        seed=seed,
    )
    final = result.loss_log[-1][2]
    click.echo(f"trained {epochs} epoch(s), final mean loss {final:.4f} -> {out_path}")


# ---------------------------------------------------------------------------
# decode
# ---------------------------------------------------------------------------


@cli.command("decode")
@click.argument("model_path", metavar="MODEL")
@click.argument("data_path", metavar="DATA")
@click.option("-o", "--out", help="Hypotheses JSONL path.")
@click.option("--refs-out", help="Also write reference token arrays here.")
@click.option("--comment-vocab", help="Comment vocabulary file (default: vocab.comment.txt beside DATA).")
@click.option("--max-len", type=int, default=None, help="Override the checkpoint decode length.")
def cmd_decode(model_path, data_path, out, refs_out, comment_vocab, max_len):
    """Greedy-decode comments for an encoded dataset file."""
    started = time.time()
    out_path = _resolve_out(out, Path(data_path).stem + ".hyp.jsonl")
    params = load_checkpoint(model_path)
    vocab_path = Path(comment_vocab) if comment_vocab else Path(data_path).parent / "vocab.comment.txt"
    vocab = Vocabulary.load(vocab_path)
    if len(vocab) != params.config.target_vocab_size:
        raise MalformedDocument(
            f"comment vocabulary size {len(vocab)} does not match checkpoint "
            f"({params.config.target_vocab_size})"
        )
    examples = _load_examples(Path(data_path))
    hyps = []
    for ex in examples:
        ids = greedy_decode(params, ex.prufer_ids, ex.context_ids, max_len)
        hyps.append(vocab.decode(ids, skip_special=False))
    written = write_jsonl(out_path, hyps)
    outputs = {"hypotheses": str(out_path)}
    if refs_out:
        write_jsonl(refs_out, (list(ex.comment_tokens) for ex in examples))
        outputs["references"] = str(refs_out)
    _write_manifest(
        out_path,
        "decode",
        inputs={"model": str(model_path), "data": str(data_path), "comment_vocab": str(vocab_path)},
        outputs=outputs,
        options={"max_len": max_len},
        counts={"decoded": written},
        started=started,
    )
    click.echo(f"decoded {written} example(s) -> {out_path}")


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------


@cli.command("score")
@click.argument("hyp_path", metavar="HYPOTHESES")
@click.argument("ref_path", metavar="REFERENCES")
@click.option("-o", "--out", help="Report JSON path.")
@click.option("--bucket-size", default=50, show_default=True, help="Length bucket width.")
@click.option("--lengths", "lengths_path", help="JSONL of per-example lengths to bucket by (default: reference lengths).")
def cmd_score(hyp_path, ref_path, out, bucket_size, lengths_path):
    """Score hypotheses against references; also reports per-length-bucket S-BLEU."""
    started = time.time()
    out_path = _resolve_out(out, "score.json")
    hyps = _read_token_jsonl(hyp_path)
    refs = _read_token_jsonl(ref_path)
    if len(hyps) != len(refs):
        raise MalformedDocument(
            f"{len(hyps)} hypotheses but {len(refs)} references"
        )
    if lengths_path:
        lengths = []
        for lineno, line in read_jsonl(lengths_path):
            try:
                lengths.append(int(json.loads(line)))
            except (json.JSONDecodeError, TypeError, ValueError) as exc:
                raise MalformedDocument(f"{lengths_path}:{lineno}: {exc}") from exc
        if len(lengths) != len(hyps):
            raise MalformedDocument("lengths file does not match corpus size")
    else:
        lengths = [len(r) for r in refs]

    report = corpus_report(hyps, refs)
    per_pair = [sentence_bleu_s4(h, r) for h, r in zip(hyps, refs)]
    buckets: dict[int, list[float]] = {}
    for score, length in zip(per_pair, lengths):
        buckets.setdefault(length // bucket_size, []).append(score)
    bucket_rows = [
        {
            "bucket_start": b * bucket_size,
            "bucket_end": (b + 1) * bucket_size,
            "count": len(vals),
            "s_bleu": sum(vals) / len(vals),
        }
        for b, vals in sorted(buckets.items())
    ]
    if len(per_pair) > 1 and np.std(per_pair) > 0 and np.std(lengths) > 0:
        correlation = float(np.corrcoef(per_pair, lengths)[0, 1])
    else:
        correlation = None
    payload = {
        "scores": report.to_json(),
        "buckets": bucket_rows,
        "length_score_correlation": correlation,
        "bucket_size": bucket_size,
        "pairs": len(hyps),
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_manifest(
        out_path,
        "score",
        inputs={"hypotheses": str(hyp_path), "references": str(ref_path), "lengths": lengths_path},
        outputs={"report": str(out_path)},
        options={"bucket_size": bucket_size},
        counts={"pairs": len(hyps)},
        started=started,
    )
    click.echo(json.dumps(payload["scores"], sort_keys=True, indent=2))


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except (PruferCodeError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(2)
    return 0


if __name__ == "__main__":
    main()
