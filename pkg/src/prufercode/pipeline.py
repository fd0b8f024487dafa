"""Corpus pipeline: tokenization, vocabularies, id encoding, splits, statistics.

Turns (AST, comment) pairs into training-ready integer sequences.  Three
separate vocabularies are built (encoder input, context, comments), each
capped with four reserved ids: PAD=0, START=1, EOS=2, UNK=3.  Identifier
subtokenization (camelCase / underscores) is applied to lexical tokens only;
syntactic tokens are grammar names and stay whole.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptyInput, MalformedDocument, TooFewExamples
from .prufer import context_sequence, encode, syntactic_sequence
from .tree import LabeledTree

PAD, START, EOS, UNK = 0, 1, 2, 3
PAD_TOKEN, START_TOKEN, EOS_TOKEN, UNK_TOKEN = "<PAD>", "<START>", "<EOS>", "<UNK>"
RESERVED_TOKENS = (PAD_TOKEN, START_TOKEN, EOS_TOKEN, UNK_TOKEN)

DEFAULT_PRUFER_MAX = 200
DEFAULT_CONTEXT_MAX = 500
DEFAULT_COMMENT_MAX = 30
DEFAULT_VOCAB_SIZE = 30000

_WORD_RE = re.compile(r"[a-z0-9]+")
_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")


def tokenize_comment(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation; punctuation is dropped."""
    return _WORD_RE.findall(text.lower())


def split_identifier(token: str) -> list[str]:
    """Split camelCase and snake_case identifiers into lowercase subtokens."""
    parts: list[str] = []
    for piece in token.split("_"):
        parts.extend(m.group(0).lower() for m in _CAMEL_RE.finditer(piece))
    return parts if parts else [token.lower()]


class Vocabulary:
    """Capped token<->id map; lookups never fail (unknown tokens map to UNK)."""

    def __init__(self, tokens: Sequence[str]):
        self._id_to_token = list(RESERVED_TOKENS) + list(tokens)
        self._token_to_id = {tok: i for i, tok in enumerate(self._id_to_token)}
        if len(self._token_to_id) != len(self._id_to_token):
            raise ValueError("duplicate token in vocabulary")

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def id_of(self, token: str) -> int:
        return self._token_to_id.get(token, UNK)

    def token_of(self, idx: int) -> str:
        return self._id_to_token[idx]

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.id_of(t) for t in tokens]

    def decode(self, ids: Iterable[int], skip_special: bool = True) -> list[str]:
        toks = [self._id_to_token[i] for i in ids]
        if skip_special:
            toks = [t for t in toks if t not in RESERVED_TOKENS]
        return toks

    def save(self, path: str | Path) -> None:
        """One non-reserved token per line; line k (0-based) holds id k+4."""
        with open(path, "w", encoding="utf-8") as fh:
            for tok in self._id_to_token[len(RESERVED_TOKENS):]:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
        return cls(tokens)


def build_vocab(token_streams: Iterable[Iterable[str]], cap: int = DEFAULT_VOCAB_SIZE) -> Vocabulary:
    """Frequency-ranked vocabulary (ties broken lexicographically), reserved ids first."""
    if cap < len(RESERVED_TOKENS) + 1:
        raise ValueError(f"cap must be at least {len(RESERVED_TOKENS) + 1}")
    counts: Counter[str] = Counter()
    for stream in token_streams:
        counts.update(stream)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = [tok for tok, _ in ranked[: cap - len(RESERVED_TOKENS)]]
    return Vocabulary(keep)


@dataclass(frozen=True)
class EncodedExample:
    prufer_ids: tuple[int, ...]
    context_ids: tuple[int, ...]
    comment_ids: tuple[int, ...]
    comment_tokens: tuple[str, ...]  # truncated surface tokens, kept for scoring

    def to_json(self) -> dict:
        return {
            "prufer_ids": list(self.prufer_ids),
            "context_ids": list(self.context_ids),
            "comment_ids": list(self.comment_ids),
            "comment_tokens": list(self.comment_tokens),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EncodedExample":
        return cls(
            prufer_ids=tuple(int(x) for x in obj["prufer_ids"]),
            context_ids=tuple(int(x) for x in obj["context_ids"]),
            comment_ids=tuple(int(x) for x in obj["comment_ids"]),
            comment_tokens=tuple(str(t) for t in obj.get("comment_tokens", [])),
        )


@dataclass(frozen=True)
class SequenceLimits:
    prufer_max: int = DEFAULT_PRUFER_MAX
    context_max: int = DEFAULT_CONTEXT_MAX
    comment_max: int = DEFAULT_COMMENT_MAX


def encoder_input_subtokens(tree: LabeledTree) -> list[str]:
    """Encoder-input tokens with lexical tokens split into identifier subtokens."""
    code = encode(tree)
    tokens = syntactic_sequence(code)
    for leaf in tree.leaves():
        tokens.extend(split_identifier(tree.nodes[leaf - 1].label))
    return tokens


def context_subtokens(tree: LabeledTree) -> list[str]:
    """Context-sequence tokens split into identifier subtokens."""
    out: list[str] = []
    for tok in context_sequence(tree, encode(tree)):
        out.extend(split_identifier(tok))
    return out


def encode_example(
    tree: LabeledTree,
    comment: str,
    prufer_vocab: Vocabulary,
    context_vocab: Vocabulary,
    comment_vocab: Vocabulary,
    limits: SequenceLimits = SequenceLimits(),
) -> EncodedExample:
    """Map one (tree, comment) pair to truncated id sequences.

    The comment side is START + tokens (truncated to comment_max) + EOS; both
    encoder sides are truncated to their limits after subtokenization.
    """
    prufer_side = encoder_input_subtokens(tree)[: limits.prufer_max]
    context_side = context_subtokens(tree)[: limits.context_max]
    words = tokenize_comment(comment)[: limits.comment_max]
    return EncodedExample(
        prufer_ids=tuple(prufer_vocab.encode(prufer_side)),
        context_ids=tuple(context_vocab.encode(context_side)),
        comment_ids=tuple([START] + comment_vocab.encode(words) + [EOS]),
        comment_tokens=tuple(words),
    )


def split_corpus(examples: Sequence, seed: int) -> tuple[list, list, list]:
    """Deterministic seeded shuffle, then an 8:1:1 train/valid/test split by count."""
    if len(examples) < 10:
        raise TooFewExamples(f"need at least 10 examples, got {len(examples)}")
    order = np.random.default_rng(seed).permutation(len(examples))
    n_valid = len(examples) // 10
    n_test = len(examples) // 10
    shuffled = [examples[i] for i in order]
    train = shuffled[: len(examples) - n_valid - n_test]
    valid = shuffled[len(train): len(train) + n_valid]
    test = shuffled[len(train) + n_valid:]
    return train, valid, test


@dataclass(frozen=True)
class CorpusStats:
    average: float
    mode: int
    median: float
    pct_under_threshold: float
    threshold: int

    def to_json(self) -> dict:
        return {
            "average": self.average,
            "mode": self.mode,
            "median": self.median,
            "pct_under_threshold": self.pct_under_threshold,
            "threshold": self.threshold,
        }


def stats(lengths: Sequence[int], threshold: int) -> CorpusStats:
    """Average / mode (smallest on ties) / median / percent strictly under threshold."""
    if len(lengths) == 0:
        raise EmptyInput("stats over an empty length list")
    arr = np.asarray(lengths)
    counts = Counter(int(x) for x in lengths)
    best = max(counts.values())
    mode = min(v for v, c in counts.items() if c == best)
    return CorpusStats(
        average=float(arr.mean()),
        mode=mode,
        median=float(np.median(arr)),
        pct_under_threshold=float((arr < threshold).mean() * 100.0),
        threshold=threshold,
    )


# ---------------------------------------------------------------------------
# Corpus file IO
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusRecord:
    tree: LabeledTree
    comment: str
    code_tokens: tuple[str, ...]


def parse_corpus_record(line: str) -> CorpusRecord:
    """One JSONL corpus line: {"ast": node, "comment": str, "code_tokens": [...]}.

    A bare AST node object (with a "label" key) is also accepted, with an
    empty comment.
    """
    from .tree import parse_tree  # local import keeps module load light

    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON line: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedDocument("corpus line must be a JSON object")
    if "ast" in obj:
        ast = obj["ast"]
        comment = obj.get("comment", "")
        code_tokens = obj.get("code_tokens", [])
    elif "label" in obj:
        ast, comment, code_tokens = obj, "", []
    else:
        raise MalformedDocument("corpus line needs an 'ast' (or bare node) object")
    if not isinstance(comment, str) or not isinstance(code_tokens, list):
        raise MalformedDocument("bad 'comment' or 'code_tokens' field")
    return CorpusRecord(
        tree=parse_tree(ast),
        comment=comment,
        code_tokens=tuple(str(t) for t in code_tokens),
    )


def read_jsonl(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, stripped line) for non-blank lines."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                yield lineno, line


def write_jsonl(path: str | Path, objects: Iterable) -> int:
    """Write one compact JSON object per line; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objects:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
            count += 1
    return count
