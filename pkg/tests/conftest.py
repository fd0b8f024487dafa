"""Shared builders: canonical example trees, random trees, toy corpora."""

from __future__ import annotations

import json
from functools import lru_cache

import numpy as np
import pytest

from prufercode import (
    EncodedExample,
    LabeledTree,
    SequenceLimits,
    build_vocab,
    encode_example,
    parse_tree,
    tree_from_parents,
)
from prufercode.pipeline import context_subtokens, encoder_input_subtokens, tokenize_comment

# The worked 5-node example used throughout: pre-order ids 1:A 2:B 3:x 4:y 5:foo,
# edges (1,2),(2,3),(2,4),(1,5).
FIVE_NODE_DOC = {
    "label": "A",
    "children": [
        {
            "label": "B",
            "children": [
                {"label": "x", "children": []},
                {"label": "y", "children": []},
            ],
        },
        {"label": "foo", "children": []},
    ],
}


@pytest.fixture
def five_node_tree() -> LabeledTree:
    return parse_tree(json.dumps(FIVE_NODE_DOC))


def path_tree(labels=("A", "B", "C")) -> LabeledTree:
    """A path rooted at the first label: 1-2-...-n."""
    n = len(labels)
    return tree_from_parents([0, 0] + list(range(1, n)), list(labels))


def star_tree(center="R", leaves=("l2", "l3", "l4")) -> LabeledTree:
    return tree_from_parents([0, 0] + [1] * len(leaves), [center] + list(leaves))


_LABEL_POOL = ("Block", "Call", "Stmt", "Block", "name", "tmp", "x0", "value", "Call")


def random_parent_tree(rng: np.random.Generator, n: int, pool=_LABEL_POOL) -> LabeledTree:
    """Random tree via parent[i] ~ U{1..i-1}; sibling order is ascending id."""
    parents = [0, 0] + [int(rng.integers(1, i)) for i in range(2, n + 1)]
    labels = [pool[int(k)] for k in rng.integers(0, len(pool), n)]
    return tree_from_parents(parents, labels)


def random_canonical_tree(rng: np.random.Generator, n: int, pool=_LABEL_POOL) -> LabeledTree:
    """Random tree with true pre-order canonical ids (re-parsed from nested form)."""
    return parse_tree(random_parent_tree(rng, n, pool).to_ast_json())


@lru_cache(maxsize=None)
def ordered_shapes(n: int) -> tuple:
    """Every ordered rooted tree shape on n nodes (Catalan(n-1) many).

    A shape is a nested tuple of child shapes.
    """
    if n == 1:
        return ((),)
    out = []
    for first in range(1, n):
        for head in ordered_shapes(first):
            for tail in ordered_shapes(n - first):
                # tail is reinterpreted as the shape made of the remaining
                # children: stitch head in front of tail's child list
                out.append((head,) + tail)
    return tuple(out)


def shape_to_tree(shape, label_pool=_LABEL_POOL) -> LabeledTree:
    """Materialize a shape with pre-order ids and cyclic (repeating) labels."""
    labels: list[str] = []
    children: list[list[int]] = []

    def walk(node_shape) -> int:
        my_id = len(labels) + 1
        labels.append(label_pool[(my_id - 1) % len(label_pool)])
        children.append([])
        for child_shape in node_shape:
            cid = walk(child_shape)
            children[my_id - 1].append(cid)
        return my_id

    walk(shape)
    return LabeledTree(labels, children)


def all_canonical_trees(n: int):
    """All pre-order-labeled ordered trees on n nodes."""
    return [shape_to_tree(s) for s in ordered_shapes(n)]


# ---------------------------------------------------------------------------
# Toy corpora for model training tests
# ---------------------------------------------------------------------------

_NAMES = [
    "merge", "error", "output", "stream", "count", "index", "buffer", "cache",
    "token", "node", "parse", "value", "reset", "close", "open", "flush",
    "read", "write", "sort", "copy", "hash", "size", "path", "file",
]
_SYNTAX = ["Method", "Block", "Call", "Return", "Param", "Assign"]


def _random_ast(rng: np.random.Generator, n: int) -> dict:
    tree = random_parent_tree(rng, n, pool=_SYNTAX + _NAMES)
    # relabel: internal nodes get syntax names, leaves get identifier names
    def build(node_id: int) -> dict:
        node = tree.nodes[node_id - 1]
        if node.children:
            label = _SYNTAX[int(rng.integers(0, len(_SYNTAX)))]
            return {"label": label, "children": [build(c) for c in node.children]}
        return {"label": _NAMES[int(rng.integers(0, len(_NAMES)))], "children": []}

    return build(1)


def make_overfit_corpus(n_examples: int = 50, seed: int = 0):
    """Distinct (tree, comment) pairs for memorization runs.

    Returns (examples, vocab sizes) where examples are EncodedExamples built
    with small dedicated vocabularies.
    """
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_examples):
        tree = parse_tree(_random_ast(rng, int(rng.integers(5, 11))))
        words = [_NAMES[int(k)] for k in rng.choice(len(_NAMES), size=3, replace=False)]
        pairs.append((tree, " ".join(words)))
    return _encode_pairs(pairs)


def make_context_signal_corpus(n_examples: int, seed: int):
    """Synthetic corpus whose comments name the leaf children of the
    highest-degree node.

    The hub node carries 3 named leaves plus extra internal children so its
    degree dominates; distractor leaves hang elsewhere.  Hub position among
    the root's children varies, so the flat leaf order alone does not give
    the answer away.
    """
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_examples):
        names = [_NAMES[int(k)] for k in rng.choice(len(_NAMES), size=3, replace=False)]
        distract = [_NAMES[int(k)] for k in rng.choice(len(_NAMES), size=3, replace=False)]
        hub = {
            "label": "Hub",
            "children": [{"label": w, "children": []} for w in names]
            + [
                {"label": "Pad", "children": [{"label": distract[2], "children": []}]},
                {"label": "Pad", "children": [{"label": "end", "children": []}]},
            ],
        }
        box = {
            "label": "Box",
            "children": [{"label": w, "children": []} for w in distract[:2]],
        }
        kids = [hub, box] if rng.integers(0, 2) == 0 else [box, hub]
        kids.append({"label": distract[0], "children": []})
        pairs.append((parse_tree({"label": "Method", "children": kids}), " ".join(names)))
    return _encode_pairs(pairs)


def _encode_pairs(pairs):
    prufer_vocab = build_vocab((encoder_input_subtokens(t) for t, _ in pairs), cap=500)
    context_vocab = build_vocab((context_subtokens(t) for t, _ in pairs), cap=500)
    comment_vocab = build_vocab((tokenize_comment(c) for _, c in pairs), cap=500)
    limits = SequenceLimits(prufer_max=64, context_max=64, comment_max=10)
    examples = [
        encode_example(t, c, prufer_vocab, context_vocab, comment_vocab, limits)
        for t, c in pairs
    ]
    sizes = (len(prufer_vocab), len(context_vocab), len(comment_vocab))
    return examples, sizes, (prufer_vocab, context_vocab, comment_vocab)
