"""Lossless Prufer codec for labeled trees, plus the model-input sequences.

The integer Prufer sequence of an n-node tree has length n-2 and, together
with the node count and the id->label table, reconstructs the tree exactly --
including sibling order, because canonical ids make ascending-id order the
sibling order.  Three derived token sequences feed the learning model:

  * syntactic sequence: the Prufer sequence with ids replaced by their
    (always syntactic) token labels;
  * encoder input: the syntactic sequence followed by all leaf tokens in
    source order, never longer than 2n-3;
  * context sequence: for each Prufer position, the leaf-child tokens of that
    position's node, so a token's frequency equals degree(parent) - 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CodeMismatch, InvalidCode, TooSmall
from .kernels import prufer_decode_kernel, prufer_encode_kernel
from .tree import LabeledTree, TokenRole, tree_from_parents


@dataclass(frozen=True)
class PruferCode:
    """Lossless record: integer sequence + node count + id->(token, role) table."""

    sequence: tuple[int, ...]
    n: int
    labels: tuple[tuple[str, TokenRole], ...]  # index = id - 1

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "sequence": list(self.sequence),
            "labels": [
                {"id": i + 1, "token": token, "role": role.value}
                for i, (token, role) in enumerate(self.labels)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PruferCode":
        try:
            n = int(obj["n"])
            sequence = tuple(int(x) for x in obj["sequence"])
            entries = obj["labels"]
            table: list[tuple[str, TokenRole] | None] = [None] * n
            for entry in entries:
                i = int(entry["id"])
                if not (1 <= i <= n) or table[i - 1] is not None:
                    raise InvalidCode(f"bad or duplicate label id {i}")
                table[i - 1] = (str(entry["token"]), TokenRole(entry["role"]))
        except InvalidCode:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidCode(f"malformed Prufer code record: {exc}") from exc
        if any(t is None for t in table):
            raise InvalidCode("labels table does not cover 1..n")
        code = cls(sequence=sequence, n=n, labels=tuple(table))  # type: ignore[arg-type]
        _validate(code)
        return code


def _validate(code: PruferCode) -> None:
    if code.n < 2:
        raise InvalidCode(f"node count {code.n} < 2")
    if len(code.sequence) != code.n - 2:
        raise InvalidCode(
            f"sequence length {len(code.sequence)} != n-2 = {code.n - 2}"
        )
    if len(code.labels) != code.n:
        raise InvalidCode(f"labels table size {len(code.labels)} != n = {code.n}")
    for x in code.sequence:
        if not (1 <= x <= code.n):
            raise InvalidCode(f"sequence id {x} outside 1..{code.n}")


def encode(tree: LabeledTree) -> PruferCode:
    """Prufer-encode a tree: repeatedly delete the smallest-id leaf, record its neighbor."""
    if tree.n < 2:
        raise TooSmall("Prufer codec requires at least 2 nodes")
    seq = prufer_encode_kernel(tree.parents, tree.n)
    labels = tuple((nd.label, nd.role) for nd in tree.nodes)
    return PruferCode(sequence=tuple(int(x) for x in seq), n=tree.n, labels=labels)


def decode(code: PruferCode) -> LabeledTree:
    """Reconstruct the tree: attach smallest-id leaves to sequence heads, root at 1.

    Children come out in ascending id order, so decode(encode(T)) == T exactly
    for canonically numbered trees.  Roles are recomputed from the decoded
    topology; for codes produced by encode they match the stored table.
    """
    _validate(code)
    seq = np.asarray(code.sequence, dtype=np.int64)
    parents = prufer_decode_kernel(seq, code.n)
    return tree_from_parents(parents, [token for token, _ in code.labels])


def syntactic_sequence(code: PruferCode) -> list[str]:
    """Token labels of the Prufer sequence; leaves never appear, so all are syntactic."""
    _validate(code)
    return [code.labels[i - 1][0] for i in code.sequence]


def build_encoder_input(tree: LabeledTree) -> list[str]:
    """Syntactic sequence followed by all leaf tokens in source order (length <= 2n-3)."""
    code = encode(tree)
    tokens = syntactic_sequence(code)
    tokens.extend(tree.nodes[i - 1].label for i in tree.leaves())
    return tokens


def context_sequence(tree: LabeledTree, code: PruferCode) -> list[str]:
    """Leaf-child tokens expanded along the Prufer sequence.

    A node occurring k times contributes its leaf children k times, which
    makes every leaf token appear exactly degree(parent) - 1 times.
    """
    if code.n != tree.n or code.sequence != encode(tree).sequence:
        raise CodeMismatch("Prufer code was not derived from this tree")
    out: list[str] = []
    for i in code.sequence:
        out.extend(tree.leaf_children(i))
    return out
