"""Competing sequential AST representations used for comparisons.

All four are pure functions of a LabeledTree:

  * sbt_sequence: bracketed depth-first traversal, exactly 3n tokens;
  * bfs_sequence: level-order labels, exactly n tokens;
  * flat_tokens: leaf labels in source order (the "no structure" baseline);
  * leaf_paths: label sequences along the tree path between every pair of
    leaves, which grows cubically in code length without caps.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .tree import LabeledTree, TokenRole


@dataclass(frozen=True)
class PathSample:
    paths: tuple[tuple[str, ...], ...]
    max_paths: int
    max_path_len: int


def sbt_sequence(tree: LabeledTree) -> list[str]:
    """Bracketed pre-order emission: '(', label, subtrees..., ')' per node."""
    out: list[str] = []
    stack: list[tuple[int, bool]] = [(1, False)]
    while stack:
        node_id, closing = stack.pop()
        if closing:
            out.append(")")
            continue
        node = tree.nodes[node_id - 1]
        out.append("(")
        out.append(node.label)
        stack.append((node_id, True))
        for child in reversed(node.children):
            stack.append((child, False))
    return out


def bfs_sequence(tree: LabeledTree) -> list[str]:
    """Level-order labels starting at the root, siblings in canonical order."""
    out: list[str] = []
    queue: deque[int] = deque([1])
    while queue:
        node = tree.nodes[queue.popleft() - 1]
        out.append(node.label)
        queue.extend(node.children)
    return out


def flat_tokens(tree: LabeledTree) -> list[str]:
    """Leaf labels in ascending canonical-id order, approximating source order."""
    return [tree.nodes[i - 1].label for i in tree.leaves()]


def leaf_paths(tree: LabeledTree, max_paths: int, max_path_len: int) -> PathSample:
    """Label sequences along the unique path between each unordered leaf pair.

    Pairs are enumerated in lexicographic id order; paths longer than
    max_path_len are skipped; enumeration stops once max_paths are collected.
    """
    leaves = tree.leaves()
    depth = _depths(tree)
    paths: list[tuple[str, ...]] = []
    for ai in range(len(leaves)):
        if len(paths) >= max_paths:
            break
        for bi in range(ai + 1, len(leaves)):
            if len(paths) >= max_paths:
                break
            path = _path_labels(tree, depth, leaves[ai], leaves[bi])
            if len(path) <= max_path_len:
                paths.append(tuple(path))
    return PathSample(paths=tuple(paths), max_paths=max_paths, max_path_len=max_path_len)


def _depths(tree: LabeledTree) -> list[int]:
    depth = [0] * (tree.n + 1)
    for node in tree.nodes:  # parents precede children in id order
        for child in node.children:
            depth[child] = depth[node.id] + 1
    return depth


def _path_labels(tree: LabeledTree, depth: list[int], a: int, b: int) -> list[str]:
    """Labels along the a..b path: climb the deeper endpoint until the walks meet."""
    up_a: list[int] = [a]
    up_b: list[int] = [b]
    while a != b:
        if depth[a] >= depth[b]:
            a = tree.parent(a)
            up_a.append(a)
        else:
            b = tree.parent(b)
            up_b.append(b)
    up_a.pop()  # the meeting node would otherwise appear twice
    return [tree.nodes[i - 1].label for i in up_a] + [
        tree.nodes[i - 1].label for i in reversed(up_b)
    ]
