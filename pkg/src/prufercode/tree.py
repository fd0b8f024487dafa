"""Ordered labeled trees: the universal AST form used by every other module.

Trees are ingested from a language-neutral nested JSON schema
(``{"label": str, "children": [...]}``) and carry canonical ids assigned by a
pre-order depth-first walk: the root is 1, every child id exceeds its parent
id, and siblings have increasing ids in source order.  Canonical ids double as
the node labels of the Prufer codec, which is why they must be unique even
when token labels repeat.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import IdOutOfRange, MalformedDocument, NotATree, TooSmall


class TokenRole(Enum):
    """Role of a node label: leaves carry lexical tokens, internal nodes syntactic ones."""

    LEXICAL = "lex"
    SYNTACTIC = "syn"


@dataclass(frozen=True)
class Node:
    id: int
    label: str
    role: TokenRole
    children: tuple[int, ...]


class LabeledTree:
    """Immutable ordered rooted tree with canonical integer ids.

    Construction validates tree-ness (single root, every non-root node has
    exactly one parent, connected) and recomputes roles structurally, so the
    role invariant -- lexical iff leaf -- holds by construction.
    """

    __slots__ = ("nodes", "_parents")

    def __init__(self, labels: Sequence[str], children: Sequence[Sequence[int]]):
        n = len(labels)
        if n < 1:
            raise NotATree("tree must have at least one node")
        if len(children) != n:
            raise NotATree("labels and children tables differ in length")

        parents = np.zeros(n + 1, dtype=np.int64)
        seen_as_child = np.zeros(n + 1, dtype=bool)
        for pid, kids in enumerate(children, start=1):
            for cid in kids:
                if not (1 <= cid <= n):
                    raise NotATree(f"child id {cid} out of range 1..{n}")
                if cid == 1:
                    raise NotATree("root referenced as a child")
                if seen_as_child[cid]:
                    raise NotATree(f"node {cid} has two parents")
                seen_as_child[cid] = True
                parents[cid] = pid
        if not seen_as_child[2:].all():
            orphan = int(np.nonzero(~seen_as_child[2:])[0][0]) + 2
            raise NotATree(f"node {orphan} has no parent")
        # One parent each and n-1 edges still admits a cycle detached from
        # the root, so reachability must be checked explicitly.
        reached = 1
        queue = [1]
        while queue:
            nid = queue.pop()
            kids = children[nid - 1]
            reached += len(kids)
            queue.extend(kids)
        if reached != n:
            raise NotATree("graph contains a cycle detached from the root")

        nodes = []
        for i, (label, kids) in enumerate(zip(labels, children), start=1):
            role = TokenRole.SYNTACTIC if kids else TokenRole.LEXICAL
            nodes.append(Node(id=i, label=str(label), role=role, children=tuple(kids)))
        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "_parents", parents)
        self._parents.setflags(write=False)

    # -- basic queries --------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def root_id(self) -> int:
        return 1

    @property
    def parents(self) -> np.ndarray:
        """Read-only parent array, 1-indexed; parents[1] == 0."""
        return self._parents

    def node(self, node_id: int) -> Node:
        self._check_id(node_id)
        return self.nodes[node_id - 1]

    def parent(self, node_id: int) -> int:
        """Parent id, or 0 for the root."""
        self._check_id(node_id)
        return int(self._parents[node_id])

    def degree(self, node_id: int) -> int:
        """Undirected degree in the tree skeleton: child count plus one unless root."""
        node = self.node(node_id)
        return len(node.children) + (0 if node_id == 1 else 1)

    def leaf_children(self, node_id: int) -> list[str]:
        """Lexical labels of this node's leaf children, in sibling order."""
        node = self.node(node_id)
        return [
            self.nodes[c - 1].label
            for c in node.children
            if self.nodes[c - 1].role is TokenRole.LEXICAL
        ]

    def leaves(self) -> list[int]:
        """Ids of all lexical (leaf) nodes in ascending id order."""
        return [nd.id for nd in self.nodes if nd.role is TokenRole.LEXICAL]

    def _check_id(self, node_id: int) -> None:
        if not (1 <= node_id <= self.n):
            raise IdOutOfRange(f"node id {node_id} outside 1..{self.n}")

    # -- serialization --------------------------------------------------------

    def to_ast_json(self) -> dict:
        """Nested ``{"label", "children"}`` object; inverse of parse_tree."""
        out: list[dict] = [None] * (self.n + 1)  # type: ignore[list-item]
        for nd in reversed(self.nodes):  # children always have larger ids
            out[nd.id] = {"label": nd.label, "children": [out[c] for c in nd.children]}
        return out[1]

    # -- comparison -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledTree):
            return NotImplemented
        return self.nodes == other.nodes

    def __hash__(self) -> int:
        return hash(self.nodes)

    def __repr__(self) -> str:
        return f"LabeledTree(n={self.n}, root={self.nodes[0].label!r})"


def parse_tree(document: bytes | str | dict) -> LabeledTree:
    """Parse an AST-JSON document into a LabeledTree with canonical pre-order ids.

    Roles present in the input are ignored and recomputed from leaf/internal
    status.  Raises MalformedDocument for syntax/schema errors, NotATree when
    the same node object appears twice (shared child or cycle), and TooSmall
    for single-node documents.
    """
    if isinstance(document, (bytes, str)):
        try:
            obj = json.loads(document)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"invalid JSON: {exc}") from exc
    else:
        obj = document
    if not isinstance(obj, dict):
        raise MalformedDocument("AST-JSON root must be an object")

    labels: list[str] = []
    children_ids: list[list[int]] = []
    visited: set[int] = set()
    # Stack holds (node_obj, parent_index); children pushed in reverse so the
    # walk assigns increasing ids in source sibling order.
    stack: list[tuple[dict, int]] = [(obj, 0)]
    while stack:
        node, parent_idx = stack.pop()
        if not isinstance(node, dict):
            raise MalformedDocument(f"node must be an object, got {type(node).__name__}")
        if id(node) in visited:
            raise NotATree("node object reachable by two paths (shared child or cycle)")
        visited.add(id(node))
        label = node.get("label")
        kids = node.get("children")
        if not isinstance(label, str):
            raise MalformedDocument("node missing string 'label'")
        if not isinstance(kids, list):
            raise MalformedDocument("node missing list 'children'")
        labels.append(label)
        children_ids.append([])
        my_idx = len(labels)
        if parent_idx:
            children_ids[parent_idx - 1].append(my_idx)
        for kid in reversed(kids):
            stack.append((kid, my_idx))

    if len(labels) < 2:
        raise TooSmall(f"tree has {len(labels)} node(s); at least 2 required")
    return LabeledTree(labels, children_ids)


def tree_from_parents(parents: Iterable[int], labels: Sequence[str]) -> LabeledTree:
    """Build a tree from a 1-indexed parent table (parents[0] ignored, parents[1] == 0).

    Children are attached in ascending id order, the sibling order every
    canonically numbered tree has.
    """
    par = list(parents)
    n = len(labels)
    children: list[list[int]] = [[] for _ in range(n)]
    for cid in range(2, n + 1):
        pid = int(par[cid])
        if not (1 <= pid <= n):
            raise NotATree(f"parent of node {cid} out of range")
        children[pid - 1].append(cid)
    return LabeledTree(labels, children)
