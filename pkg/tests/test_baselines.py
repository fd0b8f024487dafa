import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prufercode import bfs_sequence, encode, flat_tokens, leaf_paths, sbt_sequence

from conftest import path_tree, random_parent_tree, star_tree


def test_sbt_path():
    assert sbt_sequence(path_tree()) == ["(", "A", "(", "B", "(", "C", ")", ")", ")"]


def test_sbt_single_edge():
    assert sbt_sequence(path_tree(("A", "B"))) == ["(", "A", "(", "B", ")", ")"]


def test_sbt_five_node_length(five_node_tree):
    assert len(sbt_sequence(five_node_tree)) == 15


def test_bfs_five_node(five_node_tree):
    assert bfs_sequence(five_node_tree) == ["A", "B", "foo", "x", "y"]


def test_bfs_path_and_star():
    assert bfs_sequence(path_tree()) == ["A", "B", "C"]
    assert bfs_sequence(star_tree()) == ["R", "l2", "l3", "l4"]


def test_flat_five_node(five_node_tree):
    assert flat_tokens(five_node_tree) == ["x", "y", "foo"]


def test_flat_star_and_single_leaf():
    assert flat_tokens(star_tree()) == ["l2", "l3", "l4"]
    assert flat_tokens(path_tree(("A", "b"))) == ["b"]


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=2, max_value=50), st.integers(min_value=0, max_value=2**31))
def test_length_identities(n, seed):
    tree = random_parent_tree(np.random.default_rng(seed), n)
    prufer_len = len(encode(tree).sequence)
    bfs_len = len(bfs_sequence(tree))
    sbt_len = len(sbt_sequence(tree))
    assert prufer_len == n - 2
    assert bfs_len == n
    assert sbt_len == 3 * n
    assert prufer_len < bfs_len < sbt_len


def test_leaf_paths_too_few_leaves_is_empty():
    sample = leaf_paths(path_tree(), max_paths=10, max_path_len=10)
    assert sample.paths == ()


def test_leaf_paths_five_node(five_node_tree):
    sample = leaf_paths(five_node_tree, max_paths=10, max_path_len=10)
    assert sample.paths == (
        ("x", "B", "y"),
        ("x", "B", "A", "foo"),
        ("y", "B", "A", "foo"),
    )


def test_leaf_paths_cap(five_node_tree):
    sample = leaf_paths(star_tree(), max_paths=2, max_path_len=10)
    assert sample.paths == (("l2", "R", "l3"), ("l2", "R", "l4"))


def test_leaf_paths_length_filter(five_node_tree):
    sample = leaf_paths(five_node_tree, max_paths=10, max_path_len=3)
    assert sample.paths == (("x", "B", "y"),)


def test_leaf_paths_pair_count_uncapped():
    rng = np.random.default_rng(17)
    for _ in range(20):
        tree = random_parent_tree(rng, int(rng.integers(2, 30)))
        leaves = tree.leaves()
        expected = len(leaves) * (len(leaves) - 1) // 2
        sample = leaf_paths(tree, max_paths=10**9, max_path_len=10**9)
        assert len(sample.paths) == expected


def test_leaf_paths_invariants():
    sample = leaf_paths(star_tree(), max_paths=2, max_path_len=3)
    assert len(sample.paths) <= sample.max_paths
    assert all(len(p) <= sample.max_path_len for p in sample.paths)
