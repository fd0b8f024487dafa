import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prufercode import (
    Vocabulary,
    build_vocab,
    encode_example,
    split_corpus,
    split_identifier,
    stats,
    tokenize_comment,
)
from prufercode.errors import EmptyInput, TooFewExamples
from prufercode.pipeline import (
    EOS,
    PAD,
    START,
    UNK,
    RESERVED_TOKENS,
    SequenceLimits,
)

from conftest import random_parent_tree


def test_tokenize_comment_basic():
    assert tokenize_comment("Merges error into output.") == ["merges", "error", "into", "output"]
    assert tokenize_comment("") == []
    assert tokenize_comment("A  B") == ["a", "b"]


def test_tokenize_comment_drops_punctuation():
    assert tokenize_comment("re-use (see: foo#bar)!") == ["re", "use", "see", "foo", "bar"]


def test_split_identifier():
    assert split_identifier("mergeErrorIntoOutput") == ["merge", "error", "into", "output"]
    assert split_identifier("x") == ["x"]
    assert split_identifier("HTTP_server") == ["http", "server"]
    assert split_identifier("parseHTTPResponse2") == ["parse", "http", "response", "2"]
    assert split_identifier("__") == ["__"]  # no alphanumeric pieces: kept whole


def test_build_vocab_basic():
    vocab = build_vocab([["a", "a", "b"]], cap=6)
    assert [vocab.token_of(i) for i in range(6)] == list(RESERVED_TOKENS) + ["a", "b"]
    assert vocab.id_of("a") == 4


def test_build_vocab_cap_eviction():
    vocab = build_vocab([["a", "a", "b", "c"]], cap=5)
    assert len(vocab) == 5
    assert vocab.id_of("c") == UNK  # evicted: b beats c lexicographically at equal count


def test_build_vocab_empty_stream():
    vocab = build_vocab([], cap=10)
    assert len(vocab) == len(RESERVED_TOKENS)


def test_build_vocab_tie_break_lexicographic():
    vocab = build_vocab([["zz", "aa"]], cap=5)
    assert vocab.id_of("aa") == 4
    assert vocab.id_of("zz") == UNK


@settings(max_examples=40, deadline=None)
@given(st.lists(st.text(alphabet="abcxyz", min_size=1, max_size=4)))
def test_vocab_lookup_total(tokens):
    vocab = build_vocab([tokens], cap=8)
    for tok in tokens + ["definitely-not-present"]:
        assert 0 <= vocab.id_of(tok) < len(vocab)


def test_vocab_file_roundtrip(tmp_path):
    vocab = build_vocab([["gamma", "beta", "beta"]], cap=10)
    path = tmp_path / "vocab.txt"
    vocab.save(path)
    again = Vocabulary.load(path)
    assert len(again) == len(vocab)
    for i in range(len(vocab)):
        assert again.token_of(i) == vocab.token_of(i)


def _vocabs_for(tree, comment):
    from prufercode.pipeline import context_subtokens, encoder_input_subtokens

    return (
        build_vocab([encoder_input_subtokens(tree)], cap=100),
        build_vocab([context_subtokens(tree)], cap=100),
        build_vocab([tokenize_comment(comment)], cap=100),
    )


def test_encode_example_five_node(five_node_tree):
    pv, cv, mv = _vocabs_for(five_node_tree, "returns foo")
    ex = encode_example(five_node_tree, "returns foo", pv, cv, mv)
    assert len(ex.prufer_ids) == 6
    assert ex.comment_ids == (START, mv.id_of("returns"), mv.id_of("foo"), EOS)
    assert ex.comment_tokens == ("returns", "foo")
    assert mv.decode(ex.comment_ids) == ["returns", "foo"]


def test_encode_example_truncates_comment(five_node_tree):
    pv, cv, mv = _vocabs_for(five_node_tree, "w")
    long_comment = " ".join(f"w{i}" for i in range(40))
    ex = encode_example(five_node_tree, long_comment, pv, cv, mv)
    assert len(ex.comment_ids) == 30 + 2
    assert ex.comment_ids[0] == START and ex.comment_ids[-1] == EOS


def test_encode_example_empty_context():
    from prufercode import parse_tree

    # empty Prufer sequence (n=2): nothing to expand, context is empty
    tree = parse_tree({"label": "A", "children": [{"label": "d", "children": []}]})
    pv, cv, mv = _vocabs_for(tree, "x")
    ex = encode_example(tree, "x", pv, cv, mv)
    assert ex.context_ids == ()


def test_encode_example_truncates_sides(five_node_tree):
    pv, cv, mv = _vocabs_for(five_node_tree, "returns foo")
    limits = SequenceLimits(prufer_max=2, context_max=3, comment_max=30)
    ex = encode_example(five_node_tree, "returns foo", pv, cv, mv, limits)
    assert len(ex.prufer_ids) == 2
    assert len(ex.context_ids) == 3


def test_encode_example_unk_fallback(five_node_tree):
    pv, cv, mv = _vocabs_for(five_node_tree, "alpha")
    ex = encode_example(five_node_tree, "unseen words", pv, cv, mv)
    assert ex.comment_ids == (START, UNK, UNK, EOS)


def test_split_sizes_ten():
    train, valid, test = split_corpus(list(range(10)), seed=0)
    assert (len(train), len(valid), len(test)) == (8, 1, 1)


def test_split_sizes_105():
    train, valid, test = split_corpus(list(range(105)), seed=3)
    assert (len(train), len(valid), len(test)) == (85, 10, 10)


def test_split_deterministic_and_partition():
    data = list(range(37))
    a = split_corpus(data, seed=9)
    b = split_corpus(data, seed=9)
    assert a == b
    merged = sorted(a[0] + a[1] + a[2])
    assert merged == data
    c = split_corpus(data, seed=10)
    assert c != a  # different seed reshuffles (overwhelmingly likely)


def test_split_too_few():
    with pytest.raises(TooFewExamples):
        split_corpus(list(range(9)), seed=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=10, max_value=400))
def test_split_proportions_within_one(n):
    train, valid, test = split_corpus(list(range(n)), seed=1)
    assert abs(len(valid) - n / 10) < 1
    assert abs(len(test) - n / 10) < 1
    assert len(train) + len(valid) + len(test) == n


def test_stats_basic():
    s = stats([1, 2, 2, 5], threshold=3)
    assert (s.average, s.mode, s.median, s.pct_under_threshold) == (2.5, 2, 2.0, 75.0)


def test_stats_single():
    s = stats([7], threshold=200)
    assert (s.average, s.mode, s.median, s.pct_under_threshold) == (7.0, 7, 7.0, 100.0)


def test_stats_mode_tie_and_even_median():
    s = stats([1, 1, 2, 2], threshold=2)
    assert s.mode == 1
    assert s.median == 1.5
    assert s.pct_under_threshold == 50.0


def test_stats_empty():
    with pytest.raises(EmptyInput):
        stats([], threshold=5)


def test_average_length_identities_on_synthetic_corpus():
    from prufercode import bfs_sequence, encode, sbt_sequence

    rng = np.random.default_rng(23)
    trees = [random_parent_tree(rng, int(rng.integers(2, 30))) for _ in range(50)]
    mean_n = float(np.mean([t.n for t in trees]))
    prufer_avg = stats([len(encode(t).sequence) for t in trees], 200).average
    sbt_avg = stats([len(sbt_sequence(t)) for t in trees], 200).average
    bfs_avg = stats([len(bfs_sequence(t)) for t in trees], 200).average
    assert prufer_avg == pytest.approx(mean_n - 2, abs=1e-12)
    assert sbt_avg == pytest.approx(3 * mean_n, abs=1e-9)
    assert bfs_avg == pytest.approx(mean_n, abs=1e-12)
