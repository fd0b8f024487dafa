"""Prufer-sequence representations of ASTs for code summarization."""

from .baselines import PathSample, bfs_sequence, flat_tokens, leaf_paths, sbt_sequence
from .kernels import LANE, NUMBA_ENABLED
from .metrics import ScoreReport, corpus_bleu, corpus_report, meteor, rouge_l, sentence_bleu_s4
from .model import (
    ModelConfig,
    ModelParams,
    TrainResult,
    evaluate,
    greedy_decode,
    load_checkpoint,
    loss_and_gradients,
    save_checkpoint,
    token_accuracy,
    train,
)
from .pipeline import (
    CorpusStats,
    EncodedExample,
    SequenceLimits,
    Vocabulary,
    build_vocab,
    encode_example,
    split_corpus,
    split_identifier,
    stats,
    tokenize_comment,
)
from .prufer import (
    PruferCode,
    build_encoder_input,
    context_sequence,
    decode,
    encode,
    syntactic_sequence,
)
from .tree import LabeledTree, Node, TokenRole, parse_tree, tree_from_parents

__version__ = "0.1.0"

__all__ = [
    "LANE",
    "NUMBA_ENABLED",
    "LabeledTree",
    "Node",
    "TokenRole",
    "parse_tree",
    "tree_from_parents",
    "PruferCode",
    "encode",
    "decode",
    "syntactic_sequence",
    "build_encoder_input",
    "context_sequence",
    "PathSample",
    "sbt_sequence",
    "bfs_sequence",
    "flat_tokens",
    "leaf_paths",
    "Vocabulary",
    "build_vocab",
    "tokenize_comment",
    "split_identifier",
    "encode_example",
    "split_corpus",
    "stats",
    "CorpusStats",
    "EncodedExample",
    "SequenceLimits",
    "ScoreReport",
    "sentence_bleu_s4",
    "corpus_bleu",
    "meteor",
    "rouge_l",
    "corpus_report",
    "ModelConfig",
    "ModelParams",
    "TrainResult",
    "train",
    "evaluate",
    "token_accuracy",
    "greedy_decode",
    "loss_and_gradients",
    "save_checkpoint",
    "load_checkpoint",
    "__version__",
]
