"""Dual-encoder GRU sequence-to-sequence model for code summarization.

Two single-layer unidirectional GRU encoders (structure side and context
side) feed an additive-attention module per encoder; the two attention
contexts are combined through a tanh projection and concatenated with the
decoder GRU state for the output projection.  Training is teacher-forced
cross-entropy with hand-derived reverse-mode gradients, per-example SGD,
global gradient-norm clipping, and per-epoch learning-rate decay.

All parameters live in one flat float64 buffer (see ModelParams), which makes
flatten/unflatten a trivial bijection and finite-difference checking direct.
The hot passes run through ``kernels``; the functions here double as the
readable reference implementations the kernels are tested against.
"""

from __future__ import annotations

import base64
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCorpus,
    EmptyEncoderStates,
    EmptyInput,
)
from .kernels import (
    model_greedy_kernel,
    model_loss_grad_kernel,
    model_loss_kernel,
)
from .pipeline import EncodedExample, EOS, PAD, START

INIT_SCALE = 0.08  # uniform init half-width


@dataclass(frozen=True)
class ModelConfig:
    prufer_vocab_size: int
    context_vocab_size: int
    target_vocab_size: int
    hidden_dim: int = 64
    embed_dim: int = 64
    max_decode_len: int = 30
    learning_rate: float = 0.5
    lr_decay: float = 0.99
    grad_clip_norm: float = 5.0
    epochs: int = 100
    seed: int = 0
    use_context: bool = True

    def __post_init__(self):
        for name in (
            "prufer_vocab_size", "context_vocab_size", "target_vocab_size",
            "hidden_dim", "embed_dim", "learning_rate", "lr_decay",
            "grad_clip_norm", "epochs",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_decode_len < 0:
            raise ValueError("max_decode_len must be >= 0")

    @classmethod
    def paper_scale(cls, prufer_vocab_size, context_vocab_size, target_vocab_size, **kw):
        """Full-scale preset: 256-dim GRU/embeddings, lr 0.5, decay 0.99, clip 5, 60 epochs."""
        return cls(
            prufer_vocab_size=prufer_vocab_size,
            context_vocab_size=context_vocab_size,
            target_vocab_size=target_vocab_size,
            hidden_dim=256,
            embed_dim=256,
            learning_rate=0.5,
            lr_decay=0.99,
            grad_clip_norm=5.0,
            epochs=60,
            **kw,
        )


def _layout(config: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    H, E = config.hidden_dim, config.embed_dim
    gru = (3, H, E + H)
    bias = (3, H)
    entries = [("emb_p", (config.prufer_vocab_size, E))]
    if config.use_context:
        entries.append(("emb_c", (config.context_vocab_size, E)))
    entries.append(("emb_t", (config.target_vocab_size, E)))
    entries += [("Wg_p", gru), ("bg_p", bias)]
    if config.use_context:
        entries += [("Wg_c", gru), ("bg_c", bias)]
    entries += [("Wg_d", gru), ("bg_d", bias)]
    entries += [("Wa_p", (H, 2 * H)), ("va_p", (H,))]
    if config.use_context:
        entries += [("Wa_c", (H, 2 * H)), ("va_c", (H,))]
    entries.append(("Wm", (H, 2 * H if config.use_context else H)))
    entries += [("Wo", (config.target_vocab_size, 2 * H)), ("bo", (config.target_vocab_size,))]
    return entries


class ModelParams:
    """All weights in one flat float64 vector with named views.

    Every parameter occupies exactly one contiguous slice of the flat buffer,
    so ``flatten()``/``from_flat()`` round-trip bitwise and finite-difference
    perturbation of single coordinates is well-defined.
    """

    __slots__ = ("config", "flat", "_views")

    def __init__(self, config: ModelConfig, flat: np.ndarray):
        expected = sum(int(np.prod(shape)) for _, shape in _layout(config))
        if flat.shape != (expected,) or flat.dtype != np.float64:
            raise DimensionMismatch(
                f"flat buffer must be float64 of length {expected}, got {flat.shape}"
            )
        self.config = config
        self.flat = flat
        self._views = {}
        offset = 0
        for name, shape in _layout(config):
            size = int(np.prod(shape))
            self._views[name] = self.flat[offset: offset + size].reshape(shape)
            offset += size

    @classmethod
    def zeros(cls, config: ModelConfig) -> "ModelParams":
        size = sum(int(np.prod(shape)) for _, shape in _layout(config))
        return cls(config, np.zeros(size))

    @classmethod
    def initialized(cls, config: ModelConfig, rng: np.random.Generator) -> "ModelParams":
        size = sum(int(np.prod(shape)) for _, shape in _layout(config))
        return cls(config, rng.uniform(-INIT_SCALE, INIT_SCALE, size))

    @classmethod
    def from_flat(cls, config: ModelConfig, flat: np.ndarray) -> "ModelParams":
        return cls(config, np.array(flat, dtype=np.float64))

    def flatten(self) -> np.ndarray:
        return self.flat.copy()

    def view(self, name: str) -> np.ndarray:
        return self._views[name]

    @property
    def size(self) -> int:
        return self.flat.size

    def zero_(self) -> None:
        self.flat[:] = 0.0


# Placeholder arrays for the context-side kernel slots of a structure-only
# model; the kernels never touch them when use_context is false.
_DUMMIES = {
    "emb_c": np.zeros((1, 1)),
    "Wg_c": np.zeros((1, 1, 1)),
    "bg_c": np.zeros((1, 1)),
    "Wa_c": np.zeros((1, 1)),
    "va_c": np.zeros(1),
}

_KERNEL_ORDER = (
    "emb_p", "emb_c", "emb_t",
    "Wg_p", "bg_p", "Wg_c", "bg_c", "Wg_d", "bg_d",
    "Wa_p", "va_p", "Wa_c", "va_c",
    "Wm", "Wo", "bo",
)


def _kernel_views(params: ModelParams) -> tuple[np.ndarray, ...]:
    views = params._views
    return tuple(
        views[name] if name in views else _DUMMIES[name] for name in _KERNEL_ORDER
    )


def _example_arrays(config: ModelConfig, example: EncodedExample):
    if len(example.prufer_ids) == 0:
        raise EmptyInput("example has an empty structure-side input")
    if len(example.comment_ids) < 2:
        raise EmptyInput("comment must contain at least START and EOS")
    context_ids = example.context_ids if example.context_ids else (PAD,)
    p = np.asarray(example.prufer_ids, dtype=np.int64)
    c = np.asarray(context_ids, dtype=np.int64)
    t = np.asarray(example.comment_ids, dtype=np.int64)
    if p.max() >= config.prufer_vocab_size or p.min() < 0:
        raise DimensionMismatch("structure-side id outside vocabulary")
    if config.use_context and (c.max() >= config.context_vocab_size or c.min() < 0):
        raise DimensionMismatch("context-side id outside vocabulary")
    if t.max() >= config.target_vocab_size or t.min() < 0:
        raise DimensionMismatch("comment id outside vocabulary")
    return p, c, t[:-1], t[1:]


# ---------------------------------------------------------------------------
# Reference operations (specification semantics; kernels are tested against these)
# ---------------------------------------------------------------------------


def gru_step(x: np.ndarray, s_prev: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One GRU step: r/z gates, candidate state, convex update.

    W stacks the reset/update/candidate weights as (3, H, E+H); b is (3, H).
    """
    if W.ndim != 3 or W.shape[0] != 3 or b.shape != W.shape[:2]:
        raise DimensionMismatch(f"bad GRU weight shapes {W.shape} / {b.shape}")
    H = W.shape[1]
    if s_prev.shape != (H,) or x.shape != (W.shape[2] - H,):
        raise DimensionMismatch(
            f"input {x.shape} / state {s_prev.shape} inconsistent with weights {W.shape}"
        )
    xs = np.concatenate((x, s_prev))
    r = 1.0 / (1.0 + np.exp(-(W[0] @ xs + b[0])))
    z = 1.0 / (1.0 + np.exp(-(W[1] @ xs + b[1])))
    xrs = np.concatenate((x, r * s_prev))
    hc = np.tanh(W[2] @ xrs + b[2])
    return (1.0 - z) * s_prev + z * hc


def encode_sequence(ids: Sequence[int], embedding: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All GRU states over an id sequence from a zero initial state; shape (T, H)."""
    if len(ids) == 0:
        raise EmptyInput("cannot encode an empty sequence")
    H = W.shape[1]
    states = np.empty((len(ids), H))
    s = np.zeros(H)
    for t, idx in enumerate(ids):
        s = gru_step(embedding[idx], s, W, b)
        states[t] = s
    return states


def additive_attention(query: np.ndarray, states: np.ndarray, Wa: np.ndarray, va: np.ndarray):
    """Additive attention: softmax over va . tanh(Wa @ [query; state_i]).

    Returns (context vector, attention weights).
    """
    if states.ndim != 2 or states.shape[0] == 0:
        raise EmptyEncoderStates("attention needs at least one encoder state")
    scores = np.empty(states.shape[0])
    for i in range(states.shape[0]):
        scores[i] = va @ np.tanh(Wa @ np.concatenate((query, states[i])))
    a = np.exp(scores - scores.max())
    a = a / a.sum()
    return a @ states, a


def attend_and_combine(
    dec_state: np.ndarray,
    prufer_states: np.ndarray,
    context_states: np.ndarray | None,
    params: ModelParams,
) -> np.ndarray:
    """Per-encoder additive attention, then tanh-combine the two contexts."""
    ctx_p, _ = additive_attention(dec_state, prufer_states, params.view("Wa_p"), params.view("va_p"))
    if params.config.use_context:
        if context_states is None or context_states.shape[0] == 0:
            raise EmptyEncoderStates("context encoder produced no states")
        ctx_c, _ = additive_attention(
            dec_state, context_states, params.view("Wa_c"), params.view("va_c")
        )
        mix = np.concatenate((ctx_p, ctx_c))
    else:
        mix = ctx_p
    return np.tanh(params.view("Wm") @ mix)


def decode_step(
    prev_token_id: int,
    dec_state: np.ndarray,
    prufer_states: np.ndarray,
    context_states: np.ndarray | None,
    params: ModelParams,
):
    """One decoder step: GRU update, attention combine, output projection.

    Returns (logits over the target vocabulary, new decoder state).
    """
    new_state = gru_step(
        params.view("emb_t")[prev_token_id], dec_state, params.view("Wg_d"), params.view("bg_d")
    )
    combined = attend_and_combine(new_state, prufer_states, context_states, params)
    logits = params.view("Wo") @ np.concatenate((new_state, combined)) + params.view("bo")
    return logits, new_state


# ---------------------------------------------------------------------------
# Loss, gradients, training, inference
# ---------------------------------------------------------------------------


def example_loss(params: ModelParams, example: EncodedExample) -> tuple[float, int, int]:
    """(mean token cross-entropy, argmax hits, target token count) for one example."""
    p, c, d_in, d_tgt = _example_arrays(params.config, example)
    loss, ncorrect = model_loss_kernel(
        p, c, d_in, d_tgt, int(params.config.use_context), *_kernel_views(params)
    )
    return float(loss), int(ncorrect), int(d_tgt.size)


def loss_and_gradients(params: ModelParams, example: EncodedExample) -> tuple[float, ModelParams]:
    """Teacher-forced loss plus exact gradients for every parameter."""
    grads = ModelParams.zeros(params.config)
    loss = _loss_and_grad_into(params, example, grads)
    return loss, grads


def _loss_and_grad_into(params: ModelParams, example: EncodedExample, grads: ModelParams) -> float:
    p, c, d_in, d_tgt = _example_arrays(params.config, example)
    loss, _ = model_loss_grad_kernel(
        p, c, d_in, d_tgt, int(params.config.use_context),
        *_kernel_views(params), *_kernel_views(grads),
    )
    return float(loss)


def evaluate(params: ModelParams, examples: Sequence[EncodedExample]) -> tuple[float, float]:
    """(mean per-example loss, teacher-forced token accuracy) over a dataset."""
    if len(examples) == 0:
        raise EmptyCorpus("cannot evaluate on an empty dataset")
    total_loss = 0.0
    hits = 0
    tokens = 0
    for ex in examples:
        loss, ncorrect, ntokens = example_loss(params, ex)
        total_loss += loss
        hits += ncorrect
        tokens += ntokens
    return total_loss / len(examples), hits / tokens


def token_accuracy(params: ModelParams, examples: Sequence[EncodedExample]) -> float:
    return evaluate(params, examples)[1]


@dataclass
class TrainResult:
    params: ModelParams
    loss_log: list[tuple[int, float, float]] = field(default_factory=list)  # (epoch, lr, mean loss)


def train(
    examples: Sequence[EncodedExample],
    config: ModelConfig,
    init_params: ModelParams | None = None,
) -> TrainResult:
    """Per-example SGD with global gradient-norm clipping and lr decay per epoch.

    Deterministic given the config seed: initialization and the per-epoch
    example order come from one seeded generator.
    """
    if len(examples) == 0:
        raise EmptyCorpus("training set is empty")
    rng = np.random.default_rng(config.seed)
    params = init_params if init_params is not None else ModelParams.initialized(config, rng)
    prepared = [_example_arrays(config, ex) for ex in examples]
    flag = int(config.use_context)
    grads = ModelParams.zeros(config)
    param_views = _kernel_views(params)
    grad_views = _kernel_views(grads)
    lr = config.learning_rate
    log: list[tuple[int, float, float]] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(prepared))
        total = 0.0
        for idx in order:
            p, c, d_in, d_tgt = prepared[idx]
            grads.zero_()
            loss, _ = model_loss_grad_kernel(
                p, c, d_in, d_tgt, flag, *param_views, *grad_views
            )
            total += float(loss)
            gnorm = float(np.linalg.norm(grads.flat))
            if gnorm > config.grad_clip_norm:
                grads.flat *= config.grad_clip_norm / gnorm
            params.flat -= lr * grads.flat
        log.append((epoch, lr, total / len(prepared)))
        lr *= config.lr_decay
    return TrainResult(params=params, loss_log=log)


def greedy_decode(
    params: ModelParams,
    prufer_ids: Sequence[int],
    context_ids: Sequence[int],
    max_len: int | None = None,
) -> list[int]:
    """Greedy decoding from START: argmax each step (smallest id on ties), stop at EOS."""
    if len(prufer_ids) == 0:
        raise EmptyInput("empty structure-side input")
    limit = params.config.max_decode_len if max_len is None else max_len
    c_ids = context_ids if len(context_ids) else (PAD,)
    out = model_greedy_kernel(
        np.asarray(prufer_ids, dtype=np.int64),
        np.asarray(c_ids, dtype=np.int64),
        int(params.config.use_context),
        START,
        EOS,
        int(limit),
        *_kernel_views(params),
    )
    return [int(t) for t in out]


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

_CHECKPOINT_FORMAT = "prufercode.checkpoint"
_CHECKPOINT_VERSION = 1


def save_checkpoint(path: str | Path, params: ModelParams) -> None:
    """Versioned JSON blob: config + base64-encoded flat float64 parameters."""
    blob = {
        "format": _CHECKPOINT_FORMAT,
        "version": _CHECKPOINT_VERSION,
        "config": asdict(params.config),
        "param_count": int(params.size),
        "params_b64": base64.b64encode(params.flat.tobytes()).decode("ascii"),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path: str | Path) -> ModelParams:
    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("format") != _CHECKPOINT_FORMAT or blob.get("version") != _CHECKPOINT_VERSION:
        raise ValueError(f"not a recognized checkpoint: {path}")
    config = ModelConfig(**blob["config"])
    flat = np.frombuffer(base64.b64decode(blob["params_b64"]), dtype=np.float64).copy()
    if flat.size != blob["param_count"]:
        raise ValueError("checkpoint parameter count mismatch")
    return ModelParams(config, flat)
