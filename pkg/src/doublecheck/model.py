"""Two-stage attention-LSTM classifier with salience re-weighting.

Stage one reads the embedded text, scores every position with additive
attention and smooths those weights with a Gaussian. The smoothed weights
both pool stage one's hidden states and rescale the input embeddings that
stage two reads. The two pooled context vectors are averaged and fed to an
affine softmax head. Label 0 is fake, label 1 is real.
"""
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, ContractError, DegenerateInputError, DimensionError
from .numcore import (
    Parameter,
    Tensor,
    detach,
    dropout,
    embedding,
    expand_last,
    gaussian_filter_1d,
    lstm,
    matmul,
    mul,
    scale,
    softmax,
    tanh,
    tensor_sum,
)

FAKE, REAL = 0, 1
SALIENCE_MODES = ("full", "no_salience")


@dataclass
class ModelConfig:
    vocab_size: int
    embed_dim: int = 300
    hidden_dim: int = 128
    seq_len: int = 256
    num_classes: int = 2
    dropout_rate: float = 0.5
    gaussian_sigma: float = 1.0
    salience_mode: str = "full"
    grad_through_alpha: bool = True
    smooth_second: bool = False
    freeze_embeddings: bool = False
    pad_id: int = 0

    def __post_init__(self):
        for name in ("vocab_size", "embed_dim", "hidden_dim", "seq_len"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.num_classes != 2:
            raise ConfigError("only binary fake/real classification is supported")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if not self.gaussian_sigma > 0:
            raise ConfigError(f"gaussian_sigma must be positive, got {self.gaussian_sigma}")
        if self.salience_mode not in SALIENCE_MODES:
            raise ConfigError(f"salience_mode must be one of {SALIENCE_MODES}, got {self.salience_mode!r}")
        if not 0 <= self.pad_id < self.vocab_size:
            raise ConfigError(f"pad_id {self.pad_id} outside vocabulary")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


@dataclass
class EmbeddedSequence:
    vectors: Tensor          # (B, T, E)
    mask: np.ndarray         # (B, T) bool, True on real tokens

    @property
    def lengths(self):
        return self.mask.sum(axis=-1)


@dataclass
class AttentionWeights:
    alpha: Tensor            # (B, T)
    scores: Tensor           # (B, T), the pre-softmax e_i
    mask: np.ndarray


@dataclass
class ForwardResult:
    probs: Tensor            # (B, 2)
    logits: Tensor
    attention: AttentionWeights        # stage one, after smoothing
    raw_attention: AttentionWeights    # stage one, before smoothing
    attention2: AttentionWeights
    context1: Tensor
    context2: Tensor
    context_final: Tensor
    batched: bool = True

    @property
    def labels(self):
        return classify(self.probs.data)


def embed(token_ids, table, pad_id=0, padding_idx=True):
    ids = np.asarray(token_ids, dtype=np.int64)
    vectors = embedding(table, ids, padding_idx=pad_id if padding_idx else None)
    return EmbeddedSequence(vectors, ids != pad_id)


def lstm_forward(x, params, h0=None, c0=None, backend=None):
    """``params`` is ``(W_ih, W_hh, bias)``; returns all hidden states."""
    vectors = x.vectors if isinstance(x, EmbeddedSequence) else x
    return lstm(vectors, *params, h0=h0, c0=c0, backend=backend)


def attention(h, params, mask):
    """Additive attention ``e_i = v . tanh(W h_i + b)``, softmax over valid positions."""
    w, b, v = params
    mask = np.asarray(mask, dtype=bool)
    if h.shape[:-1] != mask.shape:
        raise DimensionError(f"attention: hidden states {h.shape} vs mask {mask.shape}")
    if not mask.any(axis=-1).all():
        raise DegenerateInputError("attention over a sequence with every position masked")
    u = tanh(matmul(h, w) + b)
    scores = matmul(u, v)
    return AttentionWeights(softmax(scores, mask=mask), scores, mask)


def _prefix_lengths(mask):
    lengths = mask.sum(axis=-1)
    expect = np.arange(mask.shape[-1]) < lengths[..., None]
    if not np.array_equal(expect, mask):
        raise ContractError("smoothing requires right-padded sequences (valid positions form a prefix)")
    return lengths


def smooth_attention(a, sigma, backend=None):
    """Gaussian-smooth ``a.alpha`` within the valid prefix, then renormalize."""
    lengths = _prefix_lengths(a.mask)
    g = gaussian_filter_1d(a.alpha, sigma, lengths=lengths, backend=backend)
    total = tensor_sum(g, axis=-1, keepdims=True)
    return AttentionWeights(g / total, a.scores, a.mask)


def context(a, h):
    alpha = a.alpha if isinstance(a, AttentionWeights) else a
    if alpha.shape != h.shape[:-1]:
        raise DimensionError(f"context: weights {alpha.shape} vs hidden states {h.shape}")
    return tensor_sum(mul(expand_last(alpha), h), axis=-2)


def reweight_input(x, a, grad_through_alpha=True):
    alpha = a.alpha if isinstance(a, AttentionWeights) else a
    if alpha.shape != x.vectors.shape[:-1]:
        raise DimensionError(f"reweight_input: weights {alpha.shape} vs embeddings {x.vectors.shape}")
    if not grad_through_alpha:
        alpha = detach(alpha)
    return EmbeddedSequence(mul(x.vectors, expand_last(alpha)), x.mask)


def classify(probs):
    """Argmax over (fake, real); an exact tie goes to fake."""
    p = np.asarray(probs.data if isinstance(probs, Tensor) else probs, dtype=np.float64)
    labels = np.where(p[..., REAL] > p[..., FAKE], REAL, FAKE)
    return int(labels) if labels.ndim == 0 else labels


class DoubleCheckModel:
    def __init__(self, config, seed=0, params=None):
        self.config = config
        if params is None:
            params = init_params(config, np.random.default_rng(seed))
        self.params = params
        if config.freeze_embeddings:
            self.params["embedding"].requires_grad = False

    def parameters(self):
        return [p for p in self.params.values() if p.requires_grad]

    def named_parameters(self):
        return list(self.params.items())

    def num_parameters(self):
        return sum(p.size for p in self.params.values())

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None

    def state_dict(self):
        return {k: p.data.copy() for k, p in self.params.items()}

    def load_state_dict(self, state):
        for k, p in self.params.items():
            if state[k].shape != p.shape:
                raise DimensionError(f"{k}: stored shape {state[k].shape} != {p.shape}")
            p.data = np.array(state[k], dtype=np.float64)

    def copy(self):
        clone = DoubleCheckModel(self.config, params=init_params(self.config, np.random.default_rng(0)))
        clone.load_state_dict(self.state_dict())
        return clone

    def __call__(self, token_ids, train_mode=False, rng=None, backend=None, reweight_alpha=None):
        return doublecheck_forward(token_ids, self, train_mode=train_mode, rng=rng, backend=backend,
                                   reweight_alpha=reweight_alpha)


def init_params(config, rng):
    """Uniform(-0.1, 0.1) everywhere, forget-gate bias +1, zero padding row."""
    E, H = config.embed_dim, config.hidden_dim

    def u(*shape):
        return rng.uniform(-0.1, 0.1, size=shape)

    table = u(config.vocab_size, E)
    table[config.pad_id] = 0.0
    params = {"embedding": Parameter(table, name="embedding")}
    for stage in ("1", "2"):
        bias = u(4 * H)
        bias[H:2 * H] += 1.0
        params[f"lstm{stage}.w_ih"] = Parameter(u(E, 4 * H), name=f"lstm{stage}.w_ih")
        params[f"lstm{stage}.w_hh"] = Parameter(u(H, 4 * H), name=f"lstm{stage}.w_hh")
        params[f"lstm{stage}.bias"] = Parameter(bias, name=f"lstm{stage}.bias")
        params[f"attn{stage}.w"] = Parameter(u(H, H), name=f"attn{stage}.w")
        params[f"attn{stage}.b"] = Parameter(u(H), name=f"attn{stage}.b")
        params[f"attn{stage}.v"] = Parameter(u(H), name=f"attn{stage}.v")
    params["head.w"] = Parameter(u(H, config.num_classes), name="head.w")
    params["head.b"] = Parameter(u(config.num_classes), name="head.b")
    return params


def doublecheck_forward(token_ids, model, train_mode=False, rng=None, backend=None, reweight_alpha=None):
    """Run the classifier on ``(B, seq_len)`` ids, or a single ``(seq_len,)`` row.

    ``reweight_alpha`` replaces the weights that rescale the second stage's
    input with a fixed array; gradient checks of the stop-gradient variant
    use it as their reference function.
    """
    cfg, p = model.config, model.params
    ids = np.asarray(token_ids, dtype=np.int64)
    batched = ids.ndim == 2
    if not batched:
        ids = ids[None]
    if ids.ndim != 2 or ids.shape[1] != cfg.seq_len:
        raise ContractError(f"token ids must have length seq_len={cfg.seq_len}, got shape {np.shape(token_ids)}")
    if train_mode and cfg.dropout_rate > 0 and rng is None:
        raise ContractError("train_mode with dropout needs an rng")

    x = embed(ids, p["embedding"], cfg.pad_id)
    h1 = lstm_forward(x, (p["lstm1.w_ih"], p["lstm1.w_hh"], p["lstm1.bias"]), backend=backend)
    raw = attention(h1, (p["attn1.w"], p["attn1.b"], p["attn1.v"]), x.mask)
    att1 = smooth_attention(raw, cfg.gaussian_sigma, backend=backend)
    c1 = context(att1, h1)

    if cfg.salience_mode == "full":
        weights = att1 if reweight_alpha is None else Tensor(np.asarray(reweight_alpha, dtype=np.float64))
        x2 = reweight_input(x, weights, cfg.grad_through_alpha)
    else:
        x2 = x
    h2 = lstm_forward(x2, (p["lstm2.w_ih"], p["lstm2.w_hh"], p["lstm2.bias"]), backend=backend)
    att2 = attention(h2, (p["attn2.w"], p["attn2.b"], p["attn2.v"]), x.mask)
    if cfg.smooth_second:
        att2 = smooth_attention(att2, cfg.gaussian_sigma, backend=backend)
    c2 = context(att2, h2)

    c_final = scale(c1 + c2, 0.5)
    pooled = dropout(c_final, cfg.dropout_rate, rng) if train_mode else c_final
    logits = matmul(pooled, p["head.w"]) + p["head.b"]
    probs = softmax(logits)

    result = ForwardResult(probs, logits, att1, raw, att2, c1, c2, c_final, batched)
    return result if batched else _unbatch(result)


def _unbatch(r):
    """Drop the unit batch axis from the reported values (graph stays batched)."""
    def first(t):
        return Tensor(t.data[0]) if not t.requires_grad else t[0]

    def first_att(a):
        return AttentionWeights(first(a.alpha), first(a.scores), a.mask[0])

    return ForwardResult(first(r.probs), first(r.logits), first_att(r.attention), first_att(r.raw_attention),
                         first_att(r.attention2), first(r.context1), first(r.context2), first(r.context_final),
                         batched=False)
