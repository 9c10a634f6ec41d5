"""Gradient-check suite and salience spans for predictions."""
from dataclasses import dataclass

import numpy as np

from .model import DoubleCheckModel, ModelConfig
from .numcore import (
    Parameter,
    gaussian_filter_1d,
    grad_check,
    lstm,
    matmul,
    mul,
    sigmoid,
    softmax,
    tanh,
    tensor_sum,
)
from .train import cross_entropy

PRIMITIVE_TOL = 1e-6
MODEL_TOL = 1e-4


@dataclass
class CheckResult:
    name: str
    max_error: float
    tol: float
    detail: str = ""

    @property
    def passed(self):
        return self.max_error < self.tol

    def line(self):
        status = "ok" if self.passed else "FAIL"
        extra = f" {self.detail}" if self.detail else ""
        return f"{self.name}\tmax_rel_error={self.max_error:.3e}\ttol={self.tol:g}\t{status}{extra}"


def _primitive_cases(rng):
    a = Parameter(rng.normal(size=(3, 4)))
    b = Parameter(rng.normal(size=(4, 2)))
    w = rng.normal(size=2)
    yield "matmul", (a, b), lambda: tensor_sum(mul(matmul(a, b), w))

    s = Parameter(rng.normal(size=6))
    fixed = rng.normal(size=6)
    yield "softmax", (s,), lambda: tensor_sum(mul(softmax(s), fixed))

    m = Parameter(rng.normal(size=(2, 5)))
    mask = np.array([[True] * 5, [True, True, True, False, False]])
    mw = rng.normal(size=(2, 5))
    yield "masked_softmax", (m,), lambda: tensor_sum(mul(softmax(m, mask=mask), mw))

    t = Parameter(rng.normal(size=5))
    yield "tanh_sigmoid", (t,), lambda: tensor_sum(mul(tanh(t), sigmoid(t)))

    g = Parameter(rng.random(size=(2, 7)))
    gw = rng.normal(size=(2, 7))
    yield "gaussian_filter", (g,), lambda: tensor_sum(mul(gaussian_filter_1d(g, 1.0, lengths=[7, 5]), gw))

    E, H = 3, 4
    x = Parameter(rng.normal(size=(2, 4, E)))
    w_ih = Parameter(rng.uniform(-0.5, 0.5, size=(E, 4 * H)))
    w_hh = Parameter(rng.uniform(-0.5, 0.5, size=(H, 4 * H)))
    bias = Parameter(rng.uniform(-0.5, 0.5, size=4 * H))
    h0 = Parameter(rng.normal(size=(2, H)) * 0.1)
    c0 = Parameter(rng.normal(size=(2, H)) * 0.1)

    def lstm_norm():
        h = lstm(x, w_ih, w_hh, bias, h0, c0)
        return tensor_sum(mul(h, h))
    yield "lstm", (x, w_ih, w_hh, bias, h0, c0), lstm_norm


def model_check(seed, salience_mode="full", grad_through_alpha=True, hidden_dim=4, seq_len=5,
                embed_dim=3, vocab_size=7, batch=2, eps=1e-5):
    """Finite-difference check of every parameter group of a tiny model, eval mode."""
    rng = np.random.default_rng(seed)
    cfg = ModelConfig(vocab_size=vocab_size, embed_dim=embed_dim, hidden_dim=hidden_dim, seq_len=seq_len,
                      salience_mode=salience_mode, grad_through_alpha=grad_through_alpha)
    model = DoubleCheckModel(cfg, seed=seed)
    for p in model.params.values():
        p.data = p.data * 5.0   # larger weights than the default init exercise the nonlinearities
    model.params["embedding"].data[cfg.pad_id] = 0.0
    ids = rng.integers(1, vocab_size, size=(batch, seq_len))
    if seq_len > 2:
        ids[-1, seq_len - 2:] = cfg.pad_id
    labels = rng.integers(0, 2, size=batch)
    params = model.parameters()
    reference = None
    if salience_mode == "full" and not grad_through_alpha:
        frozen = model(ids).attention.alpha.data.copy()
        reference = lambda: cross_entropy(model(ids, reweight_alpha=frozen).probs, labels)  # noqa: E731
    report = grad_check(lambda: cross_entropy(model(ids).probs, labels), params, eps, numeric_f=reference)
    names = [n for n, p in model.params.items() if p.requires_grad]
    where = f"param={names[report.param_index]} coord={report.coord}" if report.param_index >= 0 else ""
    return report, where


def gradcheck_suite(seed=0, model_seeds=None):
    """Primitive checks at ``seed`` and full-model checks for each of ``model_seeds``."""
    results = []
    rng = np.random.default_rng(seed)
    for name, params, f in _primitive_cases(rng):
        rep = grad_check(f, params)
        results.append(CheckResult(f"primitive:{name}", rep.max_error, PRIMITIVE_TOL, rep.failure))
    for s in (model_seeds if model_seeds is not None else [seed]):
        for mode in ("full", "no_salience"):
            for through in (True, False):
                rep, where = model_check(s, mode, through)
                results.append(CheckResult(f"model:{mode}:grad_through_alpha={through}:seed={s}",
                                           rep.max_error, MODEL_TOL, rep.failure or where))
    return results


@dataclass
class SalienceSpan:
    start: int
    end: int        # exclusive
    text: str
    weight: float

    def to_dict(self):
        return {"start": self.start, "end": self.end, "text": self.text, "weight": round(self.weight, 6)}


def salience_spans(alpha, text, top_k=5):
    """Group the highest-weight positions into contiguous character spans.

    A position is salient when its weight exceeds the uniform level
    ``1 / n`` over the ``n`` valid positions. Runs of salient positions form
    spans, ranked by their summed weight (ties by start); if no position
    qualifies the single heaviest one is returned.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    n = min(len(text), alpha.size)
    if n == 0:
        return []
    a = alpha[:n]
    hot = a > 1.0 / n
    spans = []
    i = 0
    while i < n:
        if hot[i]:
            j = i
            while j < n and hot[j]:
                j += 1
            spans.append(SalienceSpan(i, j, text[i:j], float(a[i:j].sum())))
            i = j
        else:
            i += 1
    if not spans:
        k = int(np.argmax(a))
        spans = [SalienceSpan(k, k + 1, text[k], float(a[k]))]
    spans.sort(key=lambda s: (-s.weight, s.start))
    return spans[:top_k]
