"""Mini-batch training with seeded shuffling and patience-based early stopping."""
import datetime
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, ContractError, DimensionError, DivergenceError
from .metrics import metrics_report
from .model import classify
from .numcore import Tensor, clamp_min, getitem, log, mul, scale, tensor_sum

OPTIMIZERS = ("sgd", "adam")


@dataclass
class TrainConfig:
    batch_size: int = 128
    epochs: int = 20
    learning_rate: float = 0.001
    patience_batches: int = 1000
    seed: int = 0
    optimizer: str = "sgd"
    class_weights: Optional[tuple] = None
    eval_every: int = 50
    eval_batch_size: int = 256

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        # zero is allowed: a frozen run is how early stopping is exercised
        if not self.learning_rate >= 0:
            raise ConfigError("learning_rate must be >= 0")
        if self.patience_batches < 1:
            raise ConfigError("patience_batches must be >= 1")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}")
        if self.eval_every < 1:
            raise ConfigError("eval_every must be >= 1")
        if self.class_weights is not None:
            self.class_weights = tuple(float(w) for w in self.class_weights)
            if len(self.class_weights) != 2 or min(self.class_weights) < 0:
                raise ConfigError("class_weights must be two non-negative reals")

    def to_dict(self):
        return asdict(self)


@dataclass
class Evaluation:
    epoch: int
    batch: int
    accuracy: float
    recall: float
    precision: float
    f_score: float


@dataclass
class TrainHistory:
    batch_losses: list = field(default_factory=list)
    epochs: list = field(default_factory=list)       # (epoch, mean_loss, Evaluation)
    evaluations: list = field(default_factory=list)  # every validation pass, incl. the initial one
    stop_reason: str = "completed"
    best: Optional[Evaluation] = None
    batches_run: int = 0

    @property
    def best_accuracy(self):
        return self.best.accuracy if self.best else float("nan")


def sgd_step(params, grads, lr):
    """In-place ``p -= lr * g``."""
    for p, g in zip(params, grads):
        if g is None:
            continue
        if g.shape != p.shape:
            raise DimensionError(f"sgd_step: grad shape {g.shape} != param shape {p.shape}")
        p.data = p.data - lr * g


class SGD:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params):
        sgd_step(params, [p.grad for p in params], self.lr)


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for i, p in enumerate(params):
            g = p.grad
            if g is None:
                continue
            m = self.m.get(i, 0.0) * self.beta1 + (1.0 - self.beta1) * g
            v = self.v.get(i, 0.0) * self.beta2 + (1.0 - self.beta2) * g * g
            self.m[i], self.v[i] = m, v
            p.data = p.data - self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(cfg):
    return Adam(cfg.learning_rate) if cfg.optimizer == "adam" else SGD(cfg.learning_rate)


def cross_entropy(probs, labels, weights=None):
    """Mean of ``-w[y] * ln(max(p[y], 1e-12))`` over the batch."""
    probs = probs if isinstance(probs, Tensor) else Tensor(probs)
    labels = np.asarray(labels, dtype=np.int64)
    p2 = probs if probs.ndim == 2 else probs.reshape(1, -1)
    labels = labels.reshape(-1)
    if labels.size != p2.shape[0]:
        raise ContractError(f"{labels.size} labels for {p2.shape[0]} predictions")
    if labels.size and (labels.min() < 0 or labels.max() >= p2.shape[1]):
        raise ContractError(f"labels must be in [0, {p2.shape[1]}), got {labels.tolist()}")
    picked = getitem(p2, (np.arange(labels.size), labels))
    nll = scale(log(clamp_min(picked, 1e-12)), -1.0)
    if weights is not None:
        nll = mul(nll, Tensor(np.asarray(weights, dtype=np.float64)[labels]))
    return scale(tensor_sum(nll), 1.0 / labels.size)


def predict_labels(model, ids, batch_size=256, backend=None):
    ids = np.asarray(ids)
    out = np.empty(len(ids), dtype=np.int64)
    for s in range(0, len(ids), batch_size):
        res = model(ids[s:s + batch_size], train_mode=False, backend=backend)
        out[s:s + batch_size] = classify(res.probs.data)
    return out


def evaluate(model, dataset, beta=2.0, batch_size=256, backend=None):
    ids, labels = dataset
    return metrics_report(predict_labels(model, ids, batch_size, backend), labels, beta)


def _check_dataset(ds, name, seq_len):
    ids, labels = ds
    ids = np.asarray(ids)
    if len(ids) == 0:
        raise ContractError(f"{name} set is empty")
    if ids.ndim != 2 or ids.shape[1] != seq_len or len(labels) != len(ids):
        raise ContractError(f"{name} set must be ({len(labels)}, {seq_len}) token ids, got {ids.shape}")
    return ids, np.asarray(labels, dtype=np.int64)


def train(train_set, val_set, model, cfg, log_path=None, backend=None):
    """Train ``model`` in place; return it restored to its best validation state.

    ``train_set``/``val_set`` are ``(token_ids, labels)`` pairs. Validation
    accuracy is measured before the first update, every ``cfg.eval_every``
    batches, and at each epoch end. Any batch that ends without a strict
    improvement of the best accuracy increments the stale counter; training
    stops once it reaches ``cfg.patience_batches``.
    """
    ids, labels = _check_dataset(train_set, "training", model.config.seq_len)
    val = _check_dataset(val_set, "validation", model.config.seq_len)
    shuffle_rng = np.random.default_rng(cfg.seed)
    dropout_rng = np.random.default_rng([cfg.seed, 1])
    optimizer = make_optimizer(cfg)
    history = TrainHistory()

    def validate(epoch, batch):
        m = evaluate(model, val, batch_size=cfg.eval_batch_size, backend=backend)
        ev = Evaluation(epoch, batch, m.accuracy, m.recall, m.precision, m.f_score)
        history.evaluations.append(ev)
        return ev

    best = history.best = validate(0, 0)
    best_state = model.state_dict()
    stale = 0
    n = len(ids)
    log = TrainLog(log_path, model.config, cfg) if log_path else None

    for epoch in range(1, cfg.epochs + 1):
        perm = shuffle_rng.permutation(n)
        epoch_losses = []
        stop = False
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            model.zero_grad()
            out = model(ids[idx], train_mode=True, rng=dropout_rng, backend=backend)
            loss = cross_entropy(out.probs, labels[idx], cfg.class_weights)
            value = loss.item()
            if not math.isfinite(value):
                raise DivergenceError(history.batches_run, value)
            loss.backward()
            optimizer.step(model.parameters())
            history.batch_losses.append(value)
            epoch_losses.append(value)
            history.batches_run += 1

            last_in_epoch = start + cfg.batch_size >= n
            improved = False
            if history.batches_run % cfg.eval_every == 0 or last_in_epoch:
                ev = validate(epoch, history.batches_run)
                if ev.accuracy > best.accuracy:
                    best = history.best = ev
                    best_state = model.state_dict()
                    improved = True
                if last_in_epoch:
                    history.epochs.append((epoch, float(np.mean(epoch_losses)), ev))
                    if log:
                        log.epoch(epoch, float(np.mean(epoch_losses)), ev)
            stale = 0 if improved else stale + 1
            if stale >= cfg.patience_batches:
                history.stop_reason = "early_stopped"
                stop = True
                break
        if stop:
            if epoch_losses and (not history.epochs or history.epochs[-1][0] != epoch):
                ev = validate(epoch, history.batches_run)
                history.epochs.append((epoch, float(np.mean(epoch_losses)), ev))
                if log:
                    log.epoch(epoch, float(np.mean(epoch_losses)), ev)
            break

    model.load_state_dict(best_state)
    if log:
        log.close(history)
    return model, history


class TrainLog:
    """Tab-separated per-epoch log. Only the first line carries a timestamp."""

    COLUMNS = ("epoch", "mean_loss", "val_accuracy", "val_recall", "val_precision", "val_f_score")

    def __init__(self, path, model_cfg, train_cfg):
        self.fh = open(path, "w", encoding="utf-8")
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        self.fh.write(f"# started {stamp}\n")
        settings = {"lr": train_cfg.learning_rate, "batch_size": train_cfg.batch_size,
                    "epochs": train_cfg.epochs, "patience_batches": train_cfg.patience_batches,
                    "optimizer": train_cfg.optimizer, "seed": train_cfg.seed,
                    "seq_len": model_cfg.seq_len, "dropout": model_cfg.dropout_rate,
                    "sigma": model_cfg.gaussian_sigma, "mode": model_cfg.salience_mode,
                    "embed_dim": model_cfg.embed_dim, "hidden_dim": model_cfg.hidden_dim}
        self.fh.write("# " + " ".join(f"{k}={v}" for k, v in settings.items()) + "\n")
        self.fh.write("\t".join(self.COLUMNS) + "\n")

    def epoch(self, epoch, mean_loss, ev):
        self.fh.write(f"{epoch}\t{mean_loss:.6f}\t{ev.accuracy:.4f}\t{ev.recall:.4f}\t"
                      f"{ev.precision:.4f}\t{ev.f_score:.4f}\n")

    def close(self, history):
        self.fh.write(f"# stop_reason={history.stop_reason} batches={history.batches_run} "
                      f"best_val_accuracy={history.best_accuracy:.4f}\n")
        self.fh.close()
