"""Confusion-matrix metrics with fake news (label 0) as the positive class.

Undefined ratios (zero denominators) evaluate to 0.0, raise an
:class:`UndefinedMetricWarning`, and are listed in the report's
``undefined`` field so serialized reports keep the flag.
"""
import json
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import ContractError, DomainError

POSITIVE = 0  # fake


class UndefinedMetricWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)


class Rates(NamedTuple):
    precision: float
    recall: float
    accuracy: float
    undefined: tuple = ()


def _labels(x, what):
    arr = np.asarray(x, dtype=np.int64).reshape(-1)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ContractError(f"{what} must be 0 (fake) or 1 (real)")
    return arr


def confusion(predictions, gold_labels):
    pred = _labels(predictions, "predictions")
    gold = _labels(gold_labels, "gold labels")
    if pred.shape != gold.shape:
        raise ContractError(f"{pred.size} predictions for {gold.size} gold labels")
    pp, gp = pred == POSITIVE, gold == POSITIVE
    return ConfusionCounts(
        tp=int(np.sum(pp & gp)),
        fp=int(np.sum(pp & ~gp)),
        fn=int(np.sum(~pp & gp)),
        tn=int(np.sum(~pp & ~gp)),
    )


def _ratio(num, den, name, undefined):
    if den == 0:
        warnings.warn(f"{name} is undefined (zero denominator); reporting 0", UndefinedMetricWarning, stacklevel=3)
        undefined.append(name)
        return 0.0
    return num / den


def precision_recall_accuracy(c):
    undefined = []
    precision = _ratio(c.tp, c.tp + c.fp, "precision", undefined)
    recall = _ratio(c.tp, c.tp + c.fn, "recall", undefined)
    accuracy = _ratio(c.tp + c.tn, c.total, "accuracy", undefined)
    return Rates(precision, recall, accuracy, tuple(undefined))


def f_beta(precision, recall, beta=2.0):
    """Recall-weighted F-score ``(1 + b) P R / (b P + R)``.

    Note the weight enters linearly, not squared as in the textbook
    F-beta; with ``beta=2`` this is the score the classifier is judged by.
    """
    if not (0.0 <= precision <= 1.0 and 0.0 <= recall <= 1.0):
        raise DomainError(f"precision and recall must lie in [0, 1], got {precision}, {recall}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    den = beta * precision + recall
    if den == 0:
        warnings.warn("F-score undefined for precision = recall = 0; reporting 0",
                      UndefinedMetricWarning, stacklevel=2)
        return 0.0
    return (1.0 + beta) * precision * recall / den


def rpd(a1, a2):
    """Relative percentage difference of ``a2`` against ``a1``, in percent."""
    total = a1 + a2
    if total == 0:
        raise DomainError("RPD undefined when a1 + a2 == 0")
    return (a2 - a1) / (total / 2.0) * 100.0


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f_score: float
    beta: float
    counts: ConfusionCounts
    undefined: tuple = ()

    def to_dict(self):
        return {
            "accuracy": round(self.accuracy, 4),
            "precision": round(self.precision, 4),
            "recall": round(self.recall, 4),
            "f_score": round(self.f_score, 4),
            "beta": self.beta,
            "tp": self.counts.tp, "fp": self.counts.fp, "fn": self.counts.fn, "tn": self.counts.tn,
            "undefined": list(self.undefined),
        }

    def to_text(self, prefix=""):
        d = self.to_dict()
        lines = [f"{prefix}{k}={d[k]:.4f}" for k in ("accuracy", "precision", "recall", "f_score")]
        lines.append(f"{prefix}beta={self.beta:g}")
        lines += [f"{prefix}{k}={d[k]}" for k in ("tp", "fp", "fn", "tn")]
        lines.append(f"{prefix}undefined={','.join(self.undefined) or '-'}")
        return "\n".join(lines)


def report_from_counts(c, beta=2.0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UndefinedMetricWarning)
        rates = precision_recall_accuracy(c)
        undefined = list(rates.undefined)
        if rates.precision == 0 and rates.recall == 0:
            undefined.append("f_score")
            f = 0.0
        else:
            f = f_beta(rates.precision, rates.recall, beta)
    return MetricsReport(rates.accuracy, rates.precision, rates.recall, f, beta, c, tuple(undefined))


def metrics_report(predictions, gold_labels, beta=2.0):
    return report_from_counts(confusion(predictions, gold_labels), beta)


@dataclass
class SplitEvalReport:
    boundary: int
    short_side: Optional[MetricsReport]
    long_side: Optional[MetricsReport]
    rpd_accuracy: Optional[float]
    rpd_recall: Optional[float]
    short_count: int = 0
    long_count: int = 0
    flags: list = field(default_factory=list)

    def to_dict(self):
        def r(x):
            return None if x is None else round(x, 4)
        return {
            "boundary": self.boundary,
            "short_count": self.short_count,
            "long_count": self.long_count,
            "short": self.short_side.to_dict() if self.short_side else None,
            "long": self.long_side.to_dict() if self.long_side else None,
            "rpd_accuracy": r(self.rpd_accuracy),
            "rpd_recall": r(self.rpd_recall),
            "flags": list(self.flags),
        }

    def to_text(self):
        lines = [f"boundary={self.boundary}", f"short_count={self.short_count}", f"long_count={self.long_count}"]
        for name, side in (("short", self.short_side), ("long", self.long_side)):
            lines.append(side.to_text(prefix=f"{name}.") if side else f"{name}=empty")
        for name in ("rpd_accuracy", "rpd_recall"):
            v = getattr(self, name)
            lines.append(f"{name}={'undefined' if v is None else f'{v:.4f}'}")
        lines.append(f"flags={','.join(self.flags) or '-'}")
        return "\n".join(lines)


def length_split_eval(records, predictions, boundary, beta=2.0):
    """Score short (``char_length < boundary``) and long records separately."""
    if boundary <= 0:
        raise ContractError(f"boundary must be positive, got {boundary}")
    predictions = list(np.asarray(predictions).reshape(-1))
    if len(predictions) != len(records):
        raise ContractError(f"{len(predictions)} predictions for {len(records)} records")
    sides = {True: ([], []), False: ([], [])}
    for rec, pred in zip(records, predictions):
        preds, gold = sides[rec.char_length < boundary]
        preds.append(pred)
        gold.append(rec.label)

    flags = []
    reports = {}
    for is_short, name in ((True, "short"), (False, "long")):
        preds, gold = sides[is_short]
        if preds:
            reports[name] = metrics_report(preds, gold, beta)
        else:
            reports[name] = None
            flags.append(f"{name}_empty")

    rpd_acc = rpd_rec = None
    short, long_ = reports["short"], reports["long"]
    if short and long_:
        if short.accuracy + long_.accuracy != 0:
            rpd_acc = rpd(short.accuracy, long_.accuracy)
        if short.recall + long_.recall != 0 and "recall" not in short.undefined + long_.undefined:
            rpd_rec = rpd(short.recall, long_.recall)
    if rpd_acc is None:
        flags.append("rpd_accuracy_undefined")
    if rpd_rec is None:
        flags.append("rpd_recall_undefined")
    return SplitEvalReport(boundary, short, long_, rpd_acc, rpd_rec,
                           len(sides[True][0]), len(sides[False][0]), flags)


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj.to_dict() if hasattr(obj, "to_dict") else obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
