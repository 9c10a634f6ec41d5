"""Descriptive statistics of text length per label."""
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .keywords import record_haystack
from .records import FAKE, REAL

LABEL_NAMES = {REAL: "real", FAKE: "fake"}


@dataclass
class LengthStats:
    count: int
    max: int
    min: int
    mean: float
    median: float
    std: float      # population
    q1: float
    q3: float

    @classmethod
    def of(cls, lengths):
        a = np.asarray(lengths, dtype=np.float64)
        return cls(int(a.size), int(a.max()), int(a.min()), float(a.mean()), float(np.median(a)),
                   float(a.std(ddof=0)), float(np.percentile(a, 25)), float(np.percentile(a, 75)))


@dataclass
class DatasetStats:
    per_label: dict          # "real"/"fake"/"all" -> LengthStats
    keyword_counts: dict     # category -> number of records matching it

    def to_dict(self):
        return {"per_label": {k: vars(v) for k, v in self.per_label.items()},
                "keyword_counts": dict(self.keyword_counts)}

    def to_text(self):
        lines = ["label\tcount\tmax\tmin\tmean\tmedian\tstd"]
        for name, s in self.per_label.items():
            lines.append(f"{name}\t{s.count}\t{s.max}\t{s.min}\t{s.mean:.1f}\t{s.median:.1f}\t{s.std:.1f}")
        if self.keyword_counts:
            lines.append("")
            lines.append("category\trecords")
            lines += [f"{cat}\t{n}" for cat, n in self.keyword_counts.items()]
        return "\n".join(lines)

    def boxplot_tsv(self):
        rows = ["label\tmin\tq1\tmedian\tq3\tmax\tmean"]
        for name, s in self.per_label.items():
            rows.append(f"{name}\t{s.min}\t{s.q1:.4f}\t{s.median:.4f}\t{s.q3:.4f}\t{s.max}\t{s.mean:.4f}")
        return "\n".join(rows) + "\n"

    def keywords_tsv(self):
        return "category\trecords\n" + "".join(f"{c}\t{n}\n" for c, n in self.keyword_counts.items())


def stats(records, keywords=None):
    if not records:
        raise ContractError("stats of an empty dataset")
    per_label = {}
    for label in (REAL, FAKE):
        lengths = [r.char_length for r in records if r.label == label]
        if lengths:
            per_label[LABEL_NAMES[label]] = LengthStats.of(lengths)
    per_label["all"] = LengthStats.of([r.char_length for r in records])
    counts = {}
    if keywords is not None:
        counts = {cat: 0 for cat in keywords.categories}
        for r in records:
            for cat in keywords.matches(record_haystack(r)):
                counts[cat] += 1
    return DatasetStats(per_label, counts)
