"""Seeded train/test/validation splitting."""
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError


@dataclass
class DatasetSplit:
    train: list
    test: list
    validation: list
    seed: int

    def parts(self):
        return {"train": self.train, "test": self.test, "validation": self.validation}


def split_sizes(n, ratio=(3, 1, 1)):
    """Part sizes for ``ratio``; whatever rounding leaves over goes to train."""
    total = sum(ratio)
    test = n * ratio[1] // total
    val = n * ratio[2] // total
    return n - test - val, test, val


def _apportion(class_sizes, part_sizes):
    """Integer table with the given row/column sums, entries within 1 of proportional."""
    n = sum(class_sizes)
    exact = np.array([[c * p / n for p in part_sizes] for c in class_sizes])
    table = np.floor(exact).astype(int)
    row_left = np.array(class_sizes) - table.sum(axis=1)
    col_left = np.array(part_sizes) - table.sum(axis=0)
    frac = exact - table
    for c, k in sorted(np.ndindex(table.shape), key=lambda ck: (-frac[ck], ck)):
        if row_left[c] > 0 and col_left[k] > 0:
            table[c, k] += 1
            row_left[c] -= 1
            col_left[k] -= 1
    for c, k in np.ndindex(table.shape):
        while row_left[c] > 0 and col_left[k] > 0:
            table[c, k] += 1
            row_left[c] -= 1
            col_left[k] -= 1
    return table


def split(records, ratio=(3, 1, 1), seed=0, stratify=True):
    if len(records) < sum(ratio):
        raise ContractError(f"need at least {sum(ratio)} records to split, got {len(records)}")
    rng = np.random.default_rng(seed)
    sizes = split_sizes(len(records), ratio)
    if not stratify:
        order = [records[i] for i in rng.permutation(len(records))]
        a, b = sizes[0], sizes[0] + sizes[1]
        return DatasetSplit(order[:a], order[a:b], order[b:], seed)

    labels = sorted({r.label for r in records})
    by_label = {lab: [r for r in records if r.label == lab] for lab in labels}
    table = _apportion([len(by_label[lab]) for lab in labels], sizes)
    parts = [[], [], []]
    for row, lab in enumerate(labels):
        group = by_label[lab]
        shuffled = [group[i] for i in rng.permutation(len(group))]
        start = 0
        for k in range(3):
            parts[k].extend(shuffled[start:start + table[row, k]])
            start += table[row, k]
    parts = [[p[i] for i in rng.permutation(len(p))] for p in parts]
    return DatasetSplit(parts[0], parts[1], parts[2], seed)
