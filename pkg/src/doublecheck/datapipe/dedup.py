"""Near-duplicate removal by character-bigram cosine similarity."""
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from ..errors import ConfigError, DomainError
from .records import id_sort_key, normalize

_BLOCK = 512


def bigram_counts(text):
    """Character-bigram multiset; a one-character text counts as its own gram."""
    t = normalize(text)
    if not t:
        raise DomainError("similarity of an empty text")
    if len(t) == 1:
        return Counter([t])
    return Counter(t[i:i + 2] for i in range(len(t) - 1))


def _cosine(dot, na, nb):
    return dot / math.sqrt(na * nb)


def similarity(a, b):
    ca, cb = bigram_counts(a), bigram_counts(b)
    if len(ca) > len(cb):
        ca, cb = cb, ca
    dot = sum(v * cb[k] for k, v in ca.items() if k in cb)
    na = sum(v * v for v in ca.values())
    nb = sum(v * v for v in cb.values())
    return _cosine(dot, na, nb)


@dataclass
class DuplicateGroup:
    survivor: str
    removed: list
    edges: list = field(default_factory=list)   # (id_a, id_b, similarity) above threshold

    def to_dict(self):
        return {"survivor": self.survivor, "removed": self.removed,
                "edges": [{"a": a, "b": b, "similarity": round(s, 6)} for a, b, s in self.edges]}


def _count_matrix(texts):
    vocab = {}
    indptr, indices, data = [0], [], []
    for t in texts:
        counts = bigram_counts(t)
        for gram, n in counts.items():
            indices.append(vocab.setdefault(gram, len(vocab)))
            data.append(n)
        indptr.append(len(indices))
    return sparse.csr_matrix((np.asarray(data, dtype=np.int64), indices, indptr),
                             shape=(len(texts), max(len(vocab), 1)))


def similar_pairs(texts, threshold):
    """All ``(i, j, cos)`` with ``i < j`` and ``cos > threshold``."""
    x = _count_matrix(texts)
    norms = np.asarray(x.multiply(x).sum(axis=1)).ravel().astype(np.int64)
    xt = x.T.tocsc()
    pairs = []
    for start in range(0, x.shape[0], _BLOCK):
        block = (x[start:start + _BLOCK] @ xt).tocoo()
        i = block.row.astype(np.int64) + start
        j = block.col.astype(np.int64)
        upper = j > i
        i, j, dot = i[upper], j[upper], block.data[upper]
        # same float ops as _cosine, elementwise
        cos = dot.astype(np.float64) / np.sqrt((norms[i] * norms[j]).astype(np.float64))
        hit = cos > threshold
        pairs.extend(zip(i[hit].tolist(), j[hit].tolist(), cos[hit].tolist()))
    pairs.sort()
    return pairs


def dedup(records, threshold=0.8):
    """Collapse connected components of the ``similarity > threshold`` graph.

    The member with the smallest id survives; the input order of survivors
    is kept. Returns ``(kept, groups)`` where ``groups`` lists every
    component with more than one member.
    """
    if not 0 < threshold <= 1:
        raise ConfigError(f"threshold must lie in (0, 1], got {threshold}")
    n = len(records)
    if n == 0:
        return [], []
    pairs = similar_pairs([r.text for r in records], threshold)
    rows = [i for i, _, _ in pairs]
    cols = [j for _, j, _ in pairs]
    graph = sparse.csr_matrix((np.ones(len(pairs)), (rows, cols)), shape=(n, n))
    _, comp = connected_components(graph, directed=False)

    members = {}
    for idx, c in enumerate(comp):
        members.setdefault(int(c), []).append(idx)
    drop = set()
    groups = []
    edges_by_comp = {}
    for i, j, s in pairs:
        edges_by_comp.setdefault(int(comp[i]), []).append((records[i].id, records[j].id, s))
    for c, idxs in members.items():
        if len(idxs) < 2:
            continue
        keep = min(idxs, key=lambda k: id_sort_key(records[k].id))
        removed = sorted((k for k in idxs if k != keep), key=lambda k: id_sort_key(records[k].id))
        drop.update(removed)
        groups.append(DuplicateGroup(records[keep].id, [records[k].id for k in removed], edges_by_comp[c]))
    groups.sort(key=lambda g: id_sort_key(g.survivor))
    kept = [r for k, r in enumerate(records) if k not in drop]
    return kept, groups
