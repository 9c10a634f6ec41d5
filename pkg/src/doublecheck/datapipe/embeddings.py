"""Character vectors: pretrained word2vec text files, or built from corpus co-occurrence."""
import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, FormatError
from .vocab import PAD, PAD_ID, UNK_ID

FALLBACK_SCALE = 0.1


@dataclass
class EmbeddingTable:
    dim: int
    vocabulary: dict              # token -> row
    vectors: np.ndarray           # (len(vocabulary), dim)
    policy: dict = field(default_factory=lambda: {
        "fallback": "normal(0, 0.1) seeded by sha256(token)", "pad": "zero"})

    def fallback(self, token):
        seed = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "little")
        return np.random.default_rng(seed).normal(0.0, FALLBACK_SCALE, self.dim)

    def lookup(self, token):
        if token == PAD:
            return np.zeros(self.dim)
        row = self.vocabulary.get(token)
        return self.vectors[row].copy() if row is not None else self.fallback(token)

    def matrix_for(self, vocab):
        """Rows aligned with ``vocab.itos``; returns the matrix and the hit count."""
        out = np.empty((len(vocab), self.dim))
        hits = 0
        for i, tok in enumerate(vocab.itos):
            hits += tok in self.vocabulary
            out[i] = self.lookup(tok)
        return out, hits


def load_embeddings(path, dim=300):
    """Parse ``token v1 ... vdim`` lines; an initial ``count dim`` header is optional."""
    vocab, rows = {}, []
    with open(path, encoding="utf-8", errors="strict") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").rstrip(" ").split(" ")
            if not parts or parts == [""]:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                if dim is not None and int(parts[1]) != dim:
                    raise FormatError(f"header declares dim {parts[1]}, expected {dim}", lineno)
                dim = int(parts[1])
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim:
                raise FormatError(f"token {token!r} has {len(values)} values, expected {dim}", lineno)
            try:
                vec = np.array([float(v) for v in values])
            except ValueError:
                raise FormatError(f"non-numeric value for token {token!r}", lineno) from None
            if token in vocab:
                continue
            vocab[token] = len(rows)
            rows.append(vec)
    if dim is None:
        raise FormatError("no vectors found")
    vectors = np.vstack(rows) if rows else np.zeros((0, dim))
    return EmbeddingTable(dim, vocab, vectors)


def cooccurrence_embeddings(texts, vocab, dim, window=2):
    """Label-free character vectors from the given texts: positive PMI of windowed co-occurrence, reduced by SVD.

    Stands in for pretrained vectors when none are available. Rows follow
    ``vocab.itos``; the padding row is zero and the result has unit overall
    standard deviation.
    """
    if dim < 1 or window < 1:
        raise DomainError("dim and window must be >= 1")
    n = len(vocab)
    counts = np.zeros((n, n))
    for text in texts:
        ids = np.fromiter((vocab.stoi.get(c, UNK_ID) for c in text), dtype=np.int64)
        for k in range(1, window + 1):
            if ids.size > k:
                np.add.at(counts, (ids[:-k], ids[k:]), 1.0)
    counts += counts.T
    total = counts.sum()
    row = counts.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log(counts * total / np.outer(row, row))
    ppmi = np.where(np.isfinite(pmi) & (pmi > 0), pmi, 0.0)
    u, s, _ = np.linalg.svd(ppmi)
    k = min(dim, n)
    vectors = np.zeros((n, dim))
    vectors[:, :k] = u[:, :k] * np.sqrt(s[:k])
    # SVD sign is arbitrary; pin it so results do not depend on the LAPACK build
    signs = np.sign(vectors[np.argmax(np.abs(vectors), axis=0), np.arange(dim)])
    vectors *= np.where(signs == 0, 1.0, signs)
    vectors[PAD_ID] = 0.0
    sd = vectors.std()
    if sd > 0:
        vectors /= sd
    return EmbeddingTable(dim, dict(vocab.stoi), vectors,
                          {"source": f"ppmi-svd window={window}", "pad": "zero"})
