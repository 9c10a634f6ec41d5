"""Character vocabulary and fixed-length tokenization."""
from collections import Counter

import numpy as np

from ..errors import DegenerateInputError
from .records import normalize

PAD, UNK = "<pad>", "<unk>"
PAD_ID, UNK_ID = 0, 1


class CharVocab:
    def __init__(self, chars=()):
        self.itos = [PAD, UNK]
        self.stoi = {PAD: PAD_ID, UNK: UNK_ID}
        for ch in chars:
            self.add(ch)

    def add(self, token):
        if token not in self.stoi:
            self.stoi[token] = len(self.itos)
            self.itos.append(token)
        return self.stoi[token]

    def __len__(self):
        return len(self.itos)

    def __contains__(self, token):
        return token in self.stoi

    @classmethod
    def build(cls, texts, min_freq=1, max_size=None):
        """Characters ordered by descending frequency, ties by code point."""
        counts = Counter()
        for t in texts:
            counts.update(normalize(t))
        items = sorted((c for c, n in counts.items() if n >= min_freq), key=lambda c: (-counts[c], c))
        if max_size is not None:
            items = items[:max(0, max_size - 2)]
        return cls(items)

    def to_list(self):
        return list(self.itos)

    @classmethod
    def from_list(cls, tokens):
        v = cls()
        for t in tokens[2:]:
            v.add(t)
        return v

    def decode(self, ids):
        return "".join(self.itos[i] for i in ids if i != PAD_ID)


def tokenize_chars(text, vocab, max_len=256):
    text = normalize(text)
    if not text:
        raise DegenerateInputError("cannot tokenize an empty text")
    ids = np.full(max_len, PAD_ID, dtype=np.int64)
    chars = text[:max_len]
    ids[:len(chars)] = [vocab.stoi.get(c, UNK_ID) for c in chars]
    return ids


def encode_records(records, vocab, max_len=256):
    """``(ids, labels)`` arrays ready for training or scoring."""
    ids = np.stack([tokenize_chars(r.text, vocab, max_len) for r in records]) if records \
        else np.zeros((0, max_len), dtype=np.int64)
    labels = np.array([r.label for r in records], dtype=np.int64)
    return ids, labels
