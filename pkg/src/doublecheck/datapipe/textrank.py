"""Extractive summaries via TextRank over a sentence-overlap graph."""
import math
import re

import numpy as np

from ..errors import DomainError
from .records import normalize

# CJK terminators split anywhere; Latin ones only before whitespace or end
_SENTENCE = re.compile(r".+?(?:[。！？；!?;…]+[”’」』\"')]*|\.+(?=\s|$)|\n|$)", re.S)
_TOKEN = re.compile(r"[A-Za-z0-9]+|[^\W_]")

DAMPING = 0.85
TOL = 1e-6
MAX_ITER = 100


def split_sentences(text):
    out = []
    for m in _SENTENCE.finditer(normalize(text)):
        s = m.group(0).strip()
        if s:
            out.append(s)
    return out


def sentence_tokens(sentence):
    """Latin words (lower-cased) and single CJK characters."""
    return [t.lower() for t in _TOKEN.findall(sentence)]


def overlap_similarity(a, b):
    """``|shared tokens| / (log|a| + log|b|)``; the denominator is floored at 1."""
    if not a or not b:
        return 0.0
    shared = len(set(a) & set(b))
    if shared == 0:
        return 0.0
    den = math.log(len(a)) + math.log(len(b))
    return shared / max(den, 1.0)


def pagerank(weights, damping=DAMPING, tol=TOL, max_iter=MAX_ITER):
    """Weighted PageRank by power iteration; rows with no edges spread uniformly."""
    w = np.asarray(weights, dtype=np.float64)
    n = w.shape[0]
    out = w.sum(axis=1)
    trans = np.where(out[:, None] > 0, w / np.where(out > 0, out, 1.0)[:, None], 1.0 / n)
    scores = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = (1.0 - damping) / n + damping * (trans.T @ scores)
        delta = np.abs(nxt - scores).sum()
        scores = nxt
        if delta < tol:
            break
    return scores


def rank_sentences(sentences):
    toks = [sentence_tokens(s) for s in sentences]
    n = len(sentences)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            w[i, j] = w[j, i] = overlap_similarity(toks[i], toks[j])
    return pagerank(w)


def _join(sentences):
    out = ""
    for s in sentences:
        if out and (out[-1].isascii() or s[0].isascii()):
            out += " "
        out += s
    return out


def textrank_summarize(text, k_sentences=1):
    """Top ``k_sentences`` by score, emitted in their original order."""
    sentences = split_sentences(text)
    if not sentences:
        raise DomainError("cannot summarize an empty text")
    if len(sentences) <= k_sentences:
        return _join(sentences)
    scores = rank_sentences(sentences)
    top = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))[:k_sentences]
    return _join([sentences[i] for i in sorted(top)])


def make_title(text, max_chars=40):
    title = textrank_summarize(text, 1)
    return title if len(title) <= max_chars else title[:max_chars].rstrip()
