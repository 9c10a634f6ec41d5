"""Ingestion and curation of labeled news records."""
from .dedup import DuplicateGroup, bigram_counts, dedup, similar_pairs, similarity
from .embeddings import EmbeddingTable, cooccurrence_embeddings, load_embeddings
from .keywords import KeywordConfig, default_keywords, keyword_filter, length_filter, load_keywords
from .pipeline import CurationResult, curate, curate_file, fill_headers, write_curation
from .records import FIELDS, NewsRecord, id_sort_key, load_records, normalize, save_records
from .split import DatasetSplit, split, split_sizes
from .stats import DatasetStats, LengthStats, stats
from .textrank import split_sentences, textrank_summarize
from .vocab import PAD_ID, UNK_ID, CharVocab, encode_records, tokenize_chars

__all__ = [
    "FIELDS", "PAD_ID", "UNK_ID", "CharVocab", "CurationResult", "DatasetSplit", "DatasetStats",
    "DuplicateGroup", "EmbeddingTable", "KeywordConfig", "cooccurrence_embeddings", "LengthStats", "NewsRecord", "bigram_counts",
    "curate", "curate_file", "dedup", "default_keywords", "encode_records", "fill_headers", "id_sort_key",
    "keyword_filter", "length_filter", "load_embeddings", "load_keywords", "load_records", "normalize",
    "save_records", "similar_pairs", "similarity", "split", "split_sentences", "split_sizes", "stats",
    "textrank_summarize", "tokenize_chars", "write_curation",
]
