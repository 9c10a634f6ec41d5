"""Topic keyword lists and the relevance filter."""
import json
import os
from dataclasses import dataclass
from importlib import resources

from ..errors import ConfigError
from .records import normalize

ENV_VAR = "DOUBLECHECK_KEYWORDS"


@dataclass
class KeywordConfig:
    categories: dict

    def __post_init__(self):
        cleaned = {}
        for name, words in self.categories.items():
            cleaned[name] = [normalize(w).casefold() for w in words if normalize(w)]
        if not any(cleaned.values()):
            raise ConfigError("keyword config has no non-empty keyword")
        self.categories = cleaned

    @classmethod
    def from_mapping(cls, data):
        """Build from ``{category: [words]}``.

        A ``"_zh"`` entry of the same shape holds original-language terms and
        is merged into the matching categories.
        """
        merged = {k: list(v) for k, v in data.items() if not k.startswith("_")}
        for slot, extra in data.items():
            if not slot.startswith("_"):
                continue
            if not isinstance(extra, dict):
                raise ConfigError(f"keyword slot {slot!r} must map categories to lists")
            for cat, words in extra.items():
                merged.setdefault(cat, []).extend(words)
        return cls(merged)

    def matches(self, text):
        """Names of the categories with at least one keyword in ``text``."""
        hay = normalize(text).casefold()
        return [cat for cat, words in self.categories.items() if any(w in hay for w in words)]


def default_keywords():
    raw = resources.files("doublecheck").joinpath("data/keywords.json").read_text(encoding="utf-8")
    return KeywordConfig.from_mapping(json.loads(raw))


def load_keywords(path=None):
    """Keywords from ``path``, else ``$DOUBLECHECK_KEYWORDS``, else the bundled list."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return default_keywords()
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid keyword JSON ({exc.msg})") from None
    if isinstance(data, list):
        data = {"keywords": data}
    return KeywordConfig.from_mapping(data)


def record_haystack(record):
    return "\n".join((record.title, record.summary, record.text))


def keyword_filter(records, kw):
    kept, dropped = [], []
    for r in records:
        (kept if kw.matches(record_haystack(r)) else dropped).append(r)
    return kept, dropped


def length_filter(records, min_chars=80):
    if min_chars < 1:
        raise ConfigError(f"min_chars must be >= 1, got {min_chars}")
    kept, dropped = [], []
    for r in records:
        (kept if r.char_length >= min_chars else dropped).append(r)
    return kept, dropped
