"""Model checkpoints as ``.npz`` archives: little-endian float64 parameters plus a JSON header."""
import json
import os

import numpy as np

from .datapipe.vocab import CharVocab
from .errors import FormatError
from .model import DoubleCheckModel, ModelConfig

FORMAT = "doublecheck-checkpoint"
VERSION = 1
_META = "__meta__"
_PREFIX = "param/"


def save_checkpoint(path, model, vocab, extra=None):
    """Write ``model`` and its ``vocab``; ``extra`` is any JSON-serializable dict."""
    meta = {"format": FORMAT, "version": VERSION, "config": model.config.to_dict(),
            "vocab": vocab.to_list(), "extra": extra or {}}
    arrays = {_PREFIX + name: np.ascontiguousarray(p.data, dtype="<f8") for name, p in model.params.items()}
    arrays[_META] = np.frombuffer(json.dumps(meta, ensure_ascii=False, sort_keys=True).encode("utf-8"),
                                  dtype=np.uint8)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        np.savez(fh, **arrays)
    os.replace(tmp, path)


def load_checkpoint(path):
    """Return ``(model, vocab, extra)``."""
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise FormatError(f"{path}: not a checkpoint archive ({exc})") from None
    with archive:
        if _META not in archive.files:
            raise FormatError(f"{path}: missing checkpoint header")
        meta = json.loads(archive[_META].tobytes().decode("utf-8"))
        if meta.get("format") != FORMAT or meta.get("version") != VERSION:
            raise FormatError(f"{path}: unsupported checkpoint {meta.get('format')} v{meta.get('version')}")
        config = ModelConfig.from_dict(meta["config"])
        vocab = CharVocab.from_list(meta["vocab"])
        if len(vocab) != config.vocab_size:
            raise FormatError(f"{path}: vocabulary has {len(vocab)} entries, config says {config.vocab_size}")
        state = {k[len(_PREFIX):]: archive[k].astype(np.float64) for k in archive.files if k.startswith(_PREFIX)}
    model = DoubleCheckModel(config, seed=0)
    missing = set(model.params) - set(state)
    if missing:
        raise FormatError(f"{path}: missing parameters {sorted(missing)}")
    model.load_state_dict(state)
    return model, vocab, meta.get("extra", {})
