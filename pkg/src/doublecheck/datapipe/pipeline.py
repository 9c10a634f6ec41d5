"""The full curation pass: load, fill headers, filter, deduplicate, split."""
import json
import os
from dataclasses import dataclass, field

from .dedup import dedup
from .keywords import keyword_filter, length_filter
from .records import load_records, save_records
from .split import split
from .textrank import make_title, textrank_summarize

SUMMARY_SENTENCES = 3


def fill_headers(records):
    """Generate missing titles and summaries from the body text."""
    out = []
    for r in records:
        changes = {}
        if not r.title and r.text:
            changes["title"] = make_title(r.text)
        if not r.summary and r.text:
            changes["summary"] = textrank_summarize(r.text, SUMMARY_SENTENCES)
        out.append(r.replace(**changes) if changes else r)
    return out


@dataclass
class CurationResult:
    records: list
    split: object
    duplicate_groups: list
    counts: dict = field(default_factory=dict)

    def report(self):
        return "\n".join(f"{k}={v}" for k, v in self.counts.items())


def curate(records, keywords, min_chars=80, threshold=0.8, seed=0, stratify=True):
    counts = {"loaded": len(records)}
    records = fill_headers(records)
    records, _ = keyword_filter(records, keywords)
    counts["after_keyword_filter"] = len(records)
    records, _ = length_filter(records, min_chars)
    counts["after_length_filter"] = len(records)
    records, groups = dedup(records, threshold)
    counts["after_dedup"] = len(records)
    counts["duplicate_groups"] = len(groups)
    parts = split(records, seed=seed, stratify=stratify) if len(records) >= 5 else None
    if parts is not None:
        counts.update(train=len(parts.train), test=len(parts.test), validation=len(parts.validation))
    return CurationResult(records, parts, groups, counts)


def write_curation(result, out_dir, fmt="csv"):
    os.makedirs(out_dir, exist_ok=True)
    ext = "jsonl" if fmt == "jsonl" else "csv"
    save_records(result.records, os.path.join(out_dir, f"curated.{ext}"), fmt)
    if result.split is not None:
        for name, part in result.split.parts().items():
            save_records(part, os.path.join(out_dir, f"{name}.{ext}"), fmt)
    with open(os.path.join(out_dir, "dedup_audit.jsonl"), "w", encoding="utf-8") as fh:
        for g in result.duplicate_groups:
            fh.write(json.dumps(g.to_dict(), ensure_ascii=False) + "\n")
    with open(os.path.join(out_dir, "curate_report.txt"), "w", encoding="utf-8") as fh:
        fh.write(result.report() + "\n")


def curate_file(path, out_dir, keywords, fmt=None, **kw):
    records = load_records(path, fmt)
    result = curate(records, keywords, **kw)
    write_curation(result, out_dir, fmt or ("jsonl" if str(path).endswith(".jsonl") else "csv"))
    return result
