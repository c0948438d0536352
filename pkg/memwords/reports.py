"""Schema-checked JSON reports, CSV tables and Markdown summaries."""
from __future__ import annotations

import functools
import json
from pathlib import Path
from typing import Iterable, Optional

import pandas as pd
from jsonschema import validate

from .config import DOCS_DIR
from .markov_oracle import ExplicitChain, MemoryWordReport, chain_to_dict, delta_profile
from .seqcore import Word, format_word

SCHEMAS = {
    "stage_plan": "stage_plan_schema.json",
    "memory_report": "memory_report_schema.json",
    "run_manifest": "run_manifest_schema.json",
}


@functools.lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    """Load a JSON Schema from docs/."""
    if name not in SCHEMAS:
        raise ValueError(f"Unknown schema {name!r}; choose from {sorted(SCHEMAS)}")
    return json.loads((DOCS_DIR / SCHEMAS[name]).read_text(encoding="utf-8"))


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_json(path: str | Path, payload: dict, schema: str) -> Path:
    """Validate against docs/<schema> (jsonschema.ValidationError on mismatch), then write."""
    validate(instance=payload, schema=load_schema(schema))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload), encoding="utf-8")
    return path


def _cell(value):
    if isinstance(value, (list, tuple)):
        return ";".join(repr(float(v)) if isinstance(v, float) else str(v) for v in value)
    return value


def write_csv(path: str | Path, rows: Iterable[dict], columns: list[str]) -> Path:
    """One row per record; list-valued cells are ';'-joined."""
    frame = pd.DataFrame([{c: _cell(r.get(c)) for c in columns} for r in rows], columns=columns)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def _sorted_words(words: Iterable[Word]) -> list[str]:
    return [format_word(w) for w in sorted(words, key=lambda w: (len(w), w))]


def memory_report_to_dict(chain: ExplicitChain, report: MemoryWordReport, source: Optional[str] = None) -> dict:
    data = {
        "order": chain.order,
        "alphabet_size": chain.alphabet_size,
        "minimal_words": _sorted_words(report.minimal_words),
        "memory_words": _sorted_words(report.memory_words),
        "longest_minimal_length": report.longest_minimal_length,
        "shortest_memory_length": report.shortest_memory_length,
        "delta_profile": delta_profile(chain),
        "chain": chain_to_dict(chain),
    }
    if source is not None:
        data["source"] = source
    return data


def render_memory_markdown(data: dict) -> str:
    lines = [
        "# Memory words: " + data.get("source", "chain"),
        "",
        f"- Order (longest minimal memory word): {data['longest_minimal_length']}",
        f"- Shortest memory word: {data['shortest_memory_length']}",
        f"- Alphabet size: {data['alphabet_size']}",
        "",
        "## Minimal memory words",
    ]
    for w in data["minimal_words"]:
        lines.append(f"- `{w or '(empty)'}`")
    lines.extend(["", "## Discrepancies", "| k | delta_k |", "| --- | --- |"])
    for k, value in enumerate(data["delta_profile"]):
        lines.append(f"| {k} | {value:.6g} |")
    return "\n".join(lines) + "\n"


def render_plan_markdown(data: dict) -> str:
    status = "complete" if data["complete"] else "incomplete (search cap reached)"
    lines = [
        f"# Adversary plan vs {data['estimator'] or 'estimator'}",
        "",
        f"- Seed: {data['seed']}",
        f"- Status: {status}",
        "",
        "| stage | N_j | n_j | target | success | margin | draws |",
        "| --- | --- | --- | --- | --- | --- | --- |",
    ]
    for s in data["stages"]:
        def fmt(v):
            return "" if v is None else (f"{v:.4f}" if isinstance(v, float) else str(v))

        lines.append(
            f"| {s['index']} | {s['cutoff']} | {fmt(s['horizon'])} | {fmt(s['target'])} "
            f"| {fmt(s['success'])} | {fmt(s['margin'])} | {s['draws']} |"
        )
    bands = data["stages"][-1]["bands"] if data["stages"] else []
    if bands:
        lines.extend(["", "## Folded bands of the delivered relabeling"])
        for b in bands:
            lines.append(f"- states {b['start']}..{b['end']} -> letters {b['images'][0]}..{b['images'][1]}")
    return "\n".join(lines) + "\n"
