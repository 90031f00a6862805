"""Rubric-score ingestion, exact mean aggregation, and question-alignment checks."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .errors import EmptyScoreSet, InvalidScore, LengthMismatch
from .types import EVAL_METRICS, RubricScore

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class MetricMean:
    mean: Fraction
    n: int


def load_scores(path: Path | str) -> list[RubricScore]:
    """Read score records from a JSONL file or every *.jsonl/*.json file in a
    directory; one JSON object per line: {dialogue_id, model_name, scores}."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix in (".jsonl", ".json"))
    else:
        files = [path]
    records: list[RubricScore] = []
    for file in files:
        for lineno, line in enumerate(file.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                records.append(
                    RubricScore(
                        dialogue_id=raw["dialogue_id"],
                        model_name=raw["model_name"],
                        scores=dict(raw["scores"]),
                    )
                )
            except InvalidScore:
                raise
            except (ValueError, KeyError, TypeError) as exc:
                raise InvalidScore(f"{file.name}:{lineno}: bad score record: {exc}") from exc
    return records


def aggregate(scores: list[RubricScore]) -> dict[str, dict[str, MetricMean]]:
    """Exact per-model, per-metric means as Fractions, with the record count
    behind each mean."""
    if not scores:
        raise EmptyScoreSet("no score records")
    sums: dict[str, dict[str, list[int]]] = {}
    for record in scores:
        per_model = sums.setdefault(record.model_name, {m: [0, 0] for m in EVAL_METRICS})
        for metric, value in record.scores.items():
            per_model[metric][0] += value
            per_model[metric][1] += 1
    out: dict[str, dict[str, MetricMean]] = {}
    for model, per_metric in sums.items():
        out[model] = {}
        for metric in EVAL_METRICS:
            total, n = per_metric[metric]
            if n:
                out[model][metric] = MetricMean(mean=Fraction(total, n), n=n)
    return out


def format_mean(value: Fraction) -> str:
    """Render a non-negative mean to exactly 3 decimals, half-up, no floats."""
    if value < 0:
        raise ValueError("means are non-negative")
    scaled = value * 1000
    q, r = divmod(scaled.numerator, scaled.denominator)
    if 2 * r >= scaled.denominator:
        q += 1
    return f"{q // 1000}.{q % 1000:03d}"


def render_table(aggregates: dict[str, dict[str, MetricMean]]) -> str:
    """Markdown: one row per model with the six metric means, then the
    per-cell record counts in a companion table."""
    header = "| model | " + " | ".join(EVAL_METRICS) + " |"
    divider = "| --- |" + " --- |" * len(EVAL_METRICS)
    lines = [header, divider]
    for model in sorted(aggregates):
        cells = [
            format_mean(aggregates[model][m].mean) if m in aggregates[model] else "-"
            for m in EVAL_METRICS
        ]
        lines.append(f"| {model} | " + " | ".join(cells) + " |")
    lines.append("")
    lines.append("Records per cell:")
    lines.append("")
    lines.extend([header, divider])
    for model in sorted(aggregates):
        counts = [
            str(aggregates[model][m].n) if m in aggregates[model] else "0"
            for m in EVAL_METRICS
        ]
        lines.append(f"| {model} | " + " | ".join(counts) + " |")
    return "\n".join(lines)


# -- question alignment -----------------------------------------------------------

@dataclass(frozen=True, slots=True)
class AlignmentEntry:
    dialogue_index: int
    model_a: str
    model_b: str
    similarity: float
    flagged: bool


@dataclass(frozen=True, slots=True)
class AlignmentReport:
    threshold: float
    entries: tuple[AlignmentEntry, ...]

    @property
    def flagged(self) -> tuple[AlignmentEntry, ...]:
        return tuple(e for e in self.entries if e.flagged)


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def similarity(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def check_alignment(runs: dict[str, list[list[str]]], threshold: float = 0.8) -> AlignmentReport:
    """Compare question sequences across models, dialogue index by dialogue
    index; pairs whose similarity falls below the threshold are flagged."""
    models = sorted(runs)
    if len(models) < 2:
        raise LengthMismatch("need at least two models to compare")
    counts = {m: len(runs[m]) for m in models}
    if len(set(counts.values())) != 1:
        raise LengthMismatch(f"dialogue counts differ: {counts}")
    entries: list[AlignmentEntry] = []
    n_dialogues = counts[models[0]]
    for i in range(n_dialogues):
        for a_idx in range(len(models)):
            for b_idx in range(a_idx + 1, len(models)):
                model_a, model_b = models[a_idx], models[b_idx]
                sim = similarity("\n".join(runs[model_a][i]), "\n".join(runs[model_b][i]))
                entries.append(AlignmentEntry(
                    dialogue_index=i,
                    model_a=model_a,
                    model_b=model_b,
                    similarity=sim,
                    flagged=sim < threshold,
                ))
    return AlignmentReport(threshold=threshold, entries=tuple(entries))


def load_runs(path: Path | str) -> dict[str, list[list[str]]]:
    """One `<model>.json` per model: a JSON array of dialogues, each either a
    list of question strings or an object with a `questions` list."""
    path = Path(path)
    runs: dict[str, list[list[str]]] = {}
    for file in sorted(path.glob("*.json")):
        raw = json.loads(file.read_text(encoding="utf-8"))
        dialogues: list[list[str]] = []
        for dialogue in raw:
            if isinstance(dialogue, dict):
                dialogue = dialogue["questions"]
            dialogues.append([str(q) for q in dialogue])
        runs[file.stem] = dialogues
    return runs


# -- rubric -------------------------------------------------------------------------

def load_rubric() -> dict:
    text = resources.files("duma").joinpath("data/rubric.json").read_text(encoding="utf-8")
    return json.loads(text)


def render_rubric_instructions() -> str:
    rubric = load_rubric()
    lines = ["Score each dialogue on every metric: 2 full, 1 partial, 0 none.", ""]
    for metric in EVAL_METRICS:
        entry = rubric[metric]
        lines.append(f"{metric} - {entry['summary']}")
        for score in ("2", "1", "0"):
            lines.append(f"  {score}: {entry['levels'][score]}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
