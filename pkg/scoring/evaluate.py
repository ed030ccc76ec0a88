"""
Exact-span slot F1.

Each (turn, slot) gets exactly one outcome:
- TP: gold and prediction cover the same character range
- FN: gold present, no-answer predicted
- FP: no gold, span predicted
- TN: no gold, no-answer predicted
- WrongSpan: gold and prediction differ; counts as one FP and one FN

Per slot P = TP / (TP + FP), R = TP / (TP + FN), F1 = 2PR / (P + R); a zero
denominator scores 0 and is flagged. Macro F1 is the unweighted mean over
the ontology's slots.
"""

from __future__ import annotations

import enum
import statistics
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from typing import Optional

from corpus.exceptions import MissingPredictionsError
from corpus.loaders import SLDataset
from corpus.reformulate import qid_for
from corpus.types import DialogTurn, SpanLabel, SpanPrediction


class Outcome(str, enum.Enum):
    TP = "TP"
    FP = "FP"
    FN = "FN"
    TN = "TN"
    WRONG_SPAN = "WrongSpan"


@dataclass(frozen=True)
class SlotOutcome:
    turn_id: str
    slot: str
    category: Outcome


def classify(pred: SpanPrediction, gold: Optional[SpanLabel]) -> Outcome:
    predicted = not pred.is_no_answer
    if gold is None:
        return Outcome.FP if predicted else Outcome.TN
    if not predicted:
        return Outcome.FN
    if (pred.start, pred.end) == (gold.start, gold.end):
        return Outcome.TP
    return Outcome.WRONG_SPAN


@dataclass
class SlotMetrics:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    wrong_span: int = 0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    flags: list[str] = field(default_factory=list)

    def add(self, outcome: Outcome):
        if outcome is Outcome.TP:
            self.tp += 1
        elif outcome is Outcome.FP:
            self.fp += 1
        elif outcome is Outcome.FN:
            self.fn += 1
        elif outcome is Outcome.TN:
            self.tn += 1
        else:
            self.wrong_span += 1

    def finalize(self):
        predicted = self.tp + self.fp + self.wrong_span
        gold = self.tp + self.fn + self.wrong_span
        self.flags = []
        if predicted:
            self.precision = self.tp / predicted
        else:
            self.precision = 0.0
            self.flags.append("no-predictions")
        if gold:
            self.recall = self.tp / gold
        else:
            self.recall = 0.0
            self.flags.append("no-gold")
        if self.precision + self.recall:
            self.f1 = 2 * self.precision * self.recall / (self.precision + self.recall)
        else:
            self.f1 = 0.0
            self.flags.append("zero-f1-denominator")

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "wrong_span": self.wrong_span,
            "flags": list(self.flags),
        }


@dataclass
class MetricsReport:
    dataset: str
    per_slot: dict[str, SlotMetrics]
    macro_f1: float
    turns: int
    subset: Optional[str] = None
    subsets: dict[str, "MetricsReport"] = field(default_factory=dict)

    @property
    def counts(self) -> dict[str, int]:
        totals = {"tp": 0, "fp": 0, "fn": 0, "tn": 0, "wrong_span": 0}
        for metrics in self.per_slot.values():
            for key in totals:
                totals[key] += getattr(metrics, key)
        return totals

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "subset": self.subset,
            "turns": self.turns,
            "macro_f1": self.macro_f1,
            "per_slot": {slot: m.to_dict() for slot, m in self.per_slot.items()},
            "counts": self.counts,
            "subsets": {name: report.to_dict() for name, report in self.subsets.items()},
        }


TurnFilter = Callable[[DialogTurn], bool]


def has_requested(turn: DialogTurn) -> bool:
    return bool(turn.requested_slots)


SUBSET_FILTERS: dict[str, TurnFilter] = {"requested": has_requested}


def index_predictions(preds: Iterable[SpanPrediction]) -> dict[str, SpanPrediction]:
    if isinstance(preds, Mapping):
        return dict(preds)
    return {p.qid: p for p in preds}


def outcomes(preds: Mapping[str, SpanPrediction], ds: SLDataset, subset_filter: Optional[TurnFilter] = None):
    missing = []
    result = []
    for turn in ds.turns:
        if subset_filter is not None and not subset_filter(turn):
            continue
        for slot in ds.ontology.slot_names:
            qid = qid_for(turn.turn_id, slot)
            pred = preds.get(qid)
            if pred is None:
                missing.append(qid)
                continue
            result.append(SlotOutcome(turn.turn_id, slot, classify(pred, turn.label_for(slot))))
    if missing:
        raise MissingPredictionsError(missing)
    return result


def evaluate(
    preds: Iterable[SpanPrediction] | Mapping[str, SpanPrediction],
    ds: SLDataset,
    subset_filter: Optional[TurnFilter] = None,
    subset_name: Optional[str] = None,
) -> MetricsReport:
    indexed = index_predictions(preds)
    per_slot = {slot: SlotMetrics() for slot in ds.ontology.slot_names}
    for outcome in outcomes(indexed, ds, subset_filter):
        per_slot[outcome.slot].add(outcome.category)
    n_turns = sum(1 for turn in ds.turns if subset_filter is None or subset_filter(turn))
    for metrics in per_slot.values():
        metrics.finalize()
    macro = sum(m.f1 for m in per_slot.values()) / len(per_slot) if per_slot else 0.0
    return MetricsReport(
        dataset=ds.name,
        per_slot=per_slot,
        macro_f1=macro,
        turns=n_turns,
        subset=subset_name,
    )


def evaluate_with_subsets(
    preds: Iterable[SpanPrediction] | Mapping[str, SpanPrediction],
    ds: SLDataset,
    subsets: Optional[Mapping[str, TurnFilter]] = None,
) -> MetricsReport:
    indexed = index_predictions(preds)
    report = evaluate(indexed, ds)
    for name, subset_filter in (subsets if subsets is not None else SUBSET_FILTERS).items():
        report.subsets[name] = evaluate(indexed, ds, subset_filter, subset_name=name)
    return report


def average_reports(reports: Iterable[MetricsReport]) -> dict:
    """Mean and standard deviation of macro and per-slot F1 across repeated runs."""
    reports = list(reports)
    if not reports:
        return {"runs": 0, "macro_f1_mean": 0.0, "macro_f1_std": 0.0, "per_slot": {}}

    def stats(values: list[float]) -> tuple[float, float]:
        return statistics.fmean(values), statistics.pstdev(values) if len(values) > 1 else 0.0

    macro_mean, macro_std = stats([r.macro_f1 for r in reports])
    per_slot = {}
    for slot in reports[0].per_slot:
        mean, std = stats([r.per_slot[slot].f1 for r in reports])
        per_slot[slot] = {"f1_mean": mean, "f1_std": std}
    return {"runs": len(reports), "macro_f1_mean": macro_mean, "macro_f1_std": macro_std, "per_slot": per_slot}


def render_table(report: MetricsReport) -> str:
    title = f"{report.dataset}" + (f" [{report.subset}]" if report.subset else "")
    lines = [
        f"{title}: {report.turns} turns",
        f"{'slot':<16} {'P':>7} {'R':>7} {'F1':>7} {'TP':>5} {'FP':>5} {'FN':>5} {'WS':>5}  flags",
    ]
    for slot, m in report.per_slot.items():
        lines.append(
            f"{slot:<16} {m.precision:>7.4f} {m.recall:>7.4f} {m.f1:>7.4f} "
            f"{m.tp:>5} {m.fp:>5} {m.fn:>5} {m.wrong_span:>5}  {','.join(m.flags)}"
        )
    lines.append(f"{'macro F1':<16} {'':>7} {'':>7} {report.macro_f1:>7.4f}")
    for subset in report.subsets.values():
        lines.append("")
        lines.append(render_table(subset))
    return "\n".join(lines)
