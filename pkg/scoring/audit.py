"""
Annotation audit for SL datasets.

Rules (by id):
- ambiguous-numeric: the user utterance is a single integer and the ontology
  has two or more numeric-kind slots it could fill
- pm-variants: time values annotated in more than one style ("8 pm",
  "9 p.m.", or the marker left outside the span)
- leading-function-word: for one slot, some labels include a leading
  "at"/"on"/"the" while others leave the same word just outside the span
- people-noun: people values with the trailing noun ("4 people") coexist
  with bare numbers ("4") in the same slot
- slot-pair-ambiguity (off by default): declared slot pairs labelled with
  the same value, or labelled as one member while the other was requested

Inconsistency rules look for disagreement inside the dataset; a style that
is used everywhere is never flagged. The auditor never modifies the dataset.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from collections.abc import Callable, Iterable
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from django.core.exceptions import ValidationError

from corpus.loaders import SLDataset
from corpus.types import DialogTurn, SpanLabel

logger = logging.getLogger(__name__)

AMBIGUITY = "ambiguity"
INCONSISTENCY = "inconsistency"
SEVERITIES = (AMBIGUITY, INCONSISTENCY)

FUNCTION_WORDS = ("at", "on", "the")

_BARE_INTEGER = re.compile(r"\d+")
_PM_PLAIN = re.compile(r"\d\s*[ap]m$", re.IGNORECASE)
_PM_DOTTED = re.compile(r"\d\s*[ap]\.m\.?$", re.IGNORECASE)
_MARKER_AFTER = re.compile(r"\s*[ap]\.?m\b\.?", re.IGNORECASE)
_NUMBER_NOUN = re.compile(r"(\d+)\s+([^\W\d_]+)")


@dataclass(frozen=True)
class AuditFinding:
    rule: str
    turn_id: str
    slot: Optional[str]
    evidence: str
    severity: str
    reason: str = ""
    rule_version: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AuditReport:
    dataset: str
    rules: tuple[str, ...]
    findings: list[AuditFinding] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        tally = Counter(f.rule for f in self.findings)
        return {rule: tally.get(rule, 0) for rule in self.rules}

    def __len__(self) -> int:
        return len(self.findings)

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "rules": list(self.rules),
            "rule_versions": {rule: RULES[rule].version for rule in self.rules},
            "counts": self.counts,
            "total": len(self.findings),
            "findings": [f.to_dict() for f in self.findings],
        }


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------


def _labels(ds: SLDataset, slots: Iterable[str]) -> list[tuple[DialogTurn, SpanLabel]]:
    wanted = set(slots)
    return [(turn, label) for turn in ds.turns for label in turn.gold_labels if label.slot in wanted]


def find_ambiguous_numeric(ds: SLDataset) -> list[AuditFinding]:
    numeric = ds.ontology.numeric_slots
    if len(numeric) < 2:
        return []
    findings = []
    for turn in ds.turns:
        text = turn.user_text.strip()
        if _BARE_INTEGER.fullmatch(text):
            findings.append(
                AuditFinding(
                    rule="ambiguous-numeric",
                    turn_id=turn.turn_id,
                    slot=None,
                    evidence=text,
                    severity=AMBIGUITY,
                    reason=f"bare number could fill any of {', '.join(numeric)}",
                )
            )
    return findings


def _time_slots(ds: SLDataset) -> tuple[str, ...]:
    slots = ds.ontology.slots_of_kind("time")
    return slots or tuple(name for name in ds.ontology.slot_names if "time" in name)


def _pm_style(turn: DialogTurn, label: SpanLabel) -> Optional[str]:
    value = label.value.strip()
    if _PM_DOTTED.search(value):
        return "dotted"
    if _PM_PLAIN.search(value):
        return "plain"
    if value[-1:].isdigit() and _MARKER_AFTER.match(turn.user_text, label.end):
        return "marker-outside-span"
    return None


def find_pm_variants(ds: SLDataset) -> list[AuditFinding]:
    styled = [
        (turn, label, style)
        for turn, label in _labels(ds, _time_slots(ds))
        if (style := _pm_style(turn, label)) is not None
    ]
    styles = sorted({style for _, _, style in styled})
    if len(styles) < 2:
        return []
    reason = f"time values annotated in {len(styles)} styles: {', '.join(styles)}"
    return [
        AuditFinding("pm-variants", turn.turn_id, label.slot, label.value, INCONSISTENCY, f"{style}; {reason}")
        for turn, label, style in styled
    ]


def _word_before(text: str, start: int) -> Optional[str]:
    match = re.search(r"(?:^|\s)([^\W\d_]+)\s+$", text[:start])
    return match.group(1).lower() if match else None


def _leading_word(value: str) -> Optional[str]:
    head, _, rest = value.partition(" ")
    head = head.lower()
    return head if rest and head in FUNCTION_WORDS else None


def find_leading_function_words(ds: SLDataset) -> list[AuditFinding]:
    order = _order(ds)
    findings = []
    for slot in ds.ontology.slot_names:
        sides: dict[str, list] = {w: [] for w in FUNCTION_WORDS}
        for turn, label in _labels(ds, (slot,)):
            word = _leading_word(label.value)
            if word is not None:
                sides[word].append((turn, label, "included in"))
            elif (word := _word_before(turn.user_text, label.start)) in FUNCTION_WORDS:
                sides[word].append((turn, label, "left outside"))
        for word, flagged in sides.items():
            if len({side for _, _, side in flagged}) < 2:
                continue
            for turn, label, side in sorted(flagged, key=lambda item: order[item[0].turn_id]):
                findings.append(
                    AuditFinding(
                        "leading-function-word", turn.turn_id, slot, label.value, INCONSISTENCY,
                        f'"{word}" {side} the span; {slot} labels disagree on "{word}"',
                    )
                )
    return findings


def _people_slots(ds: SLDataset) -> tuple[str, ...]:
    slots = ds.ontology.slots_of_kind("number")
    return slots or tuple(name for name in ds.ontology.slot_names if "people" in name)


def find_people_nouns(ds: SLDataset) -> list[AuditFinding]:
    order = _order(ds)
    findings = []
    for slot in _people_slots(ds):
        with_noun, bare = [], []
        for turn, label in _labels(ds, (slot,)):
            value = label.value.strip()
            if match := _NUMBER_NOUN.fullmatch(value):
                with_noun.append((turn, label, f'noun "{match.group(2).lower()}" included'))
            elif _BARE_INTEGER.fullmatch(value):
                following = re.match(r"\s+([^\W\d_]+)", turn.user_text[label.end:])
                note = f'"{following.group(1).lower()}" left outside' if following else "bare number"
                bare.append((turn, label, note))
        if not with_noun or not bare:
            continue
        for turn, label, note in sorted(with_noun + bare, key=lambda item: order[item[0].turn_id]):
            findings.append(
                AuditFinding(
                    "people-noun", turn.turn_id, slot, label.value, INCONSISTENCY,
                    f"{note}; {slot} labels disagree on the trailing noun",
                )
            )
    return findings


def find_slot_pair_ambiguity(ds: SLDataset) -> list[AuditFinding]:
    findings = []
    for first, second in ds.ontology.slot_pairs:
        for turn in ds.turns:
            a, b = turn.label_for(first), turn.label_for(second)
            if a is not None and b is not None and a.value.lower() == b.value.lower():
                findings.append(
                    AuditFinding(
                        "slot-pair-ambiguity", turn.turn_id, first, a.value, AMBIGUITY,
                        f"{first} and {second} share the value",
                    )
                )
                continue
            for labelled, other in ((a, second), (b, first)):
                if labelled is not None and other in turn.requested_slots and labelled.slot not in turn.requested_slots:
                    findings.append(
                        AuditFinding(
                            "slot-pair-ambiguity", turn.turn_id, labelled.slot, labelled.value, AMBIGUITY,
                            f"labelled {labelled.slot} while {other} was requested",
                        )
                    )
    return findings


def _order(ds: SLDataset) -> dict[str, int]:
    return {turn.turn_id: i for i, turn in enumerate(ds.turns)}


@dataclass(frozen=True)
class Rule:
    id: str
    check: Callable[[SLDataset], list[AuditFinding]]
    severity: str
    default: bool = True
    version: int = 1
    summary: str = ""


RULES: dict[str, Rule] = {
    rule.id: rule
    for rule in (
        Rule("ambiguous-numeric", find_ambiguous_numeric, AMBIGUITY, summary="single-number utterances"),
        Rule("pm-variants", find_pm_variants, INCONSISTENCY, summary="pm / p.m. / unlabelled marker"),
        Rule("leading-function-word", find_leading_function_words, INCONSISTENCY,
             summary="at / on / the inside vs outside spans"),
        Rule("people-noun", find_people_nouns, INCONSISTENCY, version=2, summary='"4 people" vs "4"'),
        Rule("slot-pair-ambiguity", find_slot_pair_ambiguity, AMBIGUITY, default=False,
             summary="declared slot pairs with interchangeable values"),
    )
}
DEFAULT_RULES = tuple(rule_id for rule_id, rule in RULES.items() if rule.default)
INCONSISTENCY_RULES = tuple(rule_id for rule_id, rule in RULES.items() if rule.severity == INCONSISTENCY)


def resolve_rules(rules: Optional[Iterable[str] | str] = None) -> tuple[str, ...]:
    """Rule ids in registry order; accepts a comma-separated string, "all" or "default"."""
    if rules is None:
        return DEFAULT_RULES
    if isinstance(rules, str):
        rules = [r.strip() for r in rules.split(",") if r.strip()]
    requested = set()
    for rule in rules:
        if rule == "all":
            requested.update(RULES)
        elif rule == "default":
            requested.update(DEFAULT_RULES)
        elif rule in RULES:
            requested.add(rule)
        else:
            raise ValidationError(f"unknown audit rule {rule!r}; choose from {', '.join(RULES)}")
    return tuple(rule_id for rule_id in RULES if rule_id in requested)


def _run(ds: SLDataset, rule_ids: tuple[str, ...]) -> list[AuditFinding]:
    findings = []
    for rule_id in rule_ids:
        rule = RULES[rule_id]
        found = rule.check(ds)
        findings.extend(replace(f, rule_version=rule.version) for f in found)
        logger.info("Audit rule %s: %d findings", rule_id, len(found))
    return findings


def find_inconsistencies(ds: SLDataset, rules: Optional[Iterable[str] | str] = None) -> list[AuditFinding]:
    """Findings of the enabled inconsistency rules (all of them when `rules` is None)."""
    rule_ids = INCONSISTENCY_RULES if rules is None else resolve_rules(rules)
    return _run(ds, tuple(r for r in rule_ids if r in INCONSISTENCY_RULES))


def audit(ds: SLDataset, rules: Optional[Iterable[str] | str] = None) -> AuditReport:
    rule_ids = resolve_rules(rules)
    return AuditReport(dataset=ds.name, rules=rule_ids, findings=_run(ds, rule_ids))


def render_findings(report: AuditReport) -> str:
    lines = [f"{report.dataset}: {len(report)} findings"]
    for rule, count in report.counts.items():
        lines.append(f"  {rule:<24} {count:>5}")
    if report.findings:
        lines.append("")
        lines.append(f"{'rule':<24} {'turn':<16} {'slot':<12} evidence")
        for f in report.findings:
            lines.append(f"{f.rule:<24} {f.turn_id:<16} {f.slot or '-':<12} {f.evidence!r}")
    return "\n".join(lines)
