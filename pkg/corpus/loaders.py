"""
SL dataset containers, the native JSON format, and SL → QA conversion.

Native SL JSON (UTF-8, offsets are code-point indices into user_text):

    {
      "name": "restaurants8k",
      "slots": {"date": ["What date?"], "time": {"questions": ["What time?"], "kind": "time"}},
      "separator_token": "<s>",
      "slot_pairs": [["pickup_date", "dropoff_date"]],
      "turns": [
        {"turn_id": "t1", "system_text": null, "user_text": "...",
         "requested_slots": [], "labels": [{"slot": "time", "start": 3, "end": 7, "value": "8 pm"}]}
      ]
    }

docs/sl_format.md documents every field.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

from django.core.exceptions import ValidationError

from .reformulate import PromptSpec, turn_to_qa
from .types import ContextMode, DialogTurn, QAExample, SlotOntology, validate_turn

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SLDataset:
    ontology: SlotOntology
    turns: tuple[DialogTurn, ...]
    name: str = "dataset"

    def __post_init__(self):
        object.__setattr__(self, "turns", tuple(self.turns))

    def __len__(self) -> int:
        return len(self.turns)

    def violations(self):
        found = []
        for turn in self.turns:
            found.extend(validate_turn(turn, self.ontology))
        return found


@dataclass(frozen=True)
class QADataset:
    examples: tuple[QAExample, ...]
    name: str = "qa"

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        seen = set()
        dupes = []
        for ex in self.examples:
            if ex.qid in seen:
                dupes.append(ex.qid)
            seen.add(ex.qid)
        if dupes:
            raise ValidationError([f"duplicate qid {qid!r}" for qid in dupes[:20]])

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)


def _require(data: Mapping, key: str, where: str, kind):
    if key not in data:
        raise ValidationError(f"{where}{key}: required")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, kind):
        kinds = kind if isinstance(kind, tuple) else (kind,)
        raise ValidationError(f"{where}{key}: expected {' or '.join(k.__name__ for k in kinds)}")
    return value


def _parse_turn(raw: Any, index: int) -> DialogTurn:
    where = f"turns[{index}]."
    if not isinstance(raw, Mapping):
        raise ValidationError(f"turns[{index}]: expected object")
    _require(raw, "turn_id", where, (str, int))
    _require(raw, "user_text", where, str)
    labels = raw.get("labels") or []
    if not isinstance(labels, list):
        raise ValidationError(f"{where}labels: expected list")
    for j, label in enumerate(labels):
        lwhere = f"{where}labels[{j}]."
        if not isinstance(label, Mapping):
            raise ValidationError(f"{where}labels[{j}]: expected object")
        _require(label, "slot", lwhere, str)
        _require(label, "start", lwhere, int)
        _require(label, "end", lwhere, int)
        _require(label, "value", lwhere, str)
    requested = raw.get("requested_slots") or []
    if not isinstance(requested, list) or not all(isinstance(s, str) for s in requested):
        raise ValidationError(f"{where}requested_slots: expected list of slot names")
    system_text = raw.get("system_text")
    if system_text is not None and not isinstance(system_text, str):
        raise ValidationError(f"{where}system_text: expected string or null")
    return DialogTurn.from_dict(raw)


def parse_sl(data: Mapping[str, Any], name: Optional[str] = None) -> SLDataset:
    """Validate a decoded native SL document and build the dataset."""
    if not isinstance(data, Mapping):
        raise ValidationError("top level: expected object")
    slots = _require(data, "slots", "", Mapping)
    turns_raw = _require(data, "turns", "", list)
    ontology = SlotOntology.from_mapping(
        slots,
        separator_token=data.get("separator_token", "<s>"),
        slot_pairs=data.get("slot_pairs") or (),
    )
    turns = tuple(_parse_turn(raw, i) for i, raw in enumerate(turns_raw))

    errors = []
    seen_ids = set()
    for turn in turns:
        if turn.turn_id in seen_ids:
            errors.append(f"turn {turn.turn_id}: duplicate turn_id")
        seen_ids.add(turn.turn_id)
        errors.extend(str(v) for v in validate_turn(turn, ontology))
    if errors:
        raise ValidationError(errors, code="invalid")
    return SLDataset(ontology=ontology, turns=turns, name=name or data.get("name") or "dataset")


def load_sl(source: Union[str, Path, Mapping[str, Any]], format: str = "native_json") -> SLDataset:
    """
    Load and validate an SL dataset from a path (or an already-decoded dict).

    Parse errors carry line/column; validation errors list every violation
    with its turn id.
    """
    if format != "native_json":
        raise ValidationError(f"format: unsupported SL format {format!r}")
    if isinstance(source, Mapping):
        return parse_sl(source)

    path = Path(source)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            code="parse",
        ) from exc
    try:
        ds = parse_sl(data, name=data.get("name") if isinstance(data, Mapping) else None)
    except ValidationError as exc:
        raise ValidationError([f"{path}: {m}" for m in exc.messages], code="invalid") from exc
    logger.info("Loaded %s: %d turns, %d slots", path, len(ds.turns), len(ds.ontology))
    return ds


def dump_sl(ds: SLDataset) -> dict:
    data: dict[str, Any] = {
        "name": ds.name,
        "slots": ds.ontology.to_mapping(),
        "separator_token": ds.ontology.separator_token,
    }
    if ds.ontology.slot_pairs:
        data["slot_pairs"] = [list(p) for p in ds.ontology.slot_pairs]
    data["turns"] = [turn.to_dict() for turn in ds.turns]
    return data


def sl_to_qa(
    ds: SLDataset,
    spec: Optional[PromptSpec] = None,
    mode: ContextMode | str = ContextMode.USER_ONLY,
    paraphrases: bool = False,
) -> QADataset:
    spec = spec or PromptSpec.for_ontology(ds.ontology)
    examples = []
    for turn in ds.turns:
        examples.extend(turn_to_qa(turn, ds.ontology, spec, mode, paraphrases=paraphrases))
    return QADataset(examples=tuple(examples), name=ds.name)
