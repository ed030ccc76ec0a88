"""
Shared domain types for slot labeling recast as span QA.

All types are frozen dataclasses holding tuples, so instances can be shared
freely once built. Character offsets (never token offsets) are the
canonical span representation; offsets index Unicode code points.

Construction-time checks raise django.core.exceptions.ValidationError for
structural problems (empty questions, inconsistent QA answers, bad configs).
Turn-level consistency against an ontology is reported by `validate_turn`
as data, never raised.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Mapping, Optional

from django.core.exceptions import ValidationError

from .exceptions import UnknownSlotError


class Regime(str, enum.Enum):
    FULL = "full"
    HEAD_ONLY = "head_only"
    BITFIT = "bitfit"
    ADAPTERS = "adapters"


class ContextMode(str, enum.Enum):
    USER_ONLY = "user_only"
    WITH_SYSTEM = "with_system"


class Nonlinearity(str, enum.Enum):
    RELU = "relu"
    GELU = "gelu"
    TANH = "tanh"
    SWISH = "swish"


SLOT_KINDS = ("text", "date", "time", "number", "name")
NUMERIC_KINDS = frozenset({"time", "number"})


# ---------------------------------------------------------------------------
# Dialog data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpanLabel:
    slot: str
    start: int
    end: int
    value: str

    def to_dict(self) -> dict:
        return {"slot": self.slot, "start": self.start, "end": self.end, "value": self.value}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SpanLabel":
        return cls(
            slot=data["slot"],
            start=int(data["start"]),
            end=int(data["end"]),
            value=data["value"],
        )


@dataclass(frozen=True)
class DialogTurn:
    turn_id: str
    user_text: str
    system_text: Optional[str] = None
    requested_slots: tuple[str, ...] = ()
    gold_labels: tuple[SpanLabel, ...] = ()

    def __post_init__(self):
        # accept lists from callers, store tuples
        object.__setattr__(self, "requested_slots", tuple(self.requested_slots))
        object.__setattr__(self, "gold_labels", tuple(self.gold_labels))

    def label_for(self, slot: str) -> Optional[SpanLabel]:
        for label in self.gold_labels:
            if label.slot == slot:
                return label
        return None

    def to_dict(self) -> dict:
        return {
            "turn_id": self.turn_id,
            "system_text": self.system_text,
            "user_text": self.user_text,
            "requested_slots": list(self.requested_slots),
            "labels": [label.to_dict() for label in self.gold_labels],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DialogTurn":
        return cls(
            turn_id=str(data["turn_id"]),
            system_text=data.get("system_text"),
            user_text=data["user_text"],
            requested_slots=tuple(data.get("requested_slots") or ()),
            gold_labels=tuple(SpanLabel.from_dict(d) for d in data.get("labels") or ()),
        )


# ---------------------------------------------------------------------------
# Ontology
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlotSpec:
    name: str
    questions: tuple[str, ...]
    kind: str = "text"

    def __post_init__(self):
        object.__setattr__(self, "questions", tuple(self.questions))

    @property
    def canonical_question(self) -> str:
        return self.questions[0]

    @property
    def is_numeric(self) -> bool:
        return self.kind in NUMERIC_KINDS


@dataclass(frozen=True)
class SlotOntology:
    """
    Ordered slot → questions mapping.

    Rules:
    - slot names are unique and every slot has at least one non-empty question
    - the first question of a slot is its canonical question
    - kind is one of SLOT_KINDS; time and number are the numeric kinds
    - slot_pairs name known slots (used by the slot-pair audit rule)
    """

    slots: tuple[SlotSpec, ...] = ()
    separator_token: str = "<s>"
    slot_pairs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        object.__setattr__(self, "slot_pairs", tuple(tuple(p) for p in self.slot_pairs))

        errors = []
        seen = set()
        for spec in self.slots:
            if spec.name in seen:
                errors.append(f"slots.{spec.name}: duplicate slot name")
            seen.add(spec.name)
            if not spec.name:
                errors.append("slots: empty slot name")
            if not spec.questions or any(not q.strip() for q in spec.questions):
                errors.append(f"slots.{spec.name}: every slot needs at least one non-empty question")
            if spec.kind not in SLOT_KINDS:
                errors.append(f"slots.{spec.name}.kind: {spec.kind!r} is not one of {', '.join(SLOT_KINDS)}")
        if not self.separator_token:
            errors.append("separator_token: must be non-empty")
        for i, pair in enumerate(self.slot_pairs):
            if len(pair) != 2 or any(name not in seen for name in pair):
                errors.append(f"slot_pairs[{i}]: must name two known slots")
        if errors:
            raise ValidationError(errors)

    @classmethod
    def from_mapping(
        cls,
        slots: Mapping[str, Any],
        separator_token: str = "<s>",
        slot_pairs: Iterable[Iterable[str]] = (),
    ) -> "SlotOntology":
        """
        Build from the file form: {"slot": ["Q1", "Q2"]} or
        {"slot": {"questions": [...], "kind": "time"}}.
        """
        specs = []
        for name, entry in slots.items():
            if isinstance(entry, str):
                specs.append(SlotSpec(name, (entry,)))
            elif isinstance(entry, Mapping):
                specs.append(
                    SlotSpec(name, tuple(entry.get("questions") or ()), entry.get("kind", "text"))
                )
            else:
                specs.append(SlotSpec(name, tuple(entry or ())))
        return cls(specs, separator_token=separator_token, slot_pairs=tuple(tuple(p) for p in slot_pairs))

    def to_mapping(self) -> dict:
        return {
            spec.name: {"questions": list(spec.questions), "kind": spec.kind}
            for spec in self.slots
        }

    @property
    def slot_names(self) -> tuple[str, ...]:
        return tuple(spec.name for spec in self.slots)

    def get(self, slot: str) -> SlotSpec:
        for spec in self.slots:
            if spec.name == slot:
                return spec
        raise UnknownSlotError(slot, self.slot_names)

    def questions(self, slot: str) -> tuple[str, ...]:
        return self.get(slot).questions

    @property
    def numeric_slots(self) -> tuple[str, ...]:
        return tuple(spec.name for spec in self.slots if spec.is_numeric)

    def slots_of_kind(self, kind: str) -> tuple[str, ...]:
        return tuple(spec.name for spec in self.slots if spec.kind == kind)

    def __contains__(self, slot: object) -> bool:
        return any(spec.name == slot for spec in self.slots)

    def __len__(self) -> int:
        return len(self.slots)


# ---------------------------------------------------------------------------
# QA data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QAExample:
    """
    One SQuAD2.0-style question over a context.

    `user_region` is the character range of the user utterance inside the
    context. It is not part of the SQuAD file and does not take part in
    equality; parsed examples cover their whole context.
    """

    qid: str
    context: str
    question: str
    answer_text: Optional[str] = None
    answer_start: Optional[int] = None
    is_impossible: bool = False
    title: str = ""
    user_region: Optional[tuple[int, int]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.user_region is None:
            object.__setattr__(self, "user_region", (0, len(self.context)))
        else:
            object.__setattr__(self, "user_region", tuple(self.user_region))

        absent = self.answer_text is None and self.answer_start is None
        if self.is_impossible and not absent:
            raise ValidationError(f"{self.qid}: unanswerable example carries an answer")
        if not self.is_impossible:
            if self.answer_text is None or self.answer_start is None:
                raise ValidationError(f"{self.qid}: answerable example needs answer_text and answer_start")
            if not self.answer_text:
                raise ValidationError(f"{self.qid}: empty answer_text")
            end = self.answer_start + len(self.answer_text)
            if self.answer_start < 0 or self.context[self.answer_start:end] != self.answer_text:
                raise ValidationError(
                    f"{self.qid}: context[{self.answer_start}:{end}] does not equal answer {self.answer_text!r}"
                )
        region_start, region_end = self.user_region
        if not 0 <= region_start <= region_end <= len(self.context):
            raise ValidationError(f"{self.qid}: user_region {self.user_region} outside context")

    @property
    def answer_end(self) -> Optional[int]:
        if self.is_impossible:
            return None
        return self.answer_start + len(self.answer_text)


@dataclass(frozen=True)
class SpanPrediction:
    """Decoder output. Offsets are relative to the user utterance."""

    qid: str
    text: Optional[str]
    start: Optional[int]
    end: Optional[int]
    score: float
    no_answer_score: float

    def __post_init__(self):
        present = [self.text is not None, self.start is not None, self.end is not None]
        if any(present) and not all(present):
            raise ValidationError(f"{self.qid}: text, start and end must be given together")
        if all(present) and not 0 <= self.start < self.end:
            raise ValidationError(f"{self.qid}: invalid span [{self.start}, {self.end})")

    @property
    def is_no_answer(self) -> bool:
        return self.text is None

    @classmethod
    def no_answer(cls, qid: str, score: float, no_answer_score: float) -> "SpanPrediction":
        return cls(qid, None, None, None, float(score), float(no_answer_score))

    def to_dict(self) -> dict:
        return {
            "qid": self.qid,
            "text": self.text,
            "start": self.start,
            "end": self.end,
            "score": self.score,
            "no_answer_score": self.no_answer_score,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SpanPrediction":
        return cls(
            qid=data["qid"],
            text=data.get("text"),
            start=data.get("start"),
            end=data.get("end"),
            score=float(data.get("score", 0.0)),
            no_answer_score=float(data.get("no_answer_score", 0.0)),
        )


# ---------------------------------------------------------------------------
# Model / fine-tuning configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdapterConfig:
    default_reduction_factor: int = 16
    boundary_reduction_factor: int = 8
    nonlinearity: Nonlinearity = Nonlinearity.RELU

    def __post_init__(self):
        object.__setattr__(self, "nonlinearity", Nonlinearity(self.nonlinearity))
        if self.default_reduction_factor < 1 or self.boundary_reduction_factor < 1:
            raise ValidationError("adapter reduction factors must be positive")

    @classmethod
    def from_settings(cls, **overrides) -> "AdapterConfig":
        from .conf import qasl_setting

        values = {
            "default_reduction_factor": qasl_setting("ADAPTER_REDUCTION_FACTOR"),
            "boundary_reduction_factor": qasl_setting("ADAPTER_BOUNDARY_REDUCTION_FACTOR"),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> dict:
        return {
            "default_reduction_factor": self.default_reduction_factor,
            "boundary_reduction_factor": self.boundary_reduction_factor,
            "nonlinearity": self.nonlinearity.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AdapterConfig":
        return cls(
            default_reduction_factor=int(data.get("default_reduction_factor", data.get("reduction_factor", 16))),
            boundary_reduction_factor=int(data.get("boundary_reduction_factor", 8)),
            nonlinearity=data.get("nonlinearity", "relu"),
        )


@dataclass(frozen=True)
class FineTuneConfig:
    """
    One training stage's settings.

    epochs may be 0 (the stage is then a no-op). The optional schedule
    knobs (warmup, decay, clipping, head re-init) are off by default.
    """

    regime: Regime = Regime.FULL
    learning_rate: float = 2e-5
    batch_size: int = 32
    epochs: int = 1
    adapter: Optional[AdapterConfig] = None
    no_answer_threshold: float = 0.0
    warmup_steps: int = 0
    linear_decay: bool = False
    max_grad_norm: Optional[float] = None
    reinit_head: bool = False
    bitfit_all_biases: bool = False
    paraphrases: bool = False

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        errors = []
        if (self.regime is Regime.ADAPTERS) != (self.adapter is not None):
            errors.append("adapter config must be present exactly when regime is adapters")
        if not self.learning_rate > 0:
            errors.append("learning_rate must be > 0")
        if self.batch_size < 1:
            errors.append("batch_size must be positive")
        if self.epochs < 0:
            errors.append("epochs must be >= 0")
        if self.warmup_steps < 0:
            errors.append("warmup_steps must be >= 0")
        if errors:
            raise ValidationError(errors)

    @classmethod
    def for_stage(cls, label: str, regime: Regime | str = Regime.FULL, **overrides) -> "FineTuneConfig":
        """Defaults for a stage label; Stage 1 variants share the QA-tuning defaults."""
        from .conf import qasl_setting

        regime = Regime(regime)
        prefix = "STAGE2" if label == "stage2" else "STAGE1"
        values: dict[str, Any] = {
            "regime": regime,
            "learning_rate": qasl_setting(f"{prefix}_LEARNING_RATE"),
            "batch_size": qasl_setting(f"{prefix}_BATCH_SIZE"),
            "epochs": qasl_setting(f"{prefix}_EPOCHS"),
            "no_answer_threshold": qasl_setting("NO_ANSWER_THRESHOLD"),
        }
        if regime is Regime.ADAPTERS:
            values["learning_rate"] = qasl_setting("ADAPTER_LEARNING_RATE")
            values["adapter"] = AdapterConfig.from_settings()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["regime"] = self.regime.value
        data["adapter"] = self.adapter.to_dict() if self.adapter else None
        return data


@dataclass(frozen=True)
class ModelConfig:
    """Backbone + head shape. `hidden_size` is E."""

    hidden_size: int = 64
    num_layers: int = 2
    num_heads: int = 4
    intermediate_size: int = 256
    head_hidden_size: int = 128
    head_variant: str = "ffn2"
    vocab_size: int = 8192
    max_position: int = 128
    tokenizer: str = "toy-regex-v1"
    separator_token: str = "<s>"

    def __post_init__(self):
        errors = []
        for name in (
            "hidden_size",
            "num_layers",
            "num_heads",
            "intermediate_size",
            "head_hidden_size",
            "vocab_size",
            "max_position",
        ):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be positive")
        if self.num_heads > 0 and self.hidden_size % self.num_heads:
            errors.append("hidden_size must be divisible by num_heads")
        if self.head_variant not in ("linear", "ffn2"):
            errors.append(f"head_variant {self.head_variant!r} is not linear or ffn2")
        if errors:
            raise ValidationError(errors)

    @classmethod
    def toy(cls, **overrides) -> "ModelConfig":
        return cls(**overrides)

    @classmethod
    def roberta_base_sized(cls, **overrides) -> "ModelConfig":
        # head_hidden_size 1300 puts the ffn2 head at ~1.0M parameters for E=768
        values = dict(
            hidden_size=768,
            num_layers=12,
            num_heads=12,
            intermediate_size=3072,
            head_hidden_size=1300,
            head_variant="ffn2",
            vocab_size=50265,
            max_position=514,
        )
        values.update(overrides)
        return cls(**values)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelConfig":
        data = dict(data)
        preset = data.pop("preset", "toy")
        if preset == "roberta-base-sized":
            return cls.roberta_base_sized(**data)
        if preset != "toy":
            raise ValidationError(f"model.preset: unknown preset {preset!r}")
        return cls.toy(**data)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Turn validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    turn_id: str
    field: str
    message: str

    def __str__(self) -> str:
        return f"turn {self.turn_id}: {self.field}: {self.message}"


def validate_turn(turn: DialogTurn, ontology: Optional[SlotOntology] = None) -> list[Violation]:
    """
    Check a turn's internal consistency (and its slots against an ontology).

    Returns an empty list when valid. Never raises and never mutates.
    """
    violations: list[Violation] = []
    text = turn.user_text

    def add(code: str, field_name: str, message: str):
        violations.append(Violation(code, turn.turn_id, field_name, message))

    seen_requested = set()
    for i, slot in enumerate(turn.requested_slots):
        if slot in seen_requested:
            add("duplicate-requested", f"requested_slots[{i}]", f"{slot!r} requested twice")
        seen_requested.add(slot)
        if ontology is not None and slot not in ontology:
            add("unknown-requested-slot", f"requested_slots[{i}]", f"{slot!r} is not in the ontology")

    seen_labels = set()
    for i, label in enumerate(turn.gold_labels):
        where = f"labels[{i}]"
        if ontology is not None and label.slot not in ontology:
            add("unknown-label-slot", where, f"{label.slot!r} is not in the ontology")
        if label.slot in seen_labels:
            add("duplicate-label-slot", where, f"{label.slot!r} labelled more than once")
        seen_labels.add(label.slot)
        if label.start >= label.end:
            add("empty-span", where, f"empty span [{label.start}, {label.end})")
        elif label.start < 0 or label.end > len(text):
            add(
                "offset-out-of-bounds",
                where,
                f"span [{label.start}, {label.end}) outside user_text of length {len(text)}",
            )
        elif text[label.start:label.end] != label.value:
            add(
                "offset-mismatch",
                where,
                f"user_text[{label.start}:{label.end}] is {text[label.start:label.end]!r}, label says {label.value!r}",
            )
    return violations
