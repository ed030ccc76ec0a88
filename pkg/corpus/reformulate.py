"""
Slot labeling → extractive QA.

Each ontology slot becomes one question over the turn's context. Slots the
system asked about in the previous turn are appended to every question as a
natural-language prompt, one separator token per requested slot:

    "What dates are you looking for" + ["arrival_time"]
    → "What dates are you looking for <s> arrival time"
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .exceptions import EmptyQuestionError
from .types import ContextMode, DialogTurn, QAExample, SlotOntology


@dataclass(frozen=True)
class PromptSpec:
    """
    How requested slots are rendered into questions.

    Rules:
    - slot names render by replacing "_" with " " and lowercasing
    - use_requested=False drops the requested-slot prompt entirely
    """

    separator_token: str = "<s>"
    use_requested: bool = True

    def render(self, slot: str) -> str:
        return slot.replace("_", " ").lower()

    @classmethod
    def for_ontology(cls, ontology: SlotOntology, use_requested: bool = True) -> "PromptSpec":
        return cls(separator_token=ontology.separator_token, use_requested=use_requested)


def build_question(slot: str, ontology: SlotOntology) -> str:
    """Canonical (first) question for a slot; unknown slots raise UnknownSlotError."""
    return ontology.get(slot).canonical_question


def augment_with_requested(question: str, requested: Sequence[str], spec: PromptSpec) -> str:
    if not question:
        raise EmptyQuestionError("question must be non-empty")
    if not spec.use_requested or not requested:
        return question
    parts = [question]
    for slot in requested:
        parts.append(f" {spec.separator_token} {spec.render(slot)}")
    return "".join(parts)


def build_context(turn: DialogTurn, mode: ContextMode | str = ContextMode.USER_ONLY) -> tuple[str, tuple[int, int]]:
    """
    Returns (context, user_region). with_system joins system and user text
    with one space; without a system turn both modes give the user text.
    """
    mode = ContextMode(mode)
    if mode is ContextMode.WITH_SYSTEM and turn.system_text:
        offset = len(turn.system_text) + 1
        context = f"{turn.system_text} {turn.user_text}"
        return context, (offset, offset + len(turn.user_text))
    return turn.user_text, (0, len(turn.user_text))


def qid_for(turn_id: str, slot: str, paraphrase: int = 0) -> str:
    if paraphrase:
        return f"{turn_id}:{slot}#q{paraphrase}"
    return f"{turn_id}:{slot}"


def turn_to_qa(
    turn: DialogTurn,
    ontology: SlotOntology,
    spec: Optional[PromptSpec] = None,
    mode: ContextMode | str = ContextMode.USER_ONLY,
    paraphrases: bool = False,
) -> list[QAExample]:
    """
    One QAExample per ontology slot, in ontology order.

    With paraphrases=True every alternate question of a slot adds one more
    example (qid suffix "#q<k>"); used for training-time augmentation only.
    """
    spec = spec or PromptSpec.for_ontology(ontology)
    context, region = build_context(turn, mode)
    offset = region[0]

    gold = {}
    for label in turn.gold_labels:
        ontology.get(label.slot)
        gold[label.slot] = label

    examples = []
    for slot_spec in ontology.slots:
        questions = slot_spec.questions if paraphrases else slot_spec.questions[:1]
        label = gold.get(slot_spec.name)
        for k, base_question in enumerate(questions):
            question = augment_with_requested(base_question, turn.requested_slots, spec)
            qid = qid_for(turn.turn_id, slot_spec.name, k)
            if label is not None:
                examples.append(
                    QAExample(
                        qid=qid,
                        context=context,
                        question=question,
                        answer_text=label.value,
                        answer_start=label.start + offset,
                        is_impossible=False,
                        title=turn.turn_id,
                        user_region=region,
                    )
                )
            else:
                examples.append(
                    QAExample(
                        qid=qid,
                        context=context,
                        question=question,
                        is_impossible=True,
                        title=turn.turn_id,
                        user_region=region,
                    )
                )
    return examples
