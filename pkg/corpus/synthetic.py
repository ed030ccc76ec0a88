"""
Deterministic synthetic corpora.

- make_restaurant_dataset: a restaurant-booking SL benchmark (date, time,
  people, first_name, last_name) with templated utterances, optional system
  prompts carrying requested slots, and a configurable share of bare-number
  replies ("6") that only the requested slot can disambiguate.
- make_sized_dataset: a restaurant-style dataset with a benchmark family's
  full training (or test) size, named after the family (for split-size checks).
- make_generic_qa: a general span-QA corpus in SQuAD2.0 semantics, used as a
  stand-in for Stage 1 QA-tuning data.
- make_audit_fixture: a dataset with a known number of planted annotation
  issues per audit rule.
"""

from __future__ import annotations

import re
from typing import Optional

import numpy as np

from .loaders import QADataset, SLDataset
from .sampling import PUBLISHED_SPLIT_SIZES, PUBLISHED_TEST_SIZES
from .types import DialogTurn, QAExample, SlotOntology, SlotSpec, SpanLabel

RESTAURANT_ONTOLOGY = SlotOntology(
    (
        SlotSpec("date", ("What date?", "Which day?", "On what date is the booking?"), "date"),
        SlotSpec("time", ("What time?", "At what time?", "When is the booking for?"), "time"),
        SlotSpec("people", ("How many people?", "For how many guests?", "What is the party size?"), "number"),
        SlotSpec("first_name", ("What is the first name?", "Which first name?"), "name"),
        SlotSpec("last_name", ("What is the last name?", "Which surname?"), "name"),
    )
)

DATES = (
    "today",
    "tomorrow",
    "tonight",
    "this friday",
    "this saturday",
    "next monday",
    "next tuesday",
    "next wednesday",
    "sunday",
    "thursday",
    "june 3rd",
    "may 12th",
    "the 5th of april",
    "the 21st",
    "march 9th",
)
FIRST_NAMES = (
    "anna", "ben", "carla", "david", "elena", "farid", "grace", "hugo", "ines",
    "jonas", "kira", "liam", "maya", "nadia", "oscar", "priya", "quinn", "rosa",
)
LAST_NAMES = (
    "smith", "garcia", "novak", "okafor", "tanaka", "muller", "rossi", "khan",
    "larsen", "dubois", "kowalski", "silva", "nguyen", "brennan", "petrov",
)

# user templates: {slot} placeholders are filled and labelled
USER_TEMPLATES = (
    "i would like a table for {people} people {date} at {time}",
    "can i book a table for {people} at {time} please",
    "we want to come {date} around {time}",
    "book it for {time} {date}",
    "a table for {people} {date} please",
    "the reservation is under {first_name} {last_name}",
    "my name is {first_name} {last_name} and we are {people} people",
    "put it under {last_name}",
    "{date} at {time} for {people} people",
    "hi , do you have space {date} ?",
    "is {time} possible ?",
    "it will be {people} of us",
    "i am {first_name}",
    "what is on the menu tonight ?",
    "do you have vegetarian options ?",
    "thanks , that is all",
)

# system prompt → requested slot, and reply templates for that slot
SYSTEM_PROMPTS = {
    "date": ("Which day would you like to come?", ("{date} please", "{date}", "we were hoping for {date}")),
    "time": ("What time would you like?", ("{time} works for us", "around {time}", "{time}")),
    "people": ("How many people will be in your party?", ("{people} people", "we are {people}", "{people} of us")),
    "first_name": ("Can I have your first name?", ("{first_name}", "it is {first_name}")),
    "last_name": ("And your last name?", ("{last_name}", "it is {last_name}")),
}

_PLACEHOLDER = re.compile(r"\{(\w+)\}")


def _fill(template: str, values: dict[str, str]) -> tuple[str, tuple[SpanLabel, ...]]:
    text_parts = []
    labels = []
    pos = 0
    cursor = 0
    for match in _PLACEHOLDER.finditer(template):
        literal = template[cursor:match.start()]
        text_parts.append(literal)
        pos += len(literal)
        slot = match.group(1)
        value = values[slot]
        labels.append(SpanLabel(slot, pos, pos + len(value), value))
        text_parts.append(value)
        pos += len(value)
        cursor = match.end()
    text_parts.append(template[cursor:])
    return "".join(text_parts), tuple(labels)


def _random_time(rng: np.random.Generator) -> str:
    hour = int(rng.integers(1, 12))
    style = int(rng.integers(0, 3))
    if style == 0:
        return f"{hour} pm"
    if style == 1:
        return f"{hour}:30 pm"
    return f"{hour} am" if hour < 11 else f"{hour}:15 am"


def _random_values(rng: np.random.Generator) -> dict[str, str]:
    return {
        "date": DATES[int(rng.integers(len(DATES)))],
        "time": _random_time(rng),
        "people": str(int(rng.integers(2, 13))),
        "first_name": FIRST_NAMES[int(rng.integers(len(FIRST_NAMES)))],
        "last_name": LAST_NAMES[int(rng.integers(len(LAST_NAMES)))],
    }


def make_restaurant_dataset(
    n_turns: int,
    seed: int = 0,
    bare_number_fraction: float = 0.25,
    system_fraction: float = 0.5,
    name: str = "synthetic_restaurants",
    id_prefix: Optional[str] = None,
) -> SLDataset:
    """
    Bare-number turns answer a system question about people or time with a
    lone number; the gold slot is the requested one.
    """
    rng = np.random.default_rng(seed)
    prefix = id_prefix or name
    turns = []
    for i in range(n_turns):
        turn_id = f"{prefix}-{i:05d}"
        values = _random_values(rng)
        roll = float(rng.random())
        if roll < bare_number_fraction:
            slot = "people" if rng.random() < 0.5 else "time"
            number = str(int(rng.integers(2, 10)))
            turns.append(
                DialogTurn(
                    turn_id=turn_id,
                    system_text=SYSTEM_PROMPTS[slot][0],
                    user_text=number,
                    requested_slots=(slot,),
                    gold_labels=(SpanLabel(slot, 0, len(number), number),),
                )
            )
        elif roll < bare_number_fraction + (1 - bare_number_fraction) * system_fraction:
            slot = list(SYSTEM_PROMPTS)[int(rng.integers(len(SYSTEM_PROMPTS)))]
            prompt, replies = SYSTEM_PROMPTS[slot]
            text, labels = _fill(replies[int(rng.integers(len(replies)))], values)
            turns.append(
                DialogTurn(turn_id, text, system_text=prompt, requested_slots=(slot,), gold_labels=labels)
            )
        else:
            text, labels = _fill(USER_TEMPLATES[int(rng.integers(len(USER_TEMPLATES)))], values)
            turns.append(DialogTurn(turn_id, text, gold_labels=labels))
    return SLDataset(ontology=RESTAURANT_ONTOLOGY, turns=tuple(turns), name=name)


def make_sized_dataset(family: str, seed: int = 0, split: str = "train") -> SLDataset:
    """Full-size train or test set for a benchmark family, e.g. 8198 / 3731 turns for restaurants8k."""
    if split == "train":
        return make_restaurant_dataset(PUBLISHED_SPLIT_SIZES[family]["1"], seed=seed, name=family, id_prefix=family)
    if split == "test":
        return make_restaurant_dataset(
            PUBLISHED_TEST_SIZES[family], seed=seed, name=f"{family}_test", id_prefix=f"{family}-test"
        )
    raise ValueError(f"split must be train or test, not {split!r}")


# ---------------------------------------------------------------------------
# Generic span QA (Stage 1 stand-in)
# ---------------------------------------------------------------------------

CITIES = ("lisbon", "oslo", "cairo", "lima", "kyoto", "dublin", "quito", "perth", "riga", "tunis")
OBJECTS = ("a bicycle", "two lamps", "an old map", "a red coat", "some books", "a guitar")

QA_TEMPLATES = (
    (
        "{first_name} travelled to {city} on {date} with {people} friends .",
        {
            "first_name": "Who travelled?",
            "city": "Where did they travel to?",
            "date": "When did they travel?",
            "people": "How many friends came?",
        },
    ),
    (
        "at {time} {first_name} {last_name} bought {object} in {city} .",
        {
            "time": "At what time was it bought?",
            "first_name": "What is the buyer's first name?",
            "last_name": "What is the buyer's last name?",
            "object": "What was bought?",
            "city": "Where was it bought?",
        },
    ),
    (
        "the museum in {city} opens {date} and closes at {time} .",
        {
            "city": "Where is the museum?",
            "date": "When does it open?",
            "time": "When does it close?",
            "people": "How many visitors came?",
        },
    ),
)


def make_generic_qa(
    n_examples: int,
    seed: int = 0,
    unanswerable_fraction: float = 0.3,
    name: str = "synthetic_generic_qa",
) -> QADataset:
    rng = np.random.default_rng(seed)
    examples = []
    i = 0
    while len(examples) < n_examples:
        template, questions = QA_TEMPLATES[int(rng.integers(len(QA_TEMPLATES)))]
        values = _random_values(rng)
        values["city"] = CITIES[int(rng.integers(len(CITIES)))]
        values["object"] = OBJECTS[int(rng.integers(len(OBJECTS)))]
        context, labels = _fill(template, values)
        by_slot = {label.slot: label for label in labels}
        slot = list(questions)[int(rng.integers(len(questions)))]
        label = by_slot.get(slot)
        qid = f"{name}-{i:06d}"
        i += 1
        if label is None or rng.random() < unanswerable_fraction:
            if label is not None:
                # unanswerable variant: ask about a slot the context lacks
                missing = [s for s in questions if s not in by_slot]
                if not missing:
                    continue
                slot = missing[0]
            examples.append(QAExample(qid, context, questions[slot], is_impossible=True, title=qid))
        else:
            examples.append(
                QAExample(qid, context, questions[slot], answer_text=label.value, answer_start=label.start, title=qid)
            )
    return QADataset(examples=tuple(examples), name=name)


# ---------------------------------------------------------------------------
# Audit fixture
# ---------------------------------------------------------------------------

AUDIT_PLANTED_COUNTS = {
    "ambiguous-numeric": 86,
    "pm-variants": 5,
    "leading-function-word": 3,
    "people-noun": 3,
}


def _labelled(turn_id: str, text: str, slot: str, value: str, start: Optional[int] = None) -> DialogTurn:
    start = text.index(value) if start is None else start
    return DialogTurn(turn_id, text, gold_labels=(SpanLabel(slot, start, start + len(value), value),))


def make_audit_fixture(bare_numbers: int = 86, clean_turns: int = 40, seed: int = 0) -> SLDataset:
    """
    Planted issues (see AUDIT_PLANTED_COUNTS):
    - `bare_numbers` turns whose whole utterance is a number (unlabelled, so
      they only feed the ambiguity rule)
    - time labels in three styles: "8 pm" x2, "9 p.m." x2, "7" before " pm" x1
    - date labels: "on friday" included x1, "monday" right after "on" x2
    - people labels: "<n> people" x2, bare "3" x1
    Clean turns use no function word before dates and bare times.
    """
    rng = np.random.default_rng(seed)
    turns = []
    for i in range(bare_numbers):
        number = str(int(rng.integers(1, 13)))
        turns.append(
            DialogTurn(
                f"bare-{i:03d}",
                number,
                system_text="How many people will be in your party?",
                requested_slots=("people",),
            )
        )

    turns += [
        _labelled("pm-1", "book it for 8 pm", "time", "8 pm"),
        _labelled("pm-2", "maybe 6 pm then", "time", "6 pm"),
        _labelled("pm-3", "9 p.m. please", "time", "9 p.m."),
        _labelled("pm-4", "around 10 p.m. would be great", "time", "10 p.m."),
        _labelled("pm-5", "7 pm works for me", "time", "7"),
        _labelled("prep-1", "on friday please", "date", "on friday"),
        _labelled("prep-2", "see you on monday", "date", "monday"),
        _labelled("prep-3", "can we come on monday instead", "date", "monday"),
        _labelled("people-1", "a table for 4 people", "people", "4 people"),
        _labelled("people-2", "we will be 5 people", "people", "5 people"),
        _labelled("people-3", "just 3 people tonight", "people", "3"),
    ]

    clean_templates = (
        "a table {date} please",
        "{date} would be lovely",
        "the reservation is under {first_name} {last_name}",
        "i am {first_name}",
        "is there parking nearby ?",
    )
    for i in range(clean_turns):
        values = _random_values(rng)
        text, labels = _fill(clean_templates[i % len(clean_templates)], values)
        turns.append(DialogTurn(f"clean-{i:03d}", text, gold_labels=labels))

    return SLDataset(ontology=RESTAURANT_ONTOLOGY, turns=tuple(turns), name="audit_fixture")
