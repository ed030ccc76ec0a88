"""
SQuAD2.0 JSON emit / parse.

Layout written:

    {"version": "v2.0",
     "data": [{"title": ..., "paragraphs": [{"context": ...,
               "qas": [{"id", "question", "is_impossible", "answers": [{"text", "answer_start"}]}]}]}]}

Rules:
- consecutive examples with the same title share an article, and within it
  consecutive examples with the same context share a paragraph
- unanswerable → "answers": [] and "is_impossible": true
- on parse the first answer is used; a missing is_impossible is inferred from
  an empty answers list; plausible_answers are ignored
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from typing import Any, Union

from django.core.exceptions import ValidationError

from .loaders import QADataset
from .types import QAExample

SQUAD_VERSION = "v2.0"


def squad_document(qa: QADataset) -> dict:
    data: list[dict] = []
    for ex in qa.examples:
        if not data or data[-1]["title"] != ex.title:
            data.append({"title": ex.title, "paragraphs": []})
        paragraphs = data[-1]["paragraphs"]
        if not paragraphs or paragraphs[-1]["context"] != ex.context:
            paragraphs.append({"context": ex.context, "qas": []})
        answers = [] if ex.is_impossible else [{"text": ex.answer_text, "answer_start": ex.answer_start}]
        paragraphs[-1]["qas"].append(
            {
                "id": ex.qid,
                "question": ex.question,
                "is_impossible": ex.is_impossible,
                "answers": answers,
            }
        )
    return {"version": SQUAD_VERSION, "data": data}


def emit_squad_json(qa: QADataset) -> bytes:
    return (json.dumps(squad_document(qa), indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _expect(value: Any, kind, where: str):
    if isinstance(value, bool) and kind is not bool:
        raise ValidationError(f"{where}: expected {kind.__name__}")
    if not isinstance(value, kind):
        raise ValidationError(f"{where}: expected {kind.__name__}")
    return value


def parse_squad_document(doc: Any, name: str = "squad") -> QADataset:
    _expect(doc, Mapping, "top level")
    if "data" not in doc:
        raise ValidationError("data: required")
    if "version" in doc:
        _expect(doc["version"], str, "version")
    articles = _expect(doc["data"], list, "data")

    examples = []
    for a, article in enumerate(articles):
        where = f"data[{a}]"
        _expect(article, Mapping, where)
        title = article.get("title", "")
        _expect(title, str, f"{where}.title")
        paragraphs = _expect(article.get("paragraphs"), list, f"{where}.paragraphs")
        for p, paragraph in enumerate(paragraphs):
            pwhere = f"{where}.paragraphs[{p}]"
            _expect(paragraph, Mapping, pwhere)
            context = _expect(paragraph.get("context"), str, f"{pwhere}.context")
            for q, qa in enumerate(_expect(paragraph.get("qas"), list, f"{pwhere}.qas")):
                qwhere = f"{pwhere}.qas[{q}]"
                _expect(qa, Mapping, qwhere)
                qid = _expect(qa.get("id"), str, f"{qwhere}.id")
                question = _expect(qa.get("question"), str, f"{qwhere}.question")
                answers = _expect(qa.get("answers", []), list, f"{qwhere}.answers")
                is_impossible = qa.get("is_impossible", not answers)
                _expect(is_impossible, bool, f"{qwhere}.is_impossible")
                if is_impossible:
                    examples.append(
                        QAExample(qid=qid, context=context, question=question, is_impossible=True, title=title)
                    )
                    continue
                if not answers:
                    raise ValidationError(f"{qwhere}.answers: answerable question without answers")
                first = _expect(answers[0], Mapping, f"{qwhere}.answers[0]")
                text = _expect(first.get("text"), str, f"{qwhere}.answers[0].text")
                start = _expect(first.get("answer_start"), int, f"{qwhere}.answers[0].answer_start")
                try:
                    examples.append(
                        QAExample(
                            qid=qid,
                            context=context,
                            question=question,
                            answer_text=text,
                            answer_start=start,
                            is_impossible=False,
                            title=title,
                        )
                    )
                except ValidationError as exc:
                    raise ValidationError([f"{qwhere}: {m}" for m in exc.messages]) from exc
    return QADataset(examples=tuple(examples), name=name)


def parse_squad_json(data: Union[bytes, str], name: str = "squad") -> QADataset:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", code="parse"
        ) from exc
    return parse_squad_document(doc, name=name)
