"""
Domain errors for the QASL toolkit.

Data-shape problems (bad JSON, invalid turns, SQuAD schema violations, bad
config files) raise django.core.exceptions.ValidationError instead; these
classes cover everything that is not a malformed input file.

Every error carries a short machine-readable `kind` and an optional list of
`details` which management commands copy into their JSON error output.
"""

from __future__ import annotations

from typing import Iterable, Optional


class QaslError(Exception):
    kind = "qasl-error"

    def __init__(self, message: str, details: Optional[Iterable] = None):
        super().__init__(message)
        self.message = message
        self.details = list(details or [])

    def __str__(self) -> str:
        return self.message


class UnknownSlotError(QaslError, KeyError):
    """Slot name not present in the ontology."""

    kind = "unknown-slot"

    def __init__(self, slot: str, known: Iterable[str] = ()):
        super().__init__(f"Unknown slot: {slot!r}", details=sorted(known))
        self.slot = slot


class SplitSizeError(QaslError):
    kind = "split-size"


class SubsampleSizeError(QaslError):
    kind = "subsample-size"


class AdapterConfigError(QaslError):
    kind = "adapter-config"


class RegimeError(QaslError):
    kind = "regime"


class EmptyCorpusError(QaslError):
    kind = "empty-corpus"


class TrainingDivergedError(QaslError):
    kind = "training-diverged"


class MissingPredictionsError(QaslError):
    kind = "missing-predictions"

    def __init__(self, qids: Iterable[str]):
        qids = list(qids)
        preview = ", ".join(qids[:5])
        more = f" (+{len(qids) - 5} more)" if len(qids) > 5 else ""
        super().__init__(f"Missing predictions for {len(qids)} qids: {preview}{more}", details=qids)
        self.qids = qids


class EmptyQuestionError(QaslError):
    kind = "empty-question"


class QuestionTooLongError(QaslError):
    kind = "question-too-long"


class AuditThresholdExceeded(QaslError):
    kind = "audit-threshold-exceeded"
