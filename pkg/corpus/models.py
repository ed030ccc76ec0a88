import uuid

from django.db import models
from django.utils import timezone


class CorpusSnapshot(models.Model):
    """
    Ledger of dataset files read or written by the toolkit.
    Idempotency enforced via unique constraint on (kind, content_hash).
    """

    KIND_CHOICES = [
        ("sl", "SL dataset"),
        ("squad", "SQuAD2.0 QA corpus"),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    kind = models.CharField(max_length=20, choices=KIND_CHOICES, db_index=True)
    name = models.CharField(max_length=200, db_index=True)
    path = models.CharField(max_length=1000, help_text="Where the file was last seen")
    content_hash = models.CharField(max_length=64, db_index=True,
                                    help_text="SHA256 of the file bytes")
    record_count = models.PositiveIntegerField(help_text="Turns (sl) or QA examples (squad)")
    created_by = models.CharField(max_length=100, help_text="Command that produced or read it")
    metadata = models.JSONField(default=dict, blank=True)
    created_at = models.DateTimeField(default=timezone.now, db_index=True)

    class Meta:
        db_table = "corpus_snapshot"
        constraints = [
            models.UniqueConstraint(fields=["kind", "content_hash"], name="unique_corpus_snapshot"),
        ]
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.kind}:{self.name} ({self.record_count})"
