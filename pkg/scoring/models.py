import uuid

from django.db import models
from django.utils import timezone


class EvaluationRun(models.Model):
    """One `eval` invocation: predictions scored against a gold SL dataset."""

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    preds_path = models.CharField(max_length=1000)
    gold_path = models.CharField(max_length=1000)
    gold_hash = models.CharField(max_length=64, db_index=True, help_text="SHA256 of the gold file bytes")
    subset = models.CharField(max_length=50, blank=True)
    turns = models.PositiveIntegerField(default=0)
    macro_f1 = models.FloatField()
    report = models.JSONField(default=dict, help_text="Full MetricsReport")
    created_at = models.DateTimeField(default=timezone.now, db_index=True)

    class Meta:
        db_table = "evaluation_run"
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.gold_path} macro_f1={self.macro_f1:.4f}"


class AuditRun(models.Model):
    """One `audit` invocation over an SL dataset."""

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    input_path = models.CharField(max_length=1000)
    content_hash = models.CharField(max_length=64, db_index=True)
    rules = models.JSONField(default=list)
    counts = models.JSONField(default=dict, help_text="Findings per rule")
    total_findings = models.PositiveIntegerField(default=0)
    created_at = models.DateTimeField(default=timezone.now, db_index=True)

    class Meta:
        db_table = "audit_run"
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.input_path}: {self.total_findings} findings"


class AuditFinding(models.Model):
    SEVERITY_CHOICES = [
        ("ambiguity", "Ambiguity"),
        ("inconsistency", "Inconsistency"),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    run = models.ForeignKey(AuditRun, on_delete=models.CASCADE, related_name="findings")
    position = models.PositiveIntegerField()
    rule = models.CharField(max_length=50, db_index=True)
    rule_version = models.PositiveIntegerField(default=1)
    turn_id = models.CharField(max_length=200, db_index=True)
    slot = models.CharField(max_length=100, blank=True)
    evidence = models.TextField()
    severity = models.CharField(max_length=20, choices=SEVERITY_CHOICES)
    reason = models.TextField(blank=True)

    class Meta:
        db_table = "audit_finding"
        ordering = ["run", "position"]
        constraints = [
            models.UniqueConstraint(fields=["run", "position"], name="unique_audit_finding_position"),
        ]

    def __str__(self):
        return f"{self.rule}:{self.turn_id}"
