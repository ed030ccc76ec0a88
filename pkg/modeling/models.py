import uuid

from django.db import models
from django.utils import timezone


class TrainingRun(models.Model):
    """One `train` invocation: a schedule applied to a model, ending in a checkpoint."""

    STATUS_CHOICES = [
        ("RUNNING", "Running"),
        ("SUCCEEDED", "Succeeded"),
        ("FAILED", "Failed"),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    config_path = models.CharField(max_length=1000, blank=True)
    config = models.JSONField(default=dict, help_text="Resolved schedule and model config")
    seed = models.IntegerField(default=0)
    checkpoint_path = models.CharField(max_length=1000, blank=True)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default="RUNNING", db_index=True)
    error = models.TextField(blank=True)
    started_at = models.DateTimeField(default=timezone.now, db_index=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        db_table = "training_run"
        ordering = ["-started_at"]

    def __str__(self):
        return f"{self.config_path or 'train'} seed={self.seed} [{self.status}]"


class StageRecord(models.Model):
    """Per-stage summary of a TrainingRun (the full TrainReport lives in `report`)."""

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    run = models.ForeignKey(TrainingRun, on_delete=models.CASCADE, related_name="stages")
    position = models.PositiveIntegerField()
    label = models.CharField(max_length=20)
    regime = models.CharField(max_length=20, db_index=True)
    corpus = models.CharField(max_length=1000)
    steps = models.PositiveIntegerField(default=0)
    trainable_parameters = models.BigIntegerField(default=0)
    total_parameters = models.BigIntegerField(default=0)
    final_loss = models.FloatField(null=True, blank=True)
    wall_time_seconds = models.FloatField(default=0.0)
    report = models.JSONField(default=dict)

    class Meta:
        db_table = "training_stage"
        ordering = ["run", "position"]
        constraints = [
            models.UniqueConstraint(fields=["run", "position"], name="unique_stage_position"),
        ]

    def __str__(self):
        return f"{self.run_id}:{self.position}:{self.label}"
