"""Run-ledger writes for training runs (skipped when QASL["RECORD_RUNS"] is off)."""

from __future__ import annotations

from typing import Optional, Sequence

from django.db import transaction
from django.utils import timezone

from corpus.conf import qasl_setting

from .train import TrainReport


def start_training_run(config_path: str, config: dict, seed: int):
    if not qasl_setting("RECORD_RUNS"):
        return None
    from .models import TrainingRun

    return TrainingRun.objects.create(config_path=config_path or "", config=config, seed=seed)


def finish_training_run(run, reports: Sequence[TrainReport], checkpoint_path: str = "", error: Optional[str] = None):
    if run is None:
        return None
    from .models import StageRecord

    with transaction.atomic():
        for position, report in enumerate(reports):
            StageRecord.objects.create(
                run=run,
                position=position,
                label=report.stage_label,
                regime=report.regime,
                corpus=report.corpus,
                steps=report.steps,
                trainable_parameters=report.trainable_parameters,
                total_parameters=report.total_parameters,
                final_loss=report.final_loss,
                wall_time_seconds=report.wall_time_seconds,
                report=report.to_dict(),
            )
        run.status = "FAILED" if error else "SUCCEEDED"
        run.error = error or ""
        run.checkpoint_path = checkpoint_path
        run.finished_at = timezone.now()
        run.save()
    return run
