"""Run-ledger writes for evaluations and audits (skipped when QASL["RECORD_RUNS"] is off)."""

from __future__ import annotations

from pathlib import Path

from django.db import transaction

from corpus.conf import qasl_setting
from corpus.utils import content_hash

from .audit import AuditReport
from .evaluate import MetricsReport


def record_evaluation(preds_path: Path | str, gold_path: Path | str, gold_bytes: bytes, report: MetricsReport):
    if not qasl_setting("RECORD_RUNS"):
        return None
    from .models import EvaluationRun

    return EvaluationRun.objects.create(
        preds_path=str(preds_path),
        gold_path=str(gold_path),
        gold_hash=content_hash(gold_bytes),
        subset=report.subset or "",
        turns=report.turns,
        macro_f1=report.macro_f1,
        report=report.to_dict(),
    )


def record_audit(input_path: Path | str, data: bytes, report: AuditReport):
    if not qasl_setting("RECORD_RUNS"):
        return None
    from .models import AuditFinding, AuditRun

    with transaction.atomic():
        run = AuditRun.objects.create(
            input_path=str(input_path),
            content_hash=content_hash(data),
            rules=list(report.rules),
            counts=report.counts,
            total_findings=len(report),
        )
        AuditFinding.objects.bulk_create(
            AuditFinding(
                run=run,
                position=position,
                rule=finding.rule,
                rule_version=finding.rule_version,
                turn_id=finding.turn_id,
                slot=finding.slot or "",
                evidence=finding.evidence,
                severity=finding.severity,
                reason=finding.reason,
            )
            for position, finding in enumerate(report.findings)
        )
    return run
