from django.contrib import admin

from .models import AuditFinding, AuditRun, EvaluationRun


@admin.register(EvaluationRun)
class EvaluationRunAdmin(admin.ModelAdmin):
    list_display = ["gold_path", "preds_path", "subset", "turns", "macro_f1", "created_at"]
    list_filter = ["subset"]
    search_fields = ["gold_path", "preds_path", "gold_hash"]
    readonly_fields = ["id", "report", "created_at"]
    date_hierarchy = "created_at"


class AuditFindingInline(admin.TabularInline):
    model = AuditFinding
    extra = 0
    fields = ["position", "rule", "turn_id", "slot", "evidence", "severity"]
    readonly_fields = fields


@admin.register(AuditRun)
class AuditRunAdmin(admin.ModelAdmin):
    list_display = ["input_path", "total_findings", "created_at"]
    search_fields = ["input_path", "content_hash"]
    readonly_fields = ["id", "counts", "created_at"]
    inlines = [AuditFindingInline]


@admin.register(AuditFinding)
class AuditFindingAdmin(admin.ModelAdmin):
    list_display = ["rule", "turn_id", "slot", "evidence", "severity", "run"]
    list_filter = ["rule", "severity"]
    search_fields = ["turn_id", "evidence"]
