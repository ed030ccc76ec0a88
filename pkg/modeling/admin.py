from django.contrib import admin

from .models import StageRecord, TrainingRun


class StageRecordInline(admin.TabularInline):
    model = StageRecord
    extra = 0
    fields = ["position", "label", "regime", "corpus", "steps", "trainable_parameters", "final_loss"]
    readonly_fields = fields


@admin.register(TrainingRun)
class TrainingRunAdmin(admin.ModelAdmin):
    list_display = ["id", "config_path", "seed", "status", "checkpoint_path", "started_at", "finished_at"]
    list_filter = ["status"]
    search_fields = ["config_path", "checkpoint_path"]
    readonly_fields = ["id", "started_at", "finished_at"]
    date_hierarchy = "started_at"
    inlines = [StageRecordInline]


@admin.register(StageRecord)
class StageRecordAdmin(admin.ModelAdmin):
    list_display = ["run", "position", "label", "regime", "steps", "trainable_parameters", "final_loss"]
    list_filter = ["label", "regime"]
    search_fields = ["corpus"]
    readonly_fields = ["id", "report"]
