from django.contrib import admin

from .models import CorpusSnapshot


@admin.register(CorpusSnapshot)
class CorpusSnapshotAdmin(admin.ModelAdmin):
    list_display = ["name", "kind", "record_count", "created_by", "created_at"]
    list_filter = ["kind", "created_by"]
    search_fields = ["name", "path", "content_hash"]
    readonly_fields = ["id", "content_hash", "created_at"]
    date_hierarchy = "created_at"
    ordering = ["-created_at"]
