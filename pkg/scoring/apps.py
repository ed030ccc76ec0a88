"""
Scoring App Configuration
Exact-span evaluation and annotation audits.
"""

from django.apps import AppConfig


class ScoringConfig(AppConfig):
    """Configuration for the scoring app"""

    default_auto_field = "django.db.models.BigAutoField"
    name = "scoring"
    verbose_name = "Scoring"
