"""
Corpus App Configuration
Slot-labeling datasets, their QA reformulation and the dataset ledger.
"""

from django.apps import AppConfig


class CorpusConfig(AppConfig):
    """Configuration for the corpus app"""

    default_auto_field = "django.db.models.BigAutoField"
    name = "corpus"
    verbose_name = "Corpus"
