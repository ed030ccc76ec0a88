"""
Modeling App Configuration
Span-extraction models, fine-tuning stages and decoding.
"""

from django.apps import AppConfig


class ModelingConfig(AppConfig):
    """Configuration for the modeling app"""

    default_auto_field = "django.db.models.BigAutoField"
    name = "modeling"
    verbose_name = "Modeling"
