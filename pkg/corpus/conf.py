"""
Access to the `QASL` settings block.

Library modules call `qasl_setting(name)` instead of touching
django.conf.settings directly so they keep working (with the same defaults)
when Django settings are not configured.
"""

from __future__ import annotations

from typing import Any

from django.conf import settings

DEFAULTS = {
    "STAGE1_LEARNING_RATE": 3e-5,
    "STAGE1_BATCH_SIZE": 24,
    "STAGE1_EPOCHS": 2,
    "STAGE2_LEARNING_RATE": 2e-5,
    "STAGE2_BATCH_SIZE": 32,
    "STAGE2_EPOCHS": 10,
    "ADAPTER_LEARNING_RATE": 1e-3,
    "ADAPTER_REDUCTION_FACTOR": 16,
    "ADAPTER_BOUNDARY_REDUCTION_FACTOR": 8,
    "MAX_SPAN_TOKENS": 30,
    "NO_ANSWER_THRESHOLD": 0.0,
    "SEPARATOR_TOKEN": "<s>",
    "CONTEXT_MODE": "user_only",
    "AUDIT_MAX_FINDINGS": None,
    "RECORD_RUNS": True,
}


def qasl_setting(name: str) -> Any:
    if name not in DEFAULTS:
        raise KeyError(f"Unknown QASL setting: {name}")
    overrides = getattr(settings, "QASL", {}) if settings.configured else {}
    return overrides.get(name, DEFAULTS[name])
