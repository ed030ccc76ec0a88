"""
Run-ledger writes for dataset files.

Commands call `record_snapshot` after reading or writing a dataset. The
ledger never feeds back into file outputs; with QASL["RECORD_RUNS"] off it
is skipped entirely.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from .conf import qasl_setting
from .utils import content_hash

logger = logging.getLogger(__name__)


def record_snapshot(
    kind: str,
    name: str,
    path: Path | str,
    data: bytes,
    record_count: int,
    created_by: str,
    metadata: Optional[dict] = None,
):
    """Get-or-create the snapshot row for these bytes. Returns (snapshot, created) or None."""
    if not qasl_setting("RECORD_RUNS"):
        return None
    from .models import CorpusSnapshot

    snapshot, created = CorpusSnapshot.objects.get_or_create(
        kind=kind,
        content_hash=content_hash(data),
        defaults={
            "name": name,
            "path": str(path),
            "record_count": record_count,
            "created_by": created_by,
            "metadata": metadata or {},
        },
    )
    if not created and snapshot.path != str(path):
        snapshot.path = str(path)
        snapshot.save(update_fields=["path"])
    logger.debug("Snapshot %s %s (%s)", kind, name, "new" if created else "known")
    return snapshot, created
