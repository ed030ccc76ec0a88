"""
Few-shot splits and QA corpus subsampling.

Splits are drawn per dialog turn (all slots of a turn travel together) from
one seeded permutation: a split of size k is the first k permuted indices,
restored to original order. Every smaller split is therefore a subset of
every larger one for the same seed.

Sizes: when a dataset name matches a known benchmark family and the dataset
has that family's full size, the published split sizes are used; otherwise
size = floor(N * fraction), at least 1 for non-empty data.
"""

from __future__ import annotations

import logging
import re
from fractions import Fraction
from typing import Iterable, Optional, Union

import numpy as np

from .exceptions import SplitSizeError, SubsampleSizeError
from .loaders import QADataset, SLDataset

logger = logging.getLogger(__name__)

FRACTION_LABELS = ("1/128", "1/64", "1/32", "1/16", "1/8", "1/4", "1/2", "1")

PUBLISHED_SPLIT_SIZES: dict[str, dict[str, int]] = {
    "restaurants8k": {
        "1/128": 64,
        "1/64": 128,
        "1/32": 256,
        "1/16": 512,
        "1/8": 1024,
        "1/4": 2049,
        "1/2": 4099,
        "1": 8198,
    },
    "dstc8_buses": {"1/32": 34, "1/16": 70, "1/8": 141, "1/4": 283, "1/2": 566, "1": 1133},
    "dstc8_events": {"1/32": 46, "1/16": 93, "1/8": 187, "1/4": 374, "1/2": 749, "1": 1498},
    "dstc8_rental_cars": {"1/32": 64, "1/16": 129, "1/8": 258, "1/4": 516, "1/2": 1032, "1": 2064},
    "dstc8_homes": {"1/32": 26, "1/16": 54, "1/8": 109, "1/4": 218, "1/2": 437, "1": 874},
}

PUBLISHED_TEST_SIZES = {
    "restaurants8k": 3731,
    "dstc8_buses": 377,
    "dstc8_events": 521,
    "dstc8_rental_cars": 587,
    "dstc8_homes": 328,
}

FractionLike = Union[str, Fraction, float, int]


def parse_fraction(value: FractionLike) -> Fraction:
    try:
        fraction = Fraction(str(value).strip()) if not isinstance(value, Fraction) else value
    except (ValueError, ZeroDivisionError) as exc:
        raise SplitSizeError(f"Invalid fraction: {value!r}") from exc
    if fraction <= 0:
        raise SplitSizeError(f"Fraction must be positive: {value!r}")
    if fraction > 1:
        raise SplitSizeError(f"Fraction {value!r} is larger than the dataset")
    return fraction


def fraction_label(fraction: Fraction) -> str:
    return str(fraction)


def split_family(name: str) -> Optional[str]:
    """Map a dataset name such as "DSTC8-Homes" or "restaurants8k_train" to a family key."""
    norm = re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")
    for family in PUBLISHED_SPLIT_SIZES:
        if norm == family or norm.startswith(family + "_"):
            return family
    return None


def split_size(n: int, fraction: FractionLike, family: Optional[str] = None) -> int:
    fraction = parse_fraction(fraction)
    if family is not None:
        table = PUBLISHED_SPLIT_SIZES[family]
        label = fraction_label(fraction)
        if label not in table:
            raise SplitSizeError(
                f"Fraction {label} is not a published split for {family}",
                details=list(table),
            )
        if n == table["1"]:
            return table[label]
    if n == 0:
        return 0
    return max(1, int(n * fraction))


def _chosen_indices(n: int, k: int, seed: int) -> np.ndarray:
    order = np.random.default_rng(seed).permutation(n)
    return np.sort(order[:k])


def sample_split(ds: SLDataset, fraction: FractionLike, seed: int = 0) -> SLDataset:
    """Nested, seed-deterministic subset of turns. Fraction 1 returns ds itself."""
    fraction = parse_fraction(fraction)
    if fraction == 1:
        return ds
    family = split_family(ds.name)
    k = split_size(len(ds.turns), fraction, family)
    if k > len(ds.turns):
        raise SplitSizeError(f"Split of {k} turns requested from {len(ds.turns)}")
    chosen = _chosen_indices(len(ds.turns), k, seed)
    logger.info("Split %s @ %s (seed %d): %d of %d turns", ds.name, fraction, seed, k, len(ds.turns))
    return SLDataset(
        ontology=ds.ontology,
        turns=tuple(ds.turns[i] for i in chosen),
        name=ds.name,
    )


def available_fractions(ds: SLDataset, up_to: FractionLike = 1) -> list[str]:
    limit = parse_fraction(up_to)
    family = split_family(ds.name)
    labels: Iterable[str] = PUBLISHED_SPLIT_SIZES[family] if family else FRACTION_LABELS
    return [label for label in labels if Fraction(label) <= limit]


def sample_all_splits(ds: SLDataset, seed: int = 0, up_to: FractionLike = 1) -> dict[str, SLDataset]:
    """Every nested split up to `up_to`, smallest first."""
    return {label: sample_split(ds, label, seed) for label in available_fractions(ds, up_to)}


def subsample_qa(qa: QADataset, n: int, seed: int = 0) -> QADataset:
    """Uniform sample of n examples without replacement, kept in corpus order."""
    if n < 0 or n > len(qa.examples):
        raise SubsampleSizeError(f"Cannot sample {n} examples from {len(qa.examples)}")
    chosen = np.sort(np.random.default_rng(seed).choice(len(qa.examples), size=n, replace=False))
    return QADataset(examples=tuple(qa.examples[i] for i in chosen), name=qa.name)
