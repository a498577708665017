"""Seeded subsampling and train/validation splitting."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .records import ConnectionRecord


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train / validation / test partitions of one collection."""

    train: tuple[ConnectionRecord, ...]
    validation: tuple[ConnectionRecord, ...]
    test: tuple[ConnectionRecord, ...] = field(default=())
    seed: int = 0


def stratified_sample(
    records: Sequence[ConnectionRecord], n: int, seed: int
) -> list[ConnectionRecord]:
    """Sample ``n`` records preserving per-label-name proportions within +/-1.

    Deterministic for a fixed seed. ``n`` at or above the collection size
    returns the whole collection unchanged.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    records = list(records)
    total = len(records)
    if n >= total:
        return records

    groups: dict[str, list[int]] = {}
    order: list[str] = []
    for i, record in enumerate(records):
        name = record.label.name
        if name not in groups:
            groups[name] = []
            order.append(name)
        groups[name].append(i)

    # Largest-remainder allocation: floors first, leftovers to the biggest
    # fractional parts (ties broken by first-appearance order).
    quotas = {name: n * len(groups[name]) / total for name in order}
    allocation = {name: int(quotas[name]) for name in order}
    leftover = n - sum(allocation.values())
    by_remainder = sorted(
        order, key=lambda name: (-(quotas[name] - allocation[name]), order.index(name))
    )
    for name in by_remainder[:leftover]:
        allocation[name] += 1

    rng = random.Random(seed)
    chosen: list[int] = []
    for name in order:
        take = min(allocation[name], len(groups[name]))
        chosen.extend(rng.sample(groups[name], take))
    chosen.sort()
    return [records[i] for i in chosen]


def split_records(
    records: Sequence[ConnectionRecord],
    validation_fraction: float,
    seed: int,
) -> DatasetSplit:
    """Shuffle by seed and split off a validation tail."""
    if not 0.0 < validation_fraction < 1.0:
        raise ValueError("validation_fraction must be in (0, 1)")
    indices = list(range(len(records)))
    random.Random(seed).shuffle(indices)
    n_val = min(int(round(len(indices) * validation_fraction)), max(len(indices) - 1, 0))
    val_idx = set(indices[:n_val])
    train = tuple(records[i] for i in indices if i not in val_idx)
    validation = tuple(records[i] for i in indices if i in val_idx)
    return DatasetSplit(train=train, validation=validation, seed=seed)
