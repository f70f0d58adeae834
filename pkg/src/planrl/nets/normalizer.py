"""Streaming input normalization.

Keeps count/mean/M2 per coordinate and merges whole batches at once, so the
result is independent of how samples are grouped (up to round-off). Before
the first update the normalizer is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Normalizer:
    dim: int
    clip: float = 5.0
    count: float = 0.0
    mean: np.ndarray = field(default=None)
    m2: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.mean is None:
            self.mean = np.zeros(self.dim)
        if self.m2 is None:
            self.m2 = np.zeros(self.dim)


def normalizer_update(norm: Normalizer, batch: np.ndarray) -> None:
    """Merge a (B, dim) batch into the running statistics."""
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    if not np.isfinite(batch).all():
        raise ValueError("non-finite sample passed to normalizer_update")
    n_b = batch.shape[0]
    if n_b == 0:
        return
    mean_b = batch.mean(axis=0)
    m2_b = ((batch - mean_b) ** 2).sum(axis=0)
    delta = mean_b - norm.mean
    total = norm.count + n_b
    norm.mean = norm.mean + delta * (n_b / total)
    norm.m2 = norm.m2 + m2_b + delta * delta * (norm.count * n_b / total)
    norm.count = total


def normalize(norm: Normalizer, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if norm.count == 0.0:
        return x
    std = np.sqrt(np.maximum(norm.m2 / norm.count, 1e-8))
    return np.clip((x - norm.mean) / std, -norm.clip, norm.clip)
