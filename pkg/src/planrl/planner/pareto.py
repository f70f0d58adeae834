"""Truncated Pareto rank sampling for node selection.

The sampler draws x continuously on [1, n_n] with density proportional to
x^-(beta+1) and floors it to a rank. Under that convention the probability of
rank i < n_n is (i^-beta - (i+1)^-beta) / (1 - n_n^-beta) and the top rank
n_n itself has probability zero (x = n_n is a null event).
"""

from __future__ import annotations

import numpy as np


def pareto_rank_pmf(n_n: int, beta: float, i: int) -> float:
    """Probability that the sampled rank equals i (1-based, best rank 1)."""
    if n_n < 2:
        raise ValueError("pmf needs n_n >= 2")
    if beta <= 0:
        raise ValueError("beta must be positive")
    if not 1 <= i <= n_n:
        raise ValueError("rank out of range")
    if i == n_n:
        return 0.0
    return (i ** -beta - (i + 1.0) ** -beta) / (1.0 - n_n ** -beta)


def sample_rank(n_n: int, beta: float, rng: np.random.Generator) -> int:
    """Draw a 1-based rank; rank 1 is the highest-reward node."""
    if n_n < 1:
        raise ValueError("empty rank range")
    if n_n == 1:
        return 1
    u = rng.random()
    x = (1.0 - u * (1.0 - n_n ** -beta)) ** (-1.0 / beta)
    return min(int(x), n_n)
