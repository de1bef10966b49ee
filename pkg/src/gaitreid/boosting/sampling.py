"""Row-sampling schemes for the boosting loop: GOSS and plain bagging."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ContractViolationError, EmptyInputError


def goss_sample(gradient_magnitudes, top_rate: float, other_rate: float, rng):
    """Gradient-based one-side sampling.

    Keeps the ceil(top_rate * n) rows with the largest gradient magnitude
    (ties broken by ascending row index), then draws a uniform sample of
    ceil(other_rate * n) rows without replacement from the remainder.
    Kept rows weigh 1; sampled rows weigh (1 - top_rate) / other_rate so
    gradient sums stay unbiased.

    Returns (row indices ascending, weights aligned to those indices).
    """
    magnitudes = np.asarray(gradient_magnitudes, dtype=np.float64)
    n = len(magnitudes)
    if n == 0:
        raise EmptyInputError("cannot sample from zero rows")
    if not 0.0 < top_rate <= 1.0:
        raise ContractViolationError(f"top_rate must be in (0, 1], got {top_rate}")
    if other_rate < 0.0 or top_rate + other_rate > 1.0 + 1e-12:
        raise ContractViolationError(
            f"rates must satisfy 0 <= other_rate <= 1 - top_rate, got "
            f"({top_rate}, {other_rate})"
        )
    if not np.all(np.isfinite(magnitudes)):
        raise ContractViolationError("gradient magnitudes must be finite")

    n_top = min(n, math.ceil(top_rate * n))
    # stable argsort on the negated magnitudes: ties fall back to row order
    order = np.argsort(-magnitudes, kind="stable")
    top = order[:n_top]
    rest = order[n_top:]

    n_other = min(len(rest), math.ceil(other_rate * n)) if other_rate > 0.0 else 0
    if n_other > 0:
        sampled = rng.choice(rest, size=n_other, replace=False)
        weight_other = (1.0 - top_rate) / other_rate
        indices = np.concatenate([top, sampled])
        weights = np.concatenate(
            [np.ones(n_top), np.full(n_other, weight_other)]
        )
    else:
        indices = top
        weights = np.ones(n_top)

    ascending = np.argsort(indices, kind="stable")
    return indices[ascending], weights[ascending]


def bagging_sample(n_rows: int, fraction: float, rng):
    """Uniform row subsample without replacement (weights are all 1)."""
    if n_rows == 0:
        raise EmptyInputError("cannot sample from zero rows")
    size = min(n_rows, math.ceil(fraction * n_rows))
    indices = np.sort(rng.choice(n_rows, size=size, replace=False))
    return indices, np.ones(size)
