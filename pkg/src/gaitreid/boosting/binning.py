"""Quantile binning of continuous features for histogram split finding.

Each feature gets an ordered array of bin boundaries (actual data values).
A value v maps to the index of the first boundary >= v; values above the
last boundary map to the final bin. A feature with m boundaries therefore
has m + 1 bins, capped at max_bins. The feature maximum seen at fit time
is kept so the top split threshold can be materialized as a midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BinSpec:
    """Boundaries plus the fitted maximum for one feature."""

    boundaries: np.ndarray  # ascending, possibly empty (constant feature)
    upper: float

    @property
    def n_bins(self) -> int:
        return len(self.boundaries) + 1

    def threshold_value(self, t: int) -> float:
        """Real-valued split threshold for 'left = bins <= t'.

        Midpoint between adjacent boundaries; the top boundary pairs with
        the fitted feature maximum.
        """
        b = self.boundaries
        if t + 1 < len(b):
            return 0.5 * (float(b[t]) + float(b[t + 1]))
        if self.upper > b[t]:
            return 0.5 * (float(b[t]) + self.upper)
        return float(b[t])


def build_bins(features: np.ndarray, max_bins: int) -> list[BinSpec]:
    """Derive per-feature bin boundaries from distinct values or quantiles.

    Features with at most max_bins distinct values get one bin per value;
    otherwise boundaries are max_bins - 1 data-valued quantiles (deduped).
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 1:
        raise ValueError("build_bins expects a non-empty 2-D feature matrix")
    specs = []
    for j in range(features.shape[1]):
        col = features[:, j]
        distinct = np.unique(col)
        if len(distinct) <= max_bins:
            boundaries = distinct[:-1]
        else:
            fractions = np.arange(1, max_bins) / max_bins
            boundaries = np.unique(np.quantile(col, fractions, method="lower"))
            if boundaries[-1] == distinct[-1]:
                boundaries = boundaries[:-1]
        specs.append(BinSpec(boundaries=boundaries, upper=float(distinct[-1])))
    return specs


def bin_matrix(features: np.ndarray, specs: list[BinSpec]) -> np.ndarray:
    """Map raw feature values to bin indices (int32, one column per feature)."""
    features = np.asarray(features, dtype=np.float64)
    binned = np.empty(features.shape, dtype=np.int32)
    for j, spec in enumerate(specs):
        binned[:, j] = np.searchsorted(spec.boundaries, features[:, j], side="left")
    return binned
