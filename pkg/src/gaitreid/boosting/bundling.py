"""Exclusive feature bundling: merge rarely-co-nonzero features into bundles.

Binned features whose nonzero rows (bin index > 0) overlap in at most an
allowed fraction of rows can share one histogram column. Bundle bin 0
means "every member is zero"; member feature f with m_f bins occupies the
offset range [offset_f + 1, offset_f + m_f - 1]. Split finding never reads
a member's zero bin from the bundle (left/right aggregates come from node
totals minus nonzero-bin suffix sums), so bundling changes the histogram
layout but not any split decision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BundlePlan:
    """Assignment of features to bundles with per-feature bin offsets."""

    bundles: tuple[tuple[int, ...], ...]  # bundle -> member feature indices
    feature_bundle: tuple[int, ...]       # feature -> bundle index
    feature_offset: tuple[int, ...]       # feature -> bin offset inside its bundle
    n_bins: tuple[int, ...]               # per-bundle bin count
    feature_n_bins: tuple[int, ...]       # per-feature original bin count

    @property
    def n_bundles(self) -> int:
        return len(self.bundles)

    def transform(self, binned: np.ndarray) -> np.ndarray:
        """Build the bundled bin matrix (one column per bundle).

        On a conflict row (more than one member nonzero) the member with
        the highest offset wins; with conflict threshold 0 this never
        happens on the fitting data.
        """
        out = np.zeros((binned.shape[0], self.n_bundles), dtype=np.int32)
        for b, members in enumerate(self.bundles):
            if len(members) == 1:
                f = members[0]
                out[:, b] = binned[:, f]
                continue
            column = out[:, b]
            for f in members:
                nonzero = binned[:, f] > 0
                column[nonzero] = self.feature_offset[f] + binned[nonzero, f]
        return out

    def original_bin(self, bundle: int, offset_bin: int) -> tuple[int, int]:
        """Reverse map: (bundle, offset bin) -> (original feature, original bin)."""
        if offset_bin == 0:
            raise ValueError("bundle bin 0 is shared by all members")
        for f in self.bundles[bundle]:
            start = self.feature_offset[f]
            if start < offset_bin <= start + self.feature_n_bins[f] - 1:
                return f, offset_bin - start
        raise ValueError(f"offset bin {offset_bin} outside bundle {bundle}")


def _trivial_plan(n_features: int, feature_n_bins) -> BundlePlan:
    return BundlePlan(
        bundles=tuple((f,) for f in range(n_features)),
        feature_bundle=tuple(range(n_features)),
        feature_offset=(0,) * n_features,
        n_bins=tuple(feature_n_bins),
        feature_n_bins=tuple(feature_n_bins),
    )


def efb_bundle(binned: np.ndarray, max_conflict: float = 0.0, feature_n_bins=None) -> BundlePlan:
    """Group features into exclusive bundles via greedy graph coloring.

    Two features conflict when they are simultaneously nonzero in more
    than max_conflict of the rows; conflicting features never share a
    bundle. Dense data degenerates to singleton bundles (a no-op plan).
    """
    binned = np.asarray(binned)
    n_rows, n_features = binned.shape
    if feature_n_bins is None:
        feature_n_bins = [int(binned[:, f].max()) + 1 for f in range(n_features)]
    if n_features <= 1:
        return _trivial_plan(n_features, feature_n_bins)

    nonzero = (binned > 0).astype(np.int64)
    co_counts = nonzero.T @ nonzero
    allowed = max_conflict * n_rows
    conflict = co_counts > allowed
    np.fill_diagonal(conflict, False)

    degrees = conflict.sum(axis=1)
    # highest degree first, ties by ascending feature index
    order = sorted(range(n_features), key=lambda f: (-degrees[f], f))

    bundle_members: list[list[int]] = []
    assignment = [-1] * n_features
    for f in order:
        placed = False
        for b, members in enumerate(bundle_members):
            if not any(conflict[f, m] for m in members):
                members.append(f)
                assignment[f] = b
                placed = True
                break
        if not placed:
            bundle_members.append([f])
            assignment[f] = len(bundle_members) - 1

    bundles = tuple(tuple(sorted(members)) for members in bundle_members)
    offsets = [0] * n_features
    bundle_bins = []
    for members in bundles:
        total = 1  # shared all-zero bin
        for f in members:
            offsets[f] = total - 1
            total += feature_n_bins[f] - 1
        bundle_bins.append(total)

    return BundlePlan(
        bundles=bundles,
        feature_bundle=tuple(assignment),
        feature_offset=tuple(offsets),
        n_bins=tuple(bundle_bins),
        feature_n_bins=tuple(feature_n_bins),
    )


def singleton_plan(feature_n_bins) -> BundlePlan:
    """Plan with every feature in its own bundle (bundling disabled)."""
    return _trivial_plan(len(feature_n_bins), feature_n_bins)
