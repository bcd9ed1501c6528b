"""Per-dimension action discretization grids and the nested resolution ladder.

Bin counts follow the interval-doubling rule n -> 2n - 1, so every coarser
grid is an exact value subset of every finer one. The network always sees
the full grid; coarser levels only mask which bins are selectable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np


class MaskViolationError(ValueError):
    """A bin index outside the currently active subspace was used."""


def doubling_sequence(min_bins: int, limit: int) -> list[int]:
    """Bin counts reachable from min_bins by n -> 2n - 1, up to limit."""
    seq = [min_bins]
    while seq[-1] < limit:
        seq.append(2 * seq[-1] - 1)
    return seq


@dataclass(frozen=True)
class ResolutionLadder:
    action_dim: int
    level_bins: tuple[int, ...]
    bounds_lo: tuple[float, ...]
    bounds_hi: tuple[float, ...]
    active_level: int = 0

    @property
    def full_bins(self) -> int:
        return self.level_bins[-1]

    @property
    def num_levels(self) -> int:
        return len(self.level_bins)

    @property
    def active_bins(self) -> int:
        return self.level_bins[self.active_level]

    @property
    def at_max(self) -> bool:
        return self.active_level == self.num_levels - 1


def build_ladder(min_bins: int, max_bins: int, action_dim: int, bounds=(-1.0, 1.0)) -> ResolutionLadder:
    """Ladder from min_bins to max_bins via the doubling rule, starting coarse.

    bounds is either one (lo, hi) pair shared by all dimensions or a sequence
    of per-dimension pairs.
    """
    if min_bins < 2:
        raise ValueError(f"min_bins must be >= 2, got {min_bins}")
    if action_dim < 1:
        raise ValueError(f"action_dim must be >= 1, got {action_dim}")
    seq = doubling_sequence(min_bins, max_bins)
    if seq[-1] != max_bins:
        reachable = ", ".join(str(n) for n in seq)
        raise ValueError(
            f"max_bins {max_bins} not reachable from min_bins {min_bins} by "
            f"n -> 2n - 1; valid values: {reachable}"
        )
    bounds = np.asarray(bounds, dtype=np.float64)
    if bounds.shape == (2,):
        lo = np.full(action_dim, bounds[0])
        hi = np.full(action_dim, bounds[1])
    elif bounds.shape == (action_dim, 2):
        lo, hi = bounds[:, 0], bounds[:, 1]
    else:
        raise ValueError(f"bounds must be (lo, hi) or ({action_dim}, 2), got shape {bounds.shape}")
    if np.any(lo >= hi):
        raise ValueError("each bound interval must satisfy lo < hi")
    return ResolutionLadder(
        action_dim=action_dim,
        level_bins=tuple(seq),
        bounds_lo=tuple(float(v) for v in lo),
        bounds_hi=tuple(float(v) for v in hi),
    )


@lru_cache(maxsize=None)
def _grid(ladder: ResolutionLadder) -> np.ndarray:
    """(action_dim, full_bins) grid of bin values; endpoints hit bounds exactly."""
    lo = np.asarray(ladder.bounds_lo)[:, None]
    hi = np.asarray(ladder.bounds_hi)[:, None]
    n = ladder.full_bins
    idx = np.arange(n, dtype=np.float64)[None, :]
    values = lo + idx * (hi - lo) / (n - 1)
    values[:, 0] = ladder.bounds_lo
    values[:, -1] = ladder.bounds_hi
    values.setflags(write=False)
    return values


def _stride(ladder: ResolutionLadder) -> int:
    # Exact by the doubling rule: full_bins - 1 is a power-of-two multiple
    # of active_bins - 1.
    return (ladder.full_bins - 1) // (ladder.active_bins - 1)


def bin_values(ladder: ResolutionLadder) -> np.ndarray:
    """Full-resolution grid values, shape (action_dim, full_bins)."""
    return _grid(ladder)


def bin_value(ladder: ResolutionLadder, dim: int, full_bin_index: int) -> float:
    """Continuous value of one full-grid bin."""
    if not 0 <= dim < ladder.action_dim:
        raise IndexError(f"dim {dim} out of range for action_dim {ladder.action_dim}")
    if not 0 <= full_bin_index < ladder.full_bins:
        raise IndexError(f"bin index {full_bin_index} out of range for {ladder.full_bins} bins")
    return float(_grid(ladder)[dim, full_bin_index])


def active_indices(ladder: ResolutionLadder) -> np.ndarray:
    """Full-grid indices selectable at the current level (same for every dim)."""
    stride = _stride(ladder)
    return np.arange(ladder.active_bins, dtype=np.int64) * stride


def active_mask(ladder: ResolutionLadder) -> np.ndarray:
    """Boolean (action_dim, full_bins) mask; True = bin selectable."""
    row = np.zeros(ladder.full_bins, dtype=bool)
    row[active_indices(ladder)] = True
    return np.tile(row, (ladder.action_dim, 1))


def grow(ladder: ResolutionLadder) -> tuple[ResolutionLadder, bool]:
    """Advance one level; no-op at the finest level."""
    if ladder.at_max:
        return ladder, False
    return replace(ladder, active_level=ladder.active_level + 1), True


def decode(ladder: ResolutionLadder, bin_indices) -> np.ndarray:
    """Map per-dimension full-grid bin indices to the continuous action.

    Rejects masked or out-of-range indices; this is the mask-safety tripwire
    for the whole training loop.
    """
    idx = np.asarray(bin_indices, dtype=np.int64)
    if idx.shape != (ladder.action_dim,):
        raise MaskViolationError(
            f"expected {ladder.action_dim} bin indices, got shape {idx.shape}"
        )
    if np.any(idx < 0) or np.any(idx >= ladder.full_bins):
        raise MaskViolationError(f"bin indices {idx.tolist()} out of range [0, {ladder.full_bins})")
    stride = _stride(ladder)
    if np.any(idx % stride != 0):
        raise MaskViolationError(
            f"bin indices {idx.tolist()} include masked bins at level "
            f"{ladder.active_level} ({ladder.active_bins} active of {ladder.full_bins})"
        )
    return _grid(ladder)[np.arange(ladder.action_dim), idx].copy()
