"""Growth schedules: when to widen the active action subspace.

Two modes: a linear schedule over episode phases, and an adaptive rule that
grows when the current evaluation mean drops below a confidence-style
threshold built from the moving window of past evaluation returns.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


class EvalWindow:
    """Ring of the last `size` evaluation mean returns."""

    def __init__(self, size: int, values=()):
        if size < 1:
            raise ValueError(f"window size must be >= 1, got {size}")
        self.size = size
        self._values: deque[float] = deque(values, maxlen=size)

    def push(self, value: float) -> None:
        self._values.append(float(value))

    def clear(self) -> None:
        self._values.clear()

    @property
    def full(self) -> bool:
        return len(self._values) == self.size

    def values(self) -> list[float]:
        return list(self._values)

    def mean(self) -> float:
        return float(np.mean(self._values))

    def std(self) -> float:
        """Population standard deviation (well defined even for size 1)."""
        return float(np.std(self._values))


def linear_level(episode: int, total_episodes: int, num_levels: int) -> int:
    """Level index under the linear schedule: equal phases of length
    total/(num_levels + 1), with the final level holding for the remainder."""
    if not 0 <= episode < total_episodes:
        raise ValueError(f"episode {episode} outside [0, {total_episodes})")
    if num_levels < 1:
        raise ValueError(f"num_levels must be >= 1, got {num_levels}")
    phase = total_episodes / (num_levels + 1)
    return min(int(episode // phase), num_levels - 1)


def growth_threshold(window: EvalWindow) -> float:
    """Stagnation threshold: underestimate the window mean by 5% (toward
    zero) and add 0.9 window standard deviations."""
    if not window.full:
        raise ValueError("threshold is undefined until the window is full")
    mu = window.mean()
    sigma = window.std()
    return (1.00 - 0.05 * np.sign(mu)) * mu + 0.90 * sigma


@dataclass
class GrowthPolicy:
    mode: str  # "linear" | "adaptive" | "none"
    total_episodes: int = 0
    window_size: int = 10
    cooldown: int = 5

    def __post_init__(self):
        if self.mode not in ("linear", "adaptive", "none"):
            raise ValueError(f"unknown growth mode {self.mode!r}")


def adaptive_decide(policy: GrowthPolicy, window: EvalWindow, current_eval_mean: float,
                    evals_since_growth: int) -> bool:
    """True when the window is full, the cooldown has elapsed, and the
    current evaluation mean sits below the stagnation threshold."""
    if policy.mode != "adaptive":
        raise ValueError(f"adaptive_decide requires adaptive mode, got {policy.mode!r}")
    if not window.full:
        return False
    if evals_since_growth < policy.cooldown:
        return False
    return current_eval_mean < growth_threshold(window)


@dataclass
class GrowthEvent:
    env_steps: int
    episode: int
    old_bins: int
    new_bins: int
    trigger: str


@dataclass
class GrowthScheduler:
    """Stateful wrapper the training loop drives; owns window bookkeeping."""

    policy: GrowthPolicy
    num_levels: int
    window: EvalWindow = field(default=None)  # type: ignore[assignment]
    evals_since_growth: int = 0
    events: list[GrowthEvent] = field(default_factory=list)

    def __post_init__(self):
        if self.window is None:
            self.window = EvalWindow(self.policy.window_size)

    def linear_target(self, episode: int) -> int:
        """Desired level at this episode (linear mode), else current behavior
        is unchanged (returns 0 so callers never grow)."""
        if self.policy.mode != "linear":
            return 0
        return linear_level(episode, self.policy.total_episodes, self.num_levels)

    def observe_eval(self, current_eval_mean: float, at_max: bool) -> bool:
        """Feed one evaluation mean; returns True when the ladder should grow.

        The decision uses the window as it stood before this evaluation; on
        growth the window is cleared, otherwise the new mean joins it.
        """
        self.evals_since_growth += 1
        if self.policy.mode != "adaptive" or at_max:
            if self.policy.mode == "adaptive":
                self.window.push(current_eval_mean)
            return False
        if adaptive_decide(self.policy, self.window, current_eval_mean, self.evals_since_growth):
            self.window.clear()
            self.evals_since_growth = 0
            return True
        self.window.push(current_eval_mean)
        return False

    def record(self, env_steps: int, episode: int, old_bins: int, new_bins: int, trigger: str) -> None:
        self.events.append(GrowthEvent(env_steps, episode, old_bins, new_bins, trigger))
