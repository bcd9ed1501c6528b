"""Return and control-smoothness analytics for evaluation episodes.

Reported per episode: unpenalized return R, incurred penalty P, mean action
magnitude, mean instantaneous action change, and an FFT-based smoothness
score (amplitude-weighted mean frequency; lower is smoother).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class EpisodeTrace:
    actions: np.ndarray  # (T, action_dim), agent-side units
    rewards_original: np.ndarray  # (T,)
    rewards: np.ndarray  # (T,) penalized
    dt: float


def fft_smoothness(signal, dt: float) -> float:
    """Amplitude-weighted mean frequency of the one-sided spectrum, DC excluded.

    SM = (2 / (n_f * f_s)) * sum_i A_i * f_i, where A is the one-sided
    amplitude spectrum, f_s = 1/dt and n_f counts the non-DC components.
    Constant signals score 0; faster oscillation scores higher.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 4:
        raise ValueError(f"signal must be a 1-D sequence of length >= 4, got shape {x.shape}")
    n = x.shape[0]
    spectrum = np.fft.rfft(x)
    amps = 2.0 * np.abs(spectrum) / n
    if n % 2 == 0:
        amps[-1] /= 2.0  # Nyquist bin is unpaired
    freqs = np.fft.rfftfreq(n, d=dt)
    amps, freqs = amps[1:], freqs[1:]
    f_s = 1.0 / dt
    return float(2.0 / (amps.shape[0] * f_s) * np.sum(amps * freqs))


def episode_metrics(trace: EpisodeTrace) -> dict[str, float]:
    """R, P, abs_a, abs_da, SM for one episode trace.

    SM needs at least 4 steps of signal; traces of length 2-3 report it
    as NaN rather than failing.
    """
    actions = np.asarray(trace.actions, dtype=np.float64)
    if actions.ndim != 2 or actions.shape[0] < 2:
        raise ValueError(f"need a (T>=2, M) action trace, got shape {actions.shape}")
    r_orig = np.asarray(trace.rewards_original, dtype=np.float64)
    r_pen = np.asarray(trace.rewards, dtype=np.float64)
    if r_orig.shape[0] != actions.shape[0] or r_pen.shape[0] != actions.shape[0]:
        raise ValueError("action and reward lengths are inconsistent")
    if actions.shape[0] >= 4:
        sm = float(np.mean([fft_smoothness(actions[:, j], trace.dt)
                            for j in range(actions.shape[1])]))
    else:
        sm = float("nan")
    return {
        "R": float(np.sum(r_orig)),
        "P": float(np.sum(r_orig - r_pen)),
        "abs_a": float(np.mean(np.abs(actions))),
        "abs_da": float(np.mean(np.abs(np.diff(actions, axis=0)))),
        "SM": sm,
    }


RADAR_KEYS = ("R", "P", "abs_a", "abs_da", "SM")


def normalize_radar(metrics: dict[str, float], baseline_metrics: dict[str, float]):
    """Component-wise metric/baseline ratios; zero-baseline entries come back
    as None rather than dividing."""
    out: dict[str, float | None] = {}
    for key in RADAR_KEYS:
        base = baseline_metrics[key]
        out[key] = None if base == 0.0 else metrics[key] / base
    return out
