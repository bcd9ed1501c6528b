"""Control smoothness analytics: R, P, |a|, |Δa|, and the FFT score.

The FFT score is the amplitude-weighted mean frequency of the action
signal (DC excluded): constant controls score 0, bang-bang chatter at the
Nyquist rate scores highest.
"""

import numpy as np

from gqn import EpisodeTrace, episode_metrics, fft_smoothness, normalize_radar

dt = 0.05
t = np.arange(200) * dt
signals = {
    "constant 0.5": np.full(200, 0.5),
    "slow sine (0.5 Hz)": 0.5 * np.sin(2 * np.pi * 0.5 * t),
    "fast sine (5 Hz)": 0.5 * np.sin(2 * np.pi * 5.0 * t),
    "bang-bang chatter": np.where(np.arange(200) % 2 == 0, 1.0, -1.0),
}
print("FFT smoothness scores (lower = smoother):")
for name, x in signals.items():
    print(f"  {name:22s} {fft_smoothness(x, dt):8.4f}")


def trace(actions, c_a):
    actions = np.asarray(actions)[:, None]
    r_orig = np.full(actions.shape[0], 0.8)
    return EpisodeTrace(actions=actions, rewards_original=r_orig,
                        rewards=r_orig - c_a * actions[:, 0] ** 2, dt=dt)


smooth = episode_metrics(trace(signals["slow sine (0.5 Hz)"], c_a=0.5))
chatter = episode_metrics(trace(signals["bang-bang chatter"], c_a=0.5))
print("\nepisode metrics, smooth controller: ",
      {k: round(v, 4) for k, v in smooth.items()})
print("episode metrics, chattering controller:",
      {k: round(v, 4) for k, v in chatter.items()})
print("\nchatter relative to smooth (radar-style ratios):")
print({k: (round(v, 2) if v is not None else None)
       for k, v in normalize_radar(chatter, smooth).items()})
