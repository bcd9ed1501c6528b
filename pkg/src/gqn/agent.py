"""The growing Q-network agent.

A single dense net predicts one utility row per action dimension over the
full bin grid; the joint Q-value is the mean of the selected per-dimension
utilities. Action choice and bootstrap maxima are restricted to the bins
active at the ladder's current level. Targets use n-step rewards and,
by default, per-dimension double-Q: the online net picks the bootstrap
bins, the target net scores them.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import nets
from .actions import ResolutionLadder, active_indices, build_ladder, grow
from .blob import load_blob, save_blob
from .nets import DivergenceError
from .replay import Batch, PrioritizedReplay


@dataclass
class Hyperparams:
    discount: float = 0.99
    n_step: int = 3
    batch_size: int = 256
    learning_rate: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    target_period: int = 100
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_frac: float = 0.1  # fraction of total env steps to anneal over
    per_alpha: float = 0.6
    per_beta_start: float = 0.4
    per_beta_end: float = 1.0
    per_eps: float = 1e-3
    huber_delta: float = 1.0
    hidden_dims: tuple[int, ...] = (512, 512)
    train_every: int = 1
    min_fill: int = 1000
    replay_capacity: int = 100_000
    pure_target_max: bool = False  # bootstrap argmax from the target net instead of online
    seed: int = 0

    def __post_init__(self):
        self.hidden_dims = tuple(int(d) for d in self.hidden_dims)
        if not 0.0 <= self.discount < 1.0:
            raise ValueError(f"discount must be in [0, 1), got {self.discount}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.n_step < 1:
            raise ValueError(f"n_step must be >= 1, got {self.n_step}")
        if self.train_every < 1:
            raise ValueError(f"train_every must be >= 1, got {self.train_every}")
        if not self.huber_delta > 0:
            raise ValueError(f"huber_delta must be positive, got {self.huber_delta}")


def epsilon_schedule(env_steps: int, total_env_steps: int, hyper: Hyperparams) -> float:
    """Linear anneal from epsilon_start to epsilon_end over the first
    epsilon_decay_frac of the run, then constant."""
    decay_steps = max(1.0, hyper.epsilon_decay_frac * total_env_steps)
    frac = min(1.0, env_steps / decay_steps)
    return hyper.epsilon_start + (hyper.epsilon_end - hyper.epsilon_start) * frac


def beta_schedule(env_steps: int, total_env_steps: int, hyper: Hyperparams) -> float:
    """Linear anneal of the importance-sampling exponent over the whole run."""
    frac = min(1.0, env_steps / max(1, total_env_steps))
    return hyper.per_beta_start + (hyper.per_beta_end - hyper.per_beta_start) * frac


def q_value(utilities: np.ndarray, bin_indices) -> float:
    """Joint Q from one (M, full_bins) utility table: mean of the selected
    per-dimension entries."""
    utilities = np.asarray(utilities)
    idx = np.asarray(bin_indices, dtype=np.int64)
    m, n_full = utilities.shape
    if idx.shape != (m,):
        raise IndexError(f"need {m} bin indices, got shape {idx.shape}")
    if np.any(idx < 0) or np.any(idx >= n_full):
        raise IndexError(f"bin indices {idx.tolist()} out of range [0, {n_full})")
    return float(np.sum(utilities[np.arange(m), idx]) / m)


class GqnAgent:
    def __init__(self, obs_dim: int, ladder: ResolutionLadder, hyper: Hyperparams):
        self.obs_dim = int(obs_dim)
        self.ladder = ladder
        self.hyper = hyper
        m, n_full = ladder.action_dim, ladder.full_bins
        dims = (self.obs_dim, *hyper.hidden_dims, m * n_full)
        seeds = np.random.SeedSequence(hyper.seed).generate_state(3)
        self.online_net = nets.init_net(dims, seed=int(seeds[0]))
        self.target_net = self.online_net.clone()
        self.adam = nets.init_adam(self.online_net, hyper.learning_rate,
                                   hyper.adam_beta1, hyper.adam_beta2, hyper.adam_epsilon)
        self.explore_rng = np.random.default_rng(int(seeds[1]))
        self.replay = PrioritizedReplay(hyper.replay_capacity, alpha=hyper.per_alpha,
                                        eps_priority=hyper.per_eps, seed=int(seeds[2]))
        self.env_steps = 0
        self.grad_steps = 0

    # -- forward surfaces ---------------------------------------------------

    def utilities(self, net: nets.DenseNet, observations: np.ndarray) -> np.ndarray:
        """(B, M, full_bins) utility tables for a batch of observations."""
        obs = np.asarray(observations, dtype=np.float64)
        if obs.ndim == 1:
            obs = obs[None, :]
        out, _ = nets.forward(net, obs)
        return out.reshape(obs.shape[0], self.ladder.action_dim, self.ladder.full_bins)

    def select_action(self, observation, epsilon: float) -> np.ndarray:
        """Per-dimension epsilon-greedy over the active bins only.

        Each dimension independently explores with probability epsilon
        (uniform over active bins); otherwise it takes the active-bin argmax
        of the online utilities, ties to the lowest index. Greedy calls
        (epsilon == 0) draw nothing from the exploration stream.
        """
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
        util = self.utilities(self.online_net, observation)[0]
        active = active_indices(self.ladder)
        greedy = active[np.argmax(util[:, active], axis=1)]
        if epsilon == 0.0:
            return greedy
        m = self.ladder.action_dim
        explore = self.explore_rng.random(m) < epsilon
        if np.any(explore):
            draws = active[self.explore_rng.integers(0, active.shape[0], size=m)]
            return np.where(explore, draws, greedy)
        return greedy

    # -- targets and updates ------------------------------------------------

    def _bootstrap_bins(self, boot_states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-dimension bootstrap bin choice over the current active set.

        Returns (target-net utilities, chosen full-grid bins). The argmax
        comes from the online net (double-Q) unless pure_target_max is set.
        """
        active = active_indices(self.ladder)
        target_util = self.utilities(self.target_net, boot_states)
        chooser = target_util if self.hyper.pure_target_max else \
            self.utilities(self.online_net, boot_states)
        bins = active[np.argmax(chooser[:, :, active], axis=2)]
        return target_util, bins

    def td_target(self, batch: Batch) -> np.ndarray:
        """n-step targets: reward sum plus discounted masked bootstrap value."""
        if len(batch) == 0:
            raise ValueError("empty batch")
        target_util, bins = self._bootstrap_bins(batch.bootstrap_states)
        b, m = bins.shape
        selected = target_util[np.arange(b)[:, None], np.arange(m)[None, :], bins]
        boot_value = selected.sum(axis=1) / m
        return batch.n_step_rewards + batch.bootstrap_discounts * boot_value

    def predicted_q(self, batch: Batch) -> tuple[np.ndarray, nets.ForwardCache, np.ndarray]:
        """Joint Q at the stored action bins, plus what backprop needs."""
        out, cache = nets.forward(self.online_net, batch.states)
        b, m = batch.action_bins.shape
        n_full = self.ladder.full_bins
        flat_idx = batch.action_bins + np.arange(m)[None, :] * n_full
        pred = out[np.arange(b)[:, None], flat_idx].sum(axis=1) / m
        return pred, cache, flat_idx

    def train_step(self, beta: float | None = None) -> dict[str, float]:
        """One PER-weighted gradient step; returns loss/TD diagnostics.

        Gradient flows only through the M selected utility entries per
        sample, each carrying 1/M of the sample's loss gradient. Hard
        target sync every target_period gradient steps.
        """
        hyper = self.hyper
        if beta is None:
            beta = hyper.per_beta_start
        batch, handles, weights = self.replay.sample(hyper.batch_size, beta)
        targets = self.td_target(batch)
        pred, cache, flat_idx = self.predicted_q(batch)
        loss, dloss_dpred = nets.huber_loss_and_grad(pred, targets, hyper.huber_delta, weights)
        if not np.isfinite(loss):
            raise DivergenceError(f"loss diverged (value {loss})")
        b = len(batch)
        out_grads = np.zeros((b, self.ladder.action_dim * self.ladder.full_bins))
        out_grads[np.arange(b)[:, None], flat_idx] = \
            (dloss_dpred / self.ladder.action_dim)[:, None]
        grads = nets.backward(self.online_net, cache, out_grads)
        nets.adam_step(self.online_net, grads, self.adam)
        td_errors = targets - pred
        self.replay.update_priorities(handles, np.abs(td_errors))
        self.grad_steps += 1
        if self.grad_steps % hyper.target_period == 0:
            nets.copy_params(self.online_net, self.target_net)
        return {
            "loss": loss,
            "mean_td_error": float(np.mean(np.abs(td_errors))),
            "mean_q": float(np.mean(pred)),
        }

    def on_growth(self, new_ladder: ResolutionLadder) -> None:
        """Adopt the grown ladder. Heads for every bin have existed since
        init, so no parameters change; only the mask widens."""
        if new_ladder.active_level < self.ladder.active_level:
            raise ValueError("ladder level may only increase")
        self.ladder = new_ladder

    # -- persistence ----------------------------------------------------------

    def checkpoint_state(self, extra_meta: dict | None = None):
        """(meta, arrays) capturing nets, optimizer, ladder, counters, rng."""
        meta_online, arrays = nets.net_state(self.online_net, self.adam, prefix="online_")
        meta_target, arrays_t = nets.net_state(self.target_net, prefix="target_")
        arrays.update(arrays_t)
        hyper = asdict(self.hyper)
        hyper["hidden_dims"] = list(self.hyper.hidden_dims)
        meta = {
            "obs_dim": self.obs_dim,
            "online": meta_online,
            "target": meta_target,
            "hyper": hyper,
            "ladder": {
                "action_dim": self.ladder.action_dim,
                "min_bins": self.ladder.level_bins[0],
                "max_bins": self.ladder.level_bins[-1],
                "active_level": self.ladder.active_level,
                "bounds_lo": list(self.ladder.bounds_lo),
                "bounds_hi": list(self.ladder.bounds_hi),
            },
            "env_steps": self.env_steps,
            "grad_steps": self.grad_steps,
            "explore_rng": self.explore_rng.bit_generator.state,
        }
        if extra_meta:
            meta["extra"] = extra_meta
        return meta, arrays

    def save(self, path: str | Path, extra_meta: dict | None = None) -> None:
        meta, arrays = self.checkpoint_state(extra_meta)
        save_blob(path, meta, arrays)

    @classmethod
    def _from_state(cls, meta: dict, arrays: dict) -> "GqnAgent":
        hyper_dict = dict(meta["hyper"])
        hyper_dict["hidden_dims"] = tuple(hyper_dict["hidden_dims"])
        hyper = Hyperparams(**hyper_dict)
        lad = meta["ladder"]
        bounds = np.stack([lad["bounds_lo"], lad["bounds_hi"]], axis=1)
        ladder = build_ladder(lad["min_bins"], lad["max_bins"], lad["action_dim"], bounds)
        for _ in range(lad["active_level"]):
            ladder, _ = grow(ladder)
        agent = cls(meta["obs_dim"], ladder, hyper)
        agent.online_net, agent.adam = nets.net_from_state(meta["online"], arrays, prefix="online_")
        agent.target_net, _ = nets.net_from_state(meta["target"], arrays, prefix="target_")
        agent.env_steps = int(meta["env_steps"])
        agent.grad_steps = int(meta["grad_steps"])
        agent.explore_rng.bit_generator.state = meta["explore_rng"]
        return agent

    @classmethod
    def load(cls, path: str | Path) -> tuple["GqnAgent", dict]:
        """Returns (agent, extra_meta). Replay contents are not part of the
        agent checkpoint; the harness snapshots them separately for resume."""
        meta, arrays = load_blob(path)
        return cls._from_state(meta, arrays), meta.get("extra", {})
