"""Shared test utilities: fixed-utility agents and brute-force oracles."""

import itertools

import numpy as np

from gqn.actions import build_ladder, grow
from gqn.agent import GqnAgent, Hyperparams
from gqn.nets import copy_params
from gqn.replay import Batch


def make_table_agent(table, min_bins, max_bins, level=0, obs_dim=2, target_table=None,
                     **hyper_kwargs):
    """Agent whose utilities equal `table` for every state (zero weights,
    biases carry the table)."""
    table = np.asarray(table, dtype=np.float64)
    m, n = table.shape
    ladder = build_ladder(min_bins, max_bins, m)
    assert ladder.full_bins == n
    for _ in range(level):
        ladder, grew = grow(ladder)
        assert grew
    defaults = dict(hidden_dims=(), batch_size=1, min_fill=1, replay_capacity=16, seed=0)
    defaults.update(hyper_kwargs)
    agent = GqnAgent(obs_dim, ladder, Hyperparams(**defaults))
    agent.online_net.weights[0][:] = 0.0
    agent.online_net.biases[0][:] = table.reshape(-1)
    if target_table is None:
        copy_params(agent.online_net, agent.target_net)
    else:
        agent.target_net.weights[0][:] = 0.0
        agent.target_net.biases[0][:] = np.asarray(target_table).reshape(-1)
    return agent


def joint_argmax(table, active):
    """Exhaustive argmax of the mean-composed joint Q over active bins."""
    m = table.shape[0]
    best_combo, best_q = None, -np.inf
    for combo in itertools.product(active.tolist(), repeat=m):
        q = float(np.sum(table[np.arange(m), list(combo)]) / m)
        if q > best_q:
            best_q, best_combo = q, combo
    return np.array(best_combo, dtype=np.int64), best_q


def single_batch(reward=0.0, discount=0.0, obs_dim=2, m=1):
    return Batch(
        states=np.zeros((1, obs_dim)),
        action_bins=np.zeros((1, m), dtype=np.int64),
        n_step_rewards=np.array([reward]),
        bootstrap_states=np.zeros((1, obs_dim)),
        bootstrap_discounts=np.array([discount]),
    )
