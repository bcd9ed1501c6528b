"""Train a small growing agent on the pendulum and watch resolution grow.

A shortened run (about a minute on a laptop): the agent starts bang-bang,
learns to swing up, then the adaptive schedule widens the action grid when
the penalized returns stagnate and the policy refines with the newly
available smaller torques. Outputs land in ./demo_run/.
"""

from gqn import RunConfig, evaluate, train

config = RunConfig(
    env="pendulum_swingup",
    c_a=0.1,
    min_bins=2,
    max_bins=9,
    growth="adaptive",
    total_episodes=80,
    eval_every=5,
    eval_episodes=3,
    window=4,
    cooldown=2,
    seeds=(0,),
    hyper_overrides={
        "hidden_dims": [64, 64],
        "batch_size": 64,
        "min_fill": 1000,
        "learning_rate": 3e-4,
        "train_every": 2,
        "target_period": 200,
    },
)

record = train(config, seed=0, out_dir="demo_run", resume=False)

print("\nevaluation trace:")
for row in record.rows:
    print(f"  episode {row.episode:3d} ({row.env_steps:6d} steps): "
          f"return {row.eval_mean_return:7.2f}, active bins {row.active_bins}")
print("\ngrowth events:")
for event in record.events:
    print(f"  episode {event.episode}: {event.old_bins} -> {event.new_bins} bins ({event.trigger})")

result = evaluate("demo_run/checkpoint.bin", episodes=3)
print(f"\nfinal greedy evaluation: {result['mean']:.2f} +/- {result['std']:.2f}")
print("run artifacts: demo_run/run.csv, growth_events.csv, checkpoint.bin, config.json")
