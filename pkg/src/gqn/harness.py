"""Seeded experiment runner.

A run is fully determined by (config, seed): env resets, exploration,
replay sampling, and evaluation all derive from them, so run.csv is
byte-reproducible. Runs checkpoint at every evaluation and can resume
exactly from the latest snapshot.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .actions import build_ladder, decode, grow
from .agent import GqnAgent, Hyperparams, beta_schedule, epsilon_schedule
from .blob import load_blob, save_blob
from .envs import make_env
from .metrics import EpisodeTrace, episode_metrics, normalize_radar
from .nets import DivergenceError
from .replay import NStepAccumulator, PrioritizedReplay
from .scheduler import GrowthEvent, GrowthPolicy, GrowthScheduler

log = logging.getLogger("gqn.harness")

RUN_CSV_SCHEMA = "run_csv_v1"
EVENTS_CSV_SCHEMA = "growth_events_v1"
RUN_COLUMNS = ("env_steps", "episode", "eval_mean_return", "eval_std", "active_bins",
               "epsilon", "loss", "R", "P", "abs_a", "abs_da", "SM")

_TRAIN_TAG = 1
_EVAL_TAG = 2


def derive_seed(*parts: int) -> int:
    """Stable child seed from integer parts."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


@dataclass
class RunConfig:
    env: str
    c_a: float = 0.0
    min_bins: int = 2
    max_bins: int = 9
    bounds: tuple[float, float] = (-1.0, 1.0)
    growth: str = "adaptive"  # linear | adaptive | none
    total_episodes: int = 200
    eval_every: int = 25
    eval_episodes: int = 10
    window: int = 10
    cooldown: int = 5
    seeds: tuple[int, ...] = (0, 1, 2, 3)
    name: str = ""
    hyper_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        self.seeds = tuple(int(s) for s in self.seeds)
        self.bounds = (float(self.bounds[0]), float(self.bounds[1]))
        if self.growth not in ("linear", "adaptive", "none"):
            raise ValueError(f"growth must be linear/adaptive/none, got {self.growth!r}")
        if self.c_a < 0:
            raise ValueError(f"c_a must be >= 0, got {self.c_a}")
        for fname in ("total_episodes", "eval_every", "eval_episodes", "window"):
            if getattr(self, fname) < 1:
                raise ValueError(f"{fname} must be >= 1")
        if self.cooldown < 0:
            raise ValueError("cooldown must be >= 0")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if "seed" in self.hyper_overrides:
            raise ValueError("set the run seed via the seeds list, not hyper overrides")
        self.make_hyper(0)  # validates overrides
        env = make_env(self.env, self.c_a)  # validates env id
        build_ladder(self.min_bins, self.max_bins, env.spec.action_dim, self.bounds)
        if not self.name:
            self.name = (f"{self.env}_ca{self.c_a:g}_{self.min_bins}to{self.max_bins}"
                         f"_{self.growth}")

    def make_hyper(self, seed: int) -> Hyperparams:
        valid = {f.name for f in dataclasses.fields(Hyperparams)}
        unknown = set(self.hyper_overrides) - valid
        if unknown:
            raise ValueError(f"unknown hyper keys: {sorted(unknown)}")
        kwargs = dict(self.hyper_overrides)
        if "hidden_dims" in kwargs:
            kwargs["hidden_dims"] = tuple(kwargs["hidden_dims"])
        return Hyperparams(seed=seed, **kwargs)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "env": self.env,
            "c_a": self.c_a,
            "ladder": {"min_bins": self.min_bins, "max_bins": self.max_bins,
                       "bounds": list(self.bounds)},
            "growth": self.growth,
            "total_episodes": self.total_episodes,
            "eval_every": self.eval_every,
            "eval_episodes": self.eval_episodes,
            "window": self.window,
            "cooldown": self.cooldown,
            "seeds": list(self.seeds),
            "hyper": dict(self.hyper_overrides),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {"name", "env", "c_a", "ladder", "growth", "total_episodes", "eval_every",
                 "eval_episodes", "window", "cooldown", "seeds", "hyper"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "env" not in d:
            raise ValueError("config requires an 'env' id")
        kwargs: dict = {"env": d["env"]}
        ladder = d.get("ladder", {})
        unknown_ladder = set(ladder) - {"min_bins", "max_bins", "bounds"}
        if unknown_ladder:
            raise ValueError(f"unknown ladder keys: {sorted(unknown_ladder)}")
        if "min_bins" in ladder:
            kwargs["min_bins"] = int(ladder["min_bins"])
        if "max_bins" in ladder:
            kwargs["max_bins"] = int(ladder["max_bins"])
        if "bounds" in ladder:
            kwargs["bounds"] = tuple(ladder["bounds"])
        for key in ("name", "c_a", "growth", "total_episodes", "eval_every",
                    "eval_episodes", "window", "cooldown"):
            if key in d:
                kwargs[key] = d[key]
        if "seeds" in d:
            kwargs["seeds"] = tuple(d["seeds"])
        kwargs["hyper_overrides"] = dict(d.get("hyper", {}))
        return cls(**kwargs)


@dataclass
class EvalRow:
    env_steps: int
    episode: int
    eval_mean_return: float
    eval_std: float
    active_bins: int
    epsilon: float
    loss: float
    R: float
    P: float
    abs_a: float
    abs_da: float
    SM: float


@dataclass
class RunRecord:
    rows: list[EvalRow] = field(default_factory=list)
    events: list[GrowthEvent] = field(default_factory=list)
    checkpoint_path: str = ""
    diverged: bool = False
    wall_time: float = 0.0


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_run_csv(path: Path, rows: list[EvalRow]) -> None:
    lines = [f"# schema={RUN_CSV_SCHEMA}", ",".join(RUN_COLUMNS)]
    for row in rows:
        d = asdict(row)
        lines.append(",".join(_fmt(d[c]) for c in RUN_COLUMNS))
    path.write_text("\n".join(lines) + "\n")


def read_run_csv(path: Path) -> list[EvalRow]:
    rows = []
    lines = Path(path).read_text().splitlines()
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    header = body[0].split(",")
    if tuple(header) != RUN_COLUMNS:
        raise ValueError(f"{path}: unexpected run.csv columns {header}")
    for ln in body[1:]:
        vals = ln.split(",")
        d = dict(zip(RUN_COLUMNS, vals))
        rows.append(EvalRow(
            env_steps=int(d["env_steps"]), episode=int(d["episode"]),
            eval_mean_return=float(d["eval_mean_return"]), eval_std=float(d["eval_std"]),
            active_bins=int(d["active_bins"]), epsilon=float(d["epsilon"]),
            loss=float(d["loss"]), R=float(d["R"]), P=float(d["P"]),
            abs_a=float(d["abs_a"]), abs_da=float(d["abs_da"]), SM=float(d["SM"]),
        ))
    return rows


def write_events_csv(path: Path, events: list[GrowthEvent]) -> None:
    lines = [f"# schema={EVENTS_CSV_SCHEMA}", "env_steps,episode,old_bins,new_bins,trigger"]
    for ev in events:
        lines.append(f"{ev.env_steps},{ev.episode},{ev.old_bins},{ev.new_bins},{ev.trigger}")
    path.write_text("\n".join(lines) + "\n")


def _greedy_rollout(agent: GqnAgent, env, env_seed: int):
    obs = env.reset(env_seed)
    actions, r_orig, r_pen = [], [], []
    terminal = False
    while not terminal:
        bins = agent.select_action(obs, 0.0)
        action = decode(agent.ladder, bins)
        obs, r, r_o, terminal = env.step(action)
        actions.append(action)
        r_orig.append(r_o)
        r_pen.append(r)
    trace = EpisodeTrace(actions=np.asarray(actions), rewards_original=np.asarray(r_orig),
                         rewards=np.asarray(r_pen), dt=env.spec.dt)
    return float(np.sum(r_pen)), trace


def _eval_agent(agent: GqnAgent, env, seed: int, episode: int, episodes: int):
    returns, traces = [], []
    for i in range(episodes):
        ret, trace = _greedy_rollout(agent, env, derive_seed(seed, _EVAL_TAG, episode, i))
        returns.append(ret)
        traces.append(trace)
    return np.asarray(returns), traces


def _mean_metrics(traces) -> dict[str, float]:
    per = [episode_metrics(t) for t in traces]
    return {k: float(np.mean([p[k] for p in per])) for k in per[0]}


def _apply_growth(agent: GqnAgent, scheduler: GrowthScheduler, episode: int, trigger: str) -> None:
    old_bins = agent.ladder.active_bins
    new_ladder, grew = grow(agent.ladder)
    if not grew:
        return
    agent.on_growth(new_ladder)
    scheduler.record(agent.env_steps, episode, old_bins, new_ladder.active_bins, trigger)
    log.info("growth (%s): %d -> %d bins at episode %d, env step %d",
             trigger, old_bins, new_ladder.active_bins, episode, agent.env_steps)


def _save_training_state(path: Path, agent: GqnAgent, scheduler: GrowthScheduler,
                         record: RunRecord, next_episode: int, last_loss: float,
                         config: RunConfig, seed: int) -> None:
    agent_meta, arrays = agent.checkpoint_state()
    replay_meta, replay_arrays = agent.replay.state()
    arrays.update({f"replay_{k}": v for k, v in replay_arrays.items()})
    meta = {
        "agent": agent_meta,
        "replay": replay_meta,
        "scheduler": {
            "window_values": scheduler.window.values(),
            "evals_since_growth": scheduler.evals_since_growth,
            "events": [asdict(e) for e in scheduler.events],
        },
        "rows": [asdict(r) for r in record.rows],
        "next_episode": next_episode,
        "last_loss": last_loss,
        "seed": seed,
        "config": config.to_dict(),
    }
    save_blob(path, meta, arrays)


def _load_training_state(path: Path, config: RunConfig, seed: int):
    meta, arrays = load_blob(path)
    if meta["config"] != config.to_dict() or meta["seed"] != seed:
        raise ValueError(f"{path}: snapshot was produced by a different (config, seed)")
    agent = GqnAgent._from_state(meta["agent"], arrays)
    replay_arrays = {k[len("replay_"):]: v for k, v in arrays.items() if k.startswith("replay_")}
    agent.replay = PrioritizedReplay.from_state(meta["replay"], replay_arrays)
    policy = GrowthPolicy(config.growth, config.total_episodes, config.window, config.cooldown)
    sched_meta = meta["scheduler"]
    scheduler = GrowthScheduler(policy, agent.ladder.num_levels)
    for v in sched_meta["window_values"]:
        scheduler.window.push(v)
    scheduler.evals_since_growth = int(sched_meta["evals_since_growth"])
    scheduler.events = [GrowthEvent(**e) for e in sched_meta["events"]]
    record = RunRecord(rows=[EvalRow(**r) for r in meta["rows"]], events=scheduler.events)
    return agent, scheduler, record, int(meta["next_episode"]), float(meta["last_loss"])


def train(config: RunConfig, seed: int, out_dir, resume: bool = True,
          stop_after_episode: int | None = None) -> RunRecord:
    """Run one seeded training cell, writing run.csv / growth_events.csv /
    config.json / checkpoint.bin (and a resume snapshot) into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
    state_path = out / "state.bin"
    checkpoint_path = out / "checkpoint.bin"
    started = time.perf_counter()

    env = make_env(config.env, config.c_a)
    eval_env = make_env(config.env, config.c_a)
    hyper = config.make_hyper(seed)
    total_env_steps = config.total_episodes * env.spec.horizon

    if resume and state_path.exists():
        agent, scheduler, record, start_episode, last_loss = _load_training_state(
            state_path, config, seed)
        hyper = agent.hyper
        log.info("resuming %s seed %d from episode %d", config.name, seed, start_episode)
    else:
        ladder = build_ladder(config.min_bins, config.max_bins, env.spec.action_dim, config.bounds)
        agent = GqnAgent(env.spec.obs_dim, ladder, hyper)
        policy = GrowthPolicy(config.growth, config.total_episodes, config.window, config.cooldown)
        scheduler = GrowthScheduler(policy, ladder.num_levels)
        record = RunRecord(events=scheduler.events)
        start_episode = 0
        last_loss = float("nan")

    record.checkpoint_path = str(checkpoint_path)
    min_ready = max(hyper.batch_size, hyper.min_fill)

    try:
        for episode in range(start_episode, config.total_episodes):
            if config.growth == "linear":
                while agent.ladder.active_level < scheduler.linear_target(episode):
                    _apply_growth(agent, scheduler, episode, "linear")

            acc = NStepAccumulator(hyper.n_step, hyper.discount)
            obs = env.reset(derive_seed(seed, _TRAIN_TAG, episode))
            terminal = False
            while not terminal:
                eps = epsilon_schedule(agent.env_steps, total_env_steps, hyper)
                bins = agent.select_action(obs, eps)
                action = decode(agent.ladder, bins)
                next_obs, reward, _, terminal = env.step(action)
                for tr in acc.accumulate(obs, bins, reward, terminal):
                    agent.replay.push(tr)
                obs = next_obs
                agent.env_steps += 1
                if agent.replay.size >= min_ready and agent.env_steps % hyper.train_every == 0:
                    diag = agent.train_step(beta_schedule(agent.env_steps, total_env_steps, hyper))
                    last_loss = diag["loss"]

            is_last = episode == config.total_episodes - 1
            if (episode + 1) % config.eval_every == 0 or is_last:
                returns, traces = _eval_agent(agent, eval_env, seed, episode, config.eval_episodes)
                mean_metrics = _mean_metrics(traces)
                eval_mean = float(np.mean(returns))
                row = EvalRow(
                    env_steps=agent.env_steps, episode=episode,
                    eval_mean_return=eval_mean, eval_std=float(np.std(returns)),
                    active_bins=agent.ladder.active_bins,
                    epsilon=epsilon_schedule(agent.env_steps, total_env_steps, hyper),
                    loss=last_loss, **mean_metrics,
                )
                record.rows.append(row)
                log.info("%s seed %d ep %d: return %.2f (bins %d)",
                         config.name, seed, episode, eval_mean, row.active_bins)
                if config.growth == "adaptive":
                    if scheduler.observe_eval(eval_mean, agent.ladder.at_max):
                        _apply_growth(agent, scheduler, episode, "adaptive")
                agent.save(checkpoint_path, extra_meta={
                    "env": config.env, "c_a": config.c_a, "seed": seed, "episode": episode})
                _save_training_state(state_path, agent, scheduler, record,
                                     episode + 1, last_loss, config, seed)
                write_run_csv(out / "run.csv", record.rows)
                write_events_csv(out / "growth_events.csv", scheduler.events)

            if stop_after_episode is not None and episode >= stop_after_episode:
                break
    except DivergenceError as exc:
        record.diverged = True
        write_run_csv(out / "run.csv", record.rows)
        write_events_csv(out / "growth_events.csv", scheduler.events)
        (out / "diagnostic.json").write_text(json.dumps(
            {"diverged": True, "error": str(exc), "episode_reached": len(record.rows)}) + "\n")
        raise

    record.wall_time = time.perf_counter() - started
    return record


def evaluate(checkpoint, episodes: int, env=None, c_a: float | None = None,
             base_seed: int = 0):
    """Greedy evaluation of a checkpoint (path or loaded agent).

    Returns {"mean", "std", "returns", "traces"}. The env comes from the
    checkpoint metadata unless one is passed explicitly; c_a overrides the
    stored penalty when given.
    """
    if isinstance(checkpoint, GqnAgent):
        agent, extra = checkpoint, {}
    else:
        agent, extra = GqnAgent.load(checkpoint)
    if env is None:
        if "env" not in extra:
            raise ValueError("checkpoint has no env metadata; pass env explicitly")
        env = make_env(extra["env"], extra["c_a"] if c_a is None else c_a)
    elif c_a is not None:
        raise ValueError("pass either a ready env or c_a, not both")
    if env.spec.obs_dim != agent.obs_dim:
        raise ValueError(
            f"env obs dim {env.spec.obs_dim} does not match agent input {agent.obs_dim}")
    if env.spec.action_dim != agent.ladder.action_dim:
        raise ValueError("env action dim does not match agent ladder")
    returns, traces = [], []
    for i in range(episodes):
        ret, trace = _greedy_rollout(agent, env, derive_seed(base_seed, _EVAL_TAG, 0, i))
        returns.append(ret)
        traces.append(trace)
    returns = np.asarray(returns)
    return {"mean": float(np.mean(returns)), "std": float(np.std(returns)),
            "returns": returns.tolist(), "traces": traces}


def _sweep_cell(config_dict: dict, seed: int, cell_dir: str):
    config = RunConfig.from_dict(config_dict)
    try:
        record = train(config, seed, cell_dir)
        return {"rows": [asdict(r) for r in record.rows], "error": None}
    except Exception as exc:  # cell failures are recorded, the sweep continues
        return {"rows": [], "error": f"{type(exc).__name__}: {exc}"}


def sweep(configs: list[RunConfig], parallel_workers: int, out_dir) -> dict:
    """Run every (config, seed) cell; aggregate learning curves per config.

    Writes aggregate.json plus one directory per cell. Workers only change
    scheduling, never per-cell outputs.
    """
    if not configs:
        raise ValueError("sweep needs at least one config")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = [(cfg, s) for cfg in configs for s in cfg.seeds]
    results: dict[tuple[str, int], dict] = {}
    if parallel_workers > 1:
        with ProcessPoolExecutor(max_workers=parallel_workers) as pool:
            futures = {
                (cfg.name, s): pool.submit(_sweep_cell, cfg.to_dict(), s,
                                           str(out / cfg.name / f"seed_{s}"))
                for cfg, s in cells
            }
            for key, fut in futures.items():
                results[key] = fut.result()
    else:
        for cfg, s in cells:
            results[(cfg.name, s)] = _sweep_cell(cfg.to_dict(), s, str(out / cfg.name / f"seed_{s}"))

    aggregate: dict[str, dict] = {}
    for cfg in configs:
        per_seed = {s: results[(cfg.name, s)] for s in cfg.seeds}
        errors = {str(s): r["error"] for s, r in per_seed.items() if r["error"]}
        ok = [r["rows"] for r in per_seed.values() if not r["error"] and r["rows"]]
        entry: dict = {"seeds": list(cfg.seeds), "errors": errors}
        if ok:
            n_rows = min(len(rows) for rows in ok)
            returns = np.array([[rows[i]["eval_mean_return"] for i in range(n_rows)] for rows in ok])
            r_orig = np.array([[rows[i]["R"] for i in range(n_rows)] for rows in ok])
            entry.update({
                "env_steps": [ok[0][i]["env_steps"] for i in range(n_rows)],
                "episodes": [ok[0][i]["episode"] for i in range(n_rows)],
                "mean_return": returns.mean(axis=0).tolist(),
                "std_return": returns.std(axis=0).tolist(),
                "mean_R": r_orig.mean(axis=0).tolist(),
                "final_mean_return": float(returns[:, -1].mean()),
                "final_mean_R": float(r_orig[:, -1].mean()),
            })
        aggregate[cfg.name] = entry
    (out / "aggregate.json").write_text(json.dumps(aggregate, indent=2, sort_keys=True) + "\n")
    return aggregate


def radar_report(run_dirs, baseline_dir, out_file=None, episodes: int = 10,
                 base_seed: int = 0, eval_c_a: float | None = None) -> dict:
    """Smoothness/performance ratios of each run against the baseline run.

    Every checkpoint (baseline included) is evaluated greedily on its own
    env; eval_c_a forces a common penalty coefficient instead, which makes
    the incurred-penalty comparison meaningful against a c_a = 0 baseline.
    """
    baseline_ckpt = Path(baseline_dir) / "checkpoint.bin"
    if not baseline_ckpt.exists():
        raise FileNotFoundError(f"baseline checkpoint missing: {baseline_ckpt}")

    def run_metrics(ckpt_path):
        result = evaluate(ckpt_path, episodes, c_a=eval_c_a, base_seed=base_seed)
        return _mean_metrics(result["traces"])

    baseline_metrics = run_metrics(baseline_ckpt)
    report: dict = {"baseline": {"dir": str(baseline_dir), "raw": baseline_metrics}, "runs": {}}
    for run_dir in run_dirs:
        ckpt = Path(run_dir) / "checkpoint.bin"
        if not ckpt.exists():
            raise FileNotFoundError(f"run checkpoint missing: {ckpt}")
        raw = run_metrics(ckpt)
        report["runs"][Path(run_dir).name] = {
            "dir": str(run_dir),
            "raw": raw,
            "ratios": normalize_radar(raw, baseline_metrics),
        }
    if out_file is not None:
        Path(out_file).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report
