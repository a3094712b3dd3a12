"""Training loop, deterministic evaluation, and flat-float64 checkpoints.

The trainer alternates rollout collection (n_steps environment steps,
crossing episode boundaries) with PPO updates until the target episode
count is reached; a trailing partial rollout is discarded rather than
updated on. Checkpoints store the parameter vector (and optimizer moments)
as raw little-endian float64 after a JSON header, so a save/load round
trip is bit-exact.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .network import NetConfig, PolicyNet, sample_action
from .ppo import Adam, PPOParams, RolloutBuffer, UpdateStats, ppo_update

CHECKPOINT_MAGIC = b"CTP1"
CHECKPOINT_VERSION = 1


@dataclass
class EpisodeRecord:
    episode: int
    failures: int
    replans: int
    reward_sum: float
    steps: int
    completed: int


@dataclass
class TrainResult:
    records: list[EpisodeRecord]
    update_stats: list[UpdateStats]
    net: PolicyNet
    adam: Adam
    episodes_done: int
    total_steps: int


@dataclass
class EvalSummary:
    records: list[EpisodeRecord]
    failures_mean: float
    failures_std: float
    replans_mean: float
    replans_std: float
    reward_mean: float


def episode_seed(seed: int, index: int) -> list[int]:
    """Stable per-episode seed material (fed to numpy SeedSequence)."""
    return [int(seed), int(index)]


def _flat_obs(obs: np.ndarray) -> np.ndarray:
    return np.asarray(obs, dtype=np.float64).ravel()


def save_checkpoint(
    path,
    net: PolicyNet,
    *,
    episodes_done: int = 0,
    total_steps: int = 0,
    seed: Optional[int] = None,
    adam: Optional[Adam] = None,
) -> None:
    header = {
        "version": CHECKPOINT_VERSION,
        "obs_dim": net.cfg.obs_dim,
        "act_dim": net.cfg.act_dim,
        "hidden": list(net.cfg.hidden),
        "log_std_min": net.cfg.log_std_min,
        "log_std_max": net.cfg.log_std_max,
        "n_params": net.n_params,
        "episodes_done": episodes_done,
        "total_steps": total_steps,
        "seed": seed,
        "adam": None,
    }
    if adam is not None:
        header["adam"] = {"lr": adam.lr, "beta1": adam.beta1, "beta2": adam.beta2,
                          "eps": adam.eps, "t": adam.t}
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(net.params.astype("<f8").tobytes())
        if adam is not None:
            fh.write(adam.m.astype("<f8").tobytes())
            fh.write(adam.v.astype("<f8").tobytes())


def load_checkpoint(path):
    """Returns (net, header dict, adam or None)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')}")
        n = header["n_params"]
        params = np.frombuffer(fh.read(n * 8), dtype="<f8").astype(np.float64)
        cfg = NetConfig(
            obs_dim=header["obs_dim"],
            act_dim=header["act_dim"],
            hidden=tuple(header["hidden"]),
            log_std_min=header["log_std_min"],
            log_std_max=header["log_std_max"],
        )
        net = PolicyNet(cfg, params=params)
        adam = None
        if header.get("adam") is not None:
            a = header["adam"]
            adam = Adam(n, a["lr"], a["beta1"], a["beta2"], a["eps"])
            adam.m = np.frombuffer(fh.read(n * 8), dtype="<f8").astype(np.float64)
            adam.v = np.frombuffer(fh.read(n * 8), dtype="<f8").astype(np.float64)
            adam.t = a["t"]
    return net, header, adam


def train(
    env,
    params: PPOParams,
    seed: int,
    *,
    net: Optional[PolicyNet] = None,
    adam: Optional[Adam] = None,
    episodes_done: int = 0,
    checkpoint_path=None,
    checkpoint_every: Optional[int] = None,
    on_episode: Optional[Callable[[EpisodeRecord], None]] = None,
) -> TrainResult:
    """Run PPO until params.total_episodes episodes have completed.

    Pass net/adam/episodes_done from a loaded checkpoint to resume; episode
    numbering continues monotonically and reseeds the environment at the
    resumed index.
    """
    init_rng = np.random.default_rng([seed, 0])
    action_rng = np.random.default_rng([seed, 1])
    update_rng = np.random.default_rng([seed, 2])
    if net is None:
        net = PolicyNet(
            NetConfig(
                obs_dim=env.observation_size,
                act_dim=env.action_size,
                log_std_init=params.log_std_init,
            ),
            init_rng,
        )
    if adam is None:
        adam = Adam(net.n_params, params.learning_rate)

    records: list[EpisodeRecord] = []
    update_stats: list[UpdateStats] = []
    total_steps = 0
    buffer = RolloutBuffer(params.n_steps, net.cfg.obs_dim, net.cfg.act_dim)

    def checkpoint(final: bool = False) -> None:
        if checkpoint_path is None:
            return
        due = final or (
            checkpoint_every is not None
            and episodes_done > 0
            and episodes_done % checkpoint_every == 0
        )
        if due:
            save_checkpoint(
                checkpoint_path, net,
                episodes_done=episodes_done, total_steps=total_steps,
                seed=seed, adam=adam,
            )

    if episodes_done >= params.total_episodes:
        checkpoint(final=True)
        return TrainResult(records, update_stats, net, adam, episodes_done, total_steps)

    obs = _flat_obs(env.reset(episode_seed(seed, episodes_done)))
    ep_reward = 0.0
    reached_target = False
    while not reached_target:
        buffer.reset()
        last_done = False
        while not buffer.full:
            mean, log_std, value = net.forward_single(obs)
            action, log_prob = sample_action(mean, log_std, action_rng)
            out = env.step(action)
            buffer.add(obs, action, log_prob, out.reward, value, out.done)
            ep_reward += out.reward
            total_steps += 1
            last_done = out.done
            if out.done:
                rec = EpisodeRecord(
                    episode=episodes_done,
                    failures=env.episode_failures,
                    replans=env.episode_replans,
                    reward_sum=ep_reward,
                    steps=env.episode_steps,
                    completed=env.episode_completed,
                )
                records.append(rec)
                if on_episode is not None:
                    on_episode(rec)
                episodes_done += 1
                checkpoint()
                if episodes_done >= params.total_episodes:
                    reached_target = True
                    break
                obs = _flat_obs(env.reset(episode_seed(seed, episodes_done)))
                ep_reward = 0.0
            else:
                obs = _flat_obs(out.observation)
        if not buffer.full:
            break  # partial trailing rollout is dropped, never trained on
        last_value = 0.0 if last_done else net.forward_single(obs)[2]
        update_stats.append(ppo_update(net, buffer, last_value, params, adam, update_rng))
    checkpoint(final=True)
    return TrainResult(records, update_stats, net, adam, episodes_done, total_steps)


def evaluate(net: PolicyNet, env, n_episodes: int, seed: int) -> EvalSummary:
    """Deterministic rollouts (mean action, no sampling) with summary stats."""
    records: list[EpisodeRecord] = []
    for i in range(n_episodes):
        obs = _flat_obs(env.reset(episode_seed(seed, i)))
        ep_reward = 0.0
        while not env.done:
            mean, _, _ = net.forward_single(obs)
            out = env.step(mean)
            ep_reward += out.reward
            obs = _flat_obs(out.observation)
        records.append(EpisodeRecord(
            episode=i,
            failures=env.episode_failures,
            replans=env.episode_replans,
            reward_sum=ep_reward,
            steps=env.episode_steps,
            completed=env.episode_completed,
        ))
    failures = np.array([r.failures for r in records], dtype=np.float64)
    replans = np.array([r.replans for r in records], dtype=np.float64)
    rewards = np.array([r.reward_sum for r in records], dtype=np.float64)
    return EvalSummary(
        records=records,
        failures_mean=float(failures.mean()),
        failures_std=float(failures.std()),
        replans_mean=float(replans.mean()),
        replans_std=float(replans.std()),
        reward_mean=float(rewards.mean()),
    )
