"""Experiment pipelines: replanning-frequency sweep, PPO training runs,
strategy comparison, checkpoint evaluation and a verbose demo episode.

Every pipeline is fully seeded and writes raw per-run CSV records next to
any aggregate, so all reported statistics can be recomputed from disk.
Float cells are written with repr (shortest round-trip form), which makes
re-runs byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats as scipy_stats

from ..geometry import Point2
from ..planner import execute_fixed_frequency, execute_re_rrt_star, ee_path_length
from ..rl import evaluate, load_checkpoint, train
from ..world import World
from .baselines import STRATEGY_KINDS, make_strategy
from .config import ExperimentConfig
from .svgplot import grouped_bars, line_chart

# stable per-strategy stream offsets so paired worlds see decorrelated noise
_STRATEGY_STREAM = {kind: 10 + i for i, kind in enumerate(STRATEGY_KINDS)}

# comparison/eval episodes draw from a different world-seed block than
# training episodes (which use [seed, episode_index] directly)
COMPARE_SEED_OFFSET = 9000


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def moving_average(values, window: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if len(values) < window:
        return np.array([])
    return np.convolve(values, np.ones(window) / window, mode="valid")


# --------------------------------------------------------------------------
# frequency sweep (fixed-rate baselines vs the checking replanner)
# --------------------------------------------------------------------------

SWEEP_RAW_HEADER = [
    "mode", "replan_every", "seed", "success", "failure_reason", "replan_count",
    "plan_requests", "plan_failures", "ee_path_length", "ticks",
]


def run_sweep(cfg: ExperimentConfig, out_dir) -> dict:
    out = Path(out_dir)
    model = cfg.arm_model()
    home = cfg.home_config()
    goal = Point2(*cfg.sweep.goal)
    world_cfg = cfg.world_config("gaussian")

    rows = []
    for i in range(cfg.sweep.n_seeds):
        world_seed = [cfg.seed, i]
        for k, every in enumerate(cfg.sweep.replan_every):
            world = World(world_cfg, world_seed)
            rng = np.random.default_rng([cfg.seed, i, k + 1])
            res = execute_fixed_frequency(model, home, goal, world, every, cfg.planner, rng=rng)
            rows.append((
                "fixed", every, i, res.success, res.failure_reason, res.replan_count,
                res.plan_requests, res.plan_failures,
                ee_path_length(res.ee_trace), res.elapsed_ticks,
            ))
        world = World(world_cfg, world_seed)
        rng = np.random.default_rng([cfg.seed, i, 0])
        res = execute_re_rrt_star(model, home, goal, world, cfg.planner, rng=rng)
        rows.append((
            "re_rrt_star", 0, i, res.success, res.failure_reason, res.replan_count,
            res.plan_requests, res.plan_failures,
            ee_path_length(res.ee_trace), res.elapsed_ticks,
        ))
    write_csv(out / "sweep_raw.csv", SWEEP_RAW_HEADER, rows)

    def point_rows(mode, every=None):
        return [r for r in rows if r[0] == mode and (every is None or r[1] == every)]

    summary = []
    freqs, mean_lengths, fail_ratios = [], [], []
    for every in cfg.sweep.replan_every:
        sel = point_rows("fixed", every)
        freq = 1.0 / (every * cfg.planner.tick_duration)
        lengths = [r[8] for r in sel]
        ratios = [r[7] / r[6] if r[6] > 0 else 0.0 for r in sel]
        medians = float(np.median([r[5] for r in sel]))
        summary.append((
            "fixed", every, freq, len(sel), float(np.mean(lengths)),
            float(np.mean(ratios)), float(np.mean([r[3] for r in sel])),
            medians,
        ))
        freqs.append(freq)
        mean_lengths.append(float(np.mean(lengths)))
        fail_ratios.append(float(np.mean(ratios)))
    ref = point_rows("re_rrt_star")
    summary.append((
        "re_rrt_star", 0, 0.0, len(ref),
        float(np.mean([r[8] for r in ref])),
        float(np.mean([r[7] / r[6] if r[6] > 0 else 0.0 for r in ref])),
        float(np.mean([r[3] for r in ref])),
        float(np.median([r[5] for r in ref])),
    ))
    write_csv(
        out / "sweep_summary.csv",
        ["mode", "replan_every", "frequency_hz", "n_runs", "mean_ee_path_length",
         "mean_failure_ratio", "success_rate", "median_replan_count"],
        summary,
    )

    def _spearman(xs, ys):
        if len(xs) < 2 or len(set(xs)) < 2 or len(set(ys)) < 2:
            return float("nan")
        return float(scipy_stats.spearmanr(xs, ys).statistic)

    rho_len = _spearman(freqs, mean_lengths)
    rho_fail = _spearman(freqs, fail_ratios)
    stats = {
        "spearman_frequency_vs_mean_path_length": rho_len,
        "spearman_frequency_vs_failure_ratio": rho_fail,
    }
    (out / "sweep_stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")

    line_chart(
        out / "sweep_path_length.svg",
        {"fixed-rate replanning": (freqs, mean_lengths)},
        "End-effector path length vs replanning frequency",
        "replanning frequency [Hz]", "mean ee path length [m]",
    )
    line_chart(
        out / "sweep_failure_ratio.svg",
        {"fixed-rate replanning": (freqs, fail_ratios)},
        "Planning failure ratio vs replanning frequency",
        "replanning frequency [Hz]", "mean failure ratio",
    )
    return {"rows": rows, "summary": summary, **stats}


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

CURVE_HEADER = ["episode", "failures", "replans", "reward_sum", "steps", "completed"]


def run_train(cfg: ExperimentConfig, out_dir, *, on_episode=None) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    window = cfg.train.smoothing_window
    results = {}
    ma_fail_series = {}
    ma_replan_series = {}
    for seed in cfg.train.seeds:
        env = cfg.make_env("gaussian")
        ckpt = out / f"checkpoint_seed{seed}.ckpt"
        res = train(
            env, cfg.ppo, seed,
            checkpoint_path=ckpt,
            checkpoint_every=cfg.train.checkpoint_every,
            on_episode=on_episode,
        )
        rows = [
            (r.episode, r.failures, r.replans, r.reward_sum, r.steps, r.completed)
            for r in res.records
        ]
        write_csv(out / f"curves_seed{seed}.csv", CURVE_HEADER, rows)
        fails = [r.failures for r in res.records]
        reps = [r.replans for r in res.records]
        ma_f = moving_average(fails, window)
        ma_r = moving_average(reps, window)
        episodes = list(range(window - 1, window - 1 + len(ma_f)))
        write_csv(
            out / f"curves_smooth_seed{seed}.csv",
            ["episode", "failures_ma", "replans_ma"],
            list(zip(episodes, ma_f, ma_r)),
        )
        write_csv(
            out / f"updates_seed{seed}.csv",
            ["update", "policy_loss", "value_loss", "entropy", "clip_fraction", "approx_kl"],
            [
                (i, s.policy_loss, s.value_loss, s.entropy, s.clip_fraction, s.approx_kl)
                for i, s in enumerate(res.update_stats)
            ],
        )
        ma_fail_series[f"seed {seed}"] = (episodes, list(ma_f))
        ma_replan_series[f"seed {seed}"] = (episodes, list(ma_r))
        results[seed] = res
    if any(len(xs) for xs, _ in ma_fail_series.values()):
        line_chart(out / "train_failures.svg", ma_fail_series,
                   f"Task failure count ({window}-episode moving average)",
                   "episode", "failures per episode")
        line_chart(out / "train_replans.svg", ma_replan_series,
                   f"Replanning requests ({window}-episode moving average)",
                   "episode", "replans per episode")
    return results


# --------------------------------------------------------------------------
# strategy comparison
# --------------------------------------------------------------------------

COMPARE_RAW_HEADER = [
    "scenario", "strategy", "seed", "failures", "replans", "reward_sum", "steps", "completed",
]


def run_episode(env, strategy, world_seed, rng) -> float:
    obs = env.reset(world_seed)
    total = 0.0
    while not env.done:
        action = strategy(env, obs, rng)
        out = env.step(action)
        obs = out.observation
        total += out.reward
    return total


def run_compare(cfg: ExperimentConfig, out_dir, checkpoint=None) -> dict:
    out = Path(out_dir)
    strategies = {}
    for kind in cfg.compare.strategies:
        strategies[kind] = make_strategy(kind, checkpoint)  # fails fast on bad checkpoint

    rows = []
    for scenario in cfg.compare.scenarios:
        for kind in cfg.compare.strategies:
            for i in range(cfg.compare.n_runs):
                env = cfg.make_env(scenario)
                rng = np.random.default_rng([cfg.seed, i, _STRATEGY_STREAM[kind]])
                reward = run_episode(env, strategies[kind], [cfg.seed, COMPARE_SEED_OFFSET + i], rng)
                rows.append((
                    scenario, kind, i, env.episode_failures, env.episode_replans,
                    reward, env.episode_steps, env.episode_completed,
                ))
    write_csv(out / "compare_raw.csv", COMPARE_RAW_HEADER, rows)

    summary = []
    table = {}
    for scenario in cfg.compare.scenarios:
        for kind in cfg.compare.strategies:
            sel = [r for r in rows if r[0] == scenario and r[1] == kind]
            fails = np.array([r[3] for r in sel], dtype=np.float64)
            reps = np.array([r[4] for r in sel], dtype=np.float64)
            summary.append((
                scenario, kind, len(sel),
                float(fails.mean()), float(fails.std()),
                float(reps.mean()), float(reps.std()),
            ))
            table[(scenario, kind)] = (fails, reps)
    write_csv(
        out / "compare_summary.csv",
        ["scenario", "strategy", "n_runs", "failures_mean", "failures_std",
         "replans_mean", "replans_std"],
        summary,
    )

    for scenario in cfg.compare.scenarios:
        kinds = list(cfg.compare.strategies)
        f_means = [table[(scenario, k)][0].mean() for k in kinds]
        f_stds = [table[(scenario, k)][0].std() for k in kinds]
        r_means = [table[(scenario, k)][1].mean() for k in kinds]
        r_stds = [table[(scenario, k)][1].std() for k in kinds]
        grouped_bars(out / f"compare_failures_{scenario}.svg", kinds,
                     {"failures": (f_means, f_stds)},
                     f"Task failure count, {scenario} arms", "failures per episode")
        grouped_bars(out / f"compare_replans_{scenario}.svg", kinds,
                     {"replans": (r_means, r_stds)},
                     f"Replanning requests, {scenario} arms", "replans per episode")
    return {"rows": rows, "summary": summary, "table": table}


def bootstrap_pvalue_less(a, b, n_boot: int = 10_000, seed: int = 0) -> float:
    """One-sided bootstrap p-value for mean(a) < mean(b) on paired samples."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    diff = a - b
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(diff), size=(n_boot, len(diff)))
    boot_means = diff[idx].mean(axis=1)
    return float(np.mean(boot_means >= 0.0))


# --------------------------------------------------------------------------
# evaluation and demo
# --------------------------------------------------------------------------

def run_eval(cfg: ExperimentConfig, checkpoint, scenario: str, n_episodes: int,
             out_dir=None) -> dict:
    net, header, _ = load_checkpoint(checkpoint)
    env = cfg.make_env(scenario)
    summary = evaluate(net, env, n_episodes, cfg.seed + COMPARE_SEED_OFFSET)
    if out_dir is not None:
        write_csv(
            Path(out_dir) / "eval.csv",
            CURVE_HEADER,
            [(r.episode, r.failures, r.replans, r.reward_sum, r.steps, r.completed)
             for r in summary.records],
        )
    return {
        "episodes": n_episodes,
        "scenario": scenario,
        "trained_episodes": header.get("episodes_done"),
        "failures_mean": summary.failures_mean,
        "failures_std": summary.failures_std,
        "replans_mean": summary.replans_mean,
        "replans_std": summary.replans_std,
        "reward_mean": summary.reward_mean,
    }


def run_demo(cfg: ExperimentConfig, out_dir, *, scenario: str = "gaussian",
             strategy_kind: str = "random", checkpoint=None, log=print) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    env = cfg.make_env(scenario)
    strategy = make_strategy(strategy_kind, checkpoint)
    rng = np.random.default_rng([cfg.seed, 0, _STRATEGY_STREAM[strategy_kind]])
    trace_rows = []
    env.trace_sink = trace_rows
    obs = env.reset([cfg.seed, 0])
    log(f"demo episode: scenario={scenario} strategy={strategy_kind} seed={cfg.seed}")
    step = 0
    total = 0.0
    while not env.done:
        action = strategy(env, obs, rng)
        goal = env.decode_action(action)
        out_step = env.step(action)
        obs = out_step.observation
        total += out_step.reward
        info = out_step.info
        log(
            f"  step {step:2d}: goal=({goal.x:+.2f},{goal.y:+.2f}) "
            f"task={info['assigned_task']} achieved={info['task_achieved']} "
            f"goal_collision={info['goal_collision']} replans={info['replan_count']} "
            f"reward={out_step.reward:+.3f}"
        )
        step += 1
    log(
        f"episode done: steps={env.episode_steps} completed={env.episode_completed} "
        f"failures={env.episode_failures} replans={env.episode_replans} return={total:+.3f}"
    )
    trace_path = out / "demo_trace.jsonl"
    with open(trace_path, "w") as fh:
        for row in trace_rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    log(f"execution trace written to {trace_path}")
    return {
        "steps": env.episode_steps,
        "failures": env.episode_failures,
        "replans": env.episode_replans,
        "return": total,
        "trace_path": str(trace_path),
    }
