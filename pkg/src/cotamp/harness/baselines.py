"""Task-picking strategies the learned policy is compared against.

random: any remaining task. sequential: the lowest-id remaining task (a
hard-coded fixed order). logical: a uniformly chosen remaining task whose
pick pose is collision-free right now, falling back to random when none
are. rl: deterministic mean action of a trained policy checkpoint.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from ..rl import load_checkpoint

BASELINE_KINDS = ("random", "logical", "sequential")
STRATEGY_KINDS = BASELINE_KINDS + ("rl",)

# strategy signature: (env, observation, rng) -> normalized action
Strategy = Callable[[object, np.ndarray, np.random.Generator], np.ndarray]


def baseline_action(kind: str, env, rng: np.random.Generator) -> np.ndarray:
    """Normalized action targeting the task a hard-coded picker would choose."""
    tasks = env.world.remaining_tasks()
    if not tasks:
        raise ValueError("no remaining tasks")
    if kind == "random":
        task = tasks[rng.integers(len(tasks))]
    elif kind == "sequential":
        task = min(tasks, key=lambda t: t.id)
    elif kind == "logical":
        free = [t for t in tasks if env.goal_accessible(t.position)]
        pool = free if free else tasks
        task = pool[rng.integers(len(pool))]
    else:
        raise ValueError(f"unknown baseline {kind!r}")
    return env.encode_position(task.position)


def make_strategy(kind: str, checkpoint: Optional[str] = None) -> Strategy:
    if kind in BASELINE_KINDS:
        def strategy(env, obs, rng, _kind=kind):
            return baseline_action(_kind, env, rng)

        return strategy
    if kind == "rl":
        if checkpoint is None:
            raise ValueError("the rl strategy needs a checkpoint path")
        net, _, _ = load_checkpoint(checkpoint)

        def strategy(env, obs, rng, _net=net):
            mean, _, _ = _net.forward_single(np.asarray(obs, dtype=np.float64).ravel())
            return mean

        return strategy
    raise ValueError(f"unknown strategy {kind!r}")
