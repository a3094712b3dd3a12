"""Task-planning environment: pick a 2D goal, get assigned the nearest task.

One environment step is one task attempt. The normalized action is decoded
to an end-effector goal inside the workspace; if the goal configuration is
collision-free the nearest remaining task is assigned and the robot drives
to its pick pose with the replanning executor. A successful reach removes
the task (the drop is not separately planned; the robot returns to its home
configuration). The observation is a 3-layer 10x10 integer grid: remaining
tasks (+1), and one cell per human arm (-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import ArmModel, JointConfig, Point2, inverse_kinematics
from .planner import PlannerParams, collision_check, execute_re_rrt_star
from .world import TaskItem, World, WorldConfig, WorldState, Workspace

GRID = 10
N_LAYERS = 3
OBS_SIZE = N_LAYERS * GRID * GRID
ACTION_SIZE = 2

# folded pose below the workspace, out of reach of the human arms
DEFAULT_HOME = np.array([-math.pi / 2, 1.2, 1.2])

FeatureMatrix = np.ndarray  # (3, 10, 10) int8, values in {-1, 0, 1}


@dataclass(frozen=True)
class RewardWeights:
    """Non-negative scales for the four reward terms."""

    task_bonus: float = 1.0
    collision_penalty: float = 1.0
    replan_penalty: float = 0.1
    distance_penalty: float = 0.5

    def __post_init__(self):
        for name in ("task_bonus", "collision_penalty", "replan_penalty", "distance_penalty"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def compute_reward(
    task_achieved: bool,
    goal_collision: bool,
    replan_count: int,
    distance: float,
    weights: RewardWeights,
) -> float:
    """Task bonus minus collision, replanning and goal-to-task-distance costs."""
    if replan_count < 0 or distance < 0:
        raise ValueError("replan_count and distance must be non-negative")
    r = 0.0
    if task_achieved:
        r += weights.task_bonus
    if goal_collision:
        r -= weights.collision_penalty
    r -= weights.replan_penalty * replan_count
    r -= weights.distance_penalty * distance
    return r


def _cell(workspace: Workspace, p: Point2) -> tuple[int, int]:
    # the epsilon keeps exact sub-space boundaries in the upper cell despite
    # float rounding (floor convention)
    ix = int(math.floor((p.x - workspace.x_min) / workspace.width * GRID + 1e-9))
    iy = int(math.floor((p.y - workspace.y_min) / workspace.height * GRID + 1e-9))
    return min(GRID - 1, max(0, ix)), min(GRID - 1, max(0, iy))


def encode_observation(workspace: Workspace, state: WorldState) -> FeatureMatrix:
    """One-hot 3x10x10 grid: layer 0 remaining tasks, layers 1-2 the arms."""
    obs = np.zeros((N_LAYERS, GRID, GRID), dtype=np.int8)
    for task in state.remaining():
        ix, iy = _cell(workspace, task.position)
        obs[0, ix, iy] = 1
    for layer, pos in enumerate(state.arm_positions, start=1):
        ix, iy = _cell(workspace, pos)
        obs[layer, ix, iy] = -1
    return obs


def nearest_task(goal_ee: Point2, state: WorldState) -> TaskItem:
    """Remaining task closest to goal_ee; ties break toward the lowest id."""
    best: Optional[TaskItem] = None
    best_d = math.inf
    for task in state.remaining():
        d = math.hypot(task.position.x - goal_ee.x, task.position.y - goal_ee.y)
        if d < best_d - 1e-15 or (abs(d - best_d) <= 1e-15 and (best is None or task.id < best.id)):
            best = task
            best_d = d
    if best is None:
        raise ValueError("no remaining tasks")
    return best


@dataclass
class StepOutcome:
    observation: FeatureMatrix
    reward: float
    done: bool
    info: dict


@dataclass(frozen=True)
class EnvParams:
    robot_quota: int = 6
    max_steps: int = 30
    # world ticks consumed by a step that never moved the robot
    failed_step_ticks: int = 1

    def __post_init__(self):
        if self.robot_quota < 1 or self.max_steps < 1 or self.failed_step_ticks < 0:
            raise ValueError("invalid environment parameters")


class TaskEnv:
    """reset/step environment over the shared-workspace world.

    Each instance owns its world and counters; run several instances with
    independent seeds for parallel rollouts.
    """

    observation_size = OBS_SIZE
    action_size = ACTION_SIZE

    def __init__(
        self,
        model: ArmModel,
        world_cfg: WorldConfig,
        planner_params: PlannerParams,
        reward_weights: RewardWeights,
        env_params: EnvParams = EnvParams(),
        home: Optional[JointConfig] = None,
    ):
        self.model = model
        self.world_cfg = world_cfg
        self.planner_params = planner_params
        self.weights = reward_weights
        self.params = env_params
        self.home = DEFAULT_HOME.copy() if home is None else np.asarray(home, dtype=np.float64)
        if not model.within_limits(self.home):
            raise ValueError("home configuration violates joint limits")
        self.world: Optional[World] = None
        self._done = True
        # optional list collecting per-tick execution rows (debug/demo)
        self.trace_sink: Optional[list] = None

    # -- episode metrics ---------------------------------------------------
    @property
    def done(self) -> bool:
        return self._done

    @property
    def episode_failures(self) -> int:
        return self._failures

    @property
    def episode_replans(self) -> int:
        return self._replans

    @property
    def episode_steps(self) -> int:
        return self._steps

    @property
    def episode_completed(self) -> int:
        return self._completed

    # ----------------------------------------------------------------------
    def reset(self, seed) -> FeatureMatrix:
        ss = np.random.SeedSequence(seed)
        world_seed, env_seed = ss.spawn(2)
        self.world = World(self.world_cfg, world_seed)
        self.rng = np.random.default_rng(env_seed)
        self.robot_q = self.home.copy()
        self._steps = 0
        self._completed = 0
        self._failures = 0
        self._replans = 0
        self._done = False
        return encode_observation(self.world_cfg.workspace, self.world.state)

    def decode_action(self, action) -> Point2:
        u = np.clip(np.asarray(action, dtype=np.float64).reshape(2), -1.0, 1.0)
        ws = self.world_cfg.workspace
        return Point2(
            ws.x_min + (u[0] + 1.0) / 2.0 * ws.width,
            ws.y_min + (u[1] + 1.0) / 2.0 * ws.height,
        )

    def encode_position(self, p: Point2) -> np.ndarray:
        """Inverse of decode_action (exact for in-workspace points)."""
        ws = self.world_cfg.workspace
        return np.array([
            (p.x - ws.x_min) / ws.width * 2.0 - 1.0,
            (p.y - ws.y_min) / ws.height * 2.0 - 1.0,
        ])

    def goal_accessible(self, goal_ee: Point2) -> bool:
        """Collision state of the IK solution at goal_ee against the current
        obstacles; unreachable goals count as inaccessible."""
        q = inverse_kinematics(
            self.model, goal_ee, self.robot_q,
            tol=self.planner_params.ik_tolerance,
            restarts=self.planner_params.ik_restarts, rng=self.rng,
        )
        if q is None:
            return False
        return not collision_check(self.model, q, self.world.obstacles())

    def step(self, action) -> StepOutcome:
        if self._done or self.world is None:
            raise RuntimeError("episode is finished; call reset() first")
        goal_ee = self.decode_action(action)
        state = self.world.state
        task = nearest_task(goal_ee, state)
        distance = math.hypot(task.position.x - goal_ee.x, task.position.y - goal_ee.y)

        tick_before = self.world.tick
        goal_collision = not self.goal_accessible(goal_ee)
        task_achieved = False
        replan_count = 0
        assigned: Optional[int] = None
        if not goal_collision:
            assigned = task.id
            result = execute_re_rrt_star(
                self.model, self.robot_q, task.position, self.world,
                self.planner_params, rng=self.rng, trace=self.trace_sink,
            )
            replan_count = result.replan_count
            if result.success:
                self.world.complete(task.id)
                self.robot_q = self.home.copy()  # pick done, drop is implicit
                self._completed += 1
                task_achieved = True
            else:
                self.robot_q = result.final_config

        if self.world.tick == tick_before:
            # a rejected or instantly-aborted command still consumes time
            for _ in range(self.params.failed_step_ticks):
                self.world.step()

        reward = compute_reward(task_achieved, goal_collision, replan_count, distance, self.weights)
        self._steps += 1
        if not task_achieved:
            self._failures += 1
        self._replans += replan_count
        self._done = (
            self._completed >= self.params.robot_quota
            or not self.world.remaining_tasks()
            or self._steps >= self.params.max_steps
        )
        obs = encode_observation(self.world_cfg.workspace, self.world.state)
        return StepOutcome(
            observation=obs,
            reward=reward,
            done=self._done,
            info={
                "task_achieved": task_achieved,
                "goal_collision": goal_collision,
                "replan_count": replan_count,
                "distance": distance,
                "assigned_task": assigned,
            },
        )
