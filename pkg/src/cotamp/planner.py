"""Joint-space RRT* planning and the check-then-replan execution loop.

Two execution modes share one tick discipline (one waypoint advance and one
world step per tick):

* execute_re_rrt_star checks the goal configuration and the next few
  waypoints against the current obstacles every tick and replans only when
  the path or goal is invalidated.
* execute_fixed_frequency replans unconditionally on a fixed tick schedule,
  with the per-request planning budget shrinking as the schedule tightens.
  It is the baseline whose path-length / failure-ratio tradeoff the sweep
  experiment measures.

Planning "time" budgets are simulated: a budget in seconds is converted to
an iteration cap through PlannerParams.iters_per_second. This keeps every
run bit-reproducible for a given seed while still modelling a planner that
gets less work done when asked more often.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from . import _kernels
from .geometry import ArmModel, Capsule2, JointConfig, Point2, capsule_array, inverse_kinematics

FAIL_NONE = "none"
FAIL_GOAL_IN_COLLISION = "goal_in_collision"
FAIL_REPLAN = "replan_failed"
FAIL_TICK_LIMIT = "tick_limit"


class WorldHandle(Protocol):
    """What an execution loop needs from the world: a live obstacle snapshot
    and a way to advance it by one tick."""

    def obstacles(self) -> list[Capsule2]: ...

    def step(self) -> None: ...


class StaticWorld:
    """Fixed obstacle set; ticks change nothing."""

    def __init__(self, obstacles: list[Capsule2]):
        self._obstacles = list(obstacles)

    def obstacles(self) -> list[Capsule2]:
        return self._obstacles

    def step(self) -> None:
        pass


@dataclass(frozen=True)
class PlannerParams:
    max_iters: int = 3000
    steer_step: float = 0.15
    goal_bias: float = 0.1
    rewire_radius_const: float = 3.0
    edge_check_resolution: float = 0.05
    predictive_check_count: int = 5
    # simulated per-request planning budget; None means max_iters only
    time_budget: Optional[float] = 0.5
    iters_per_second: float = 5000.0
    max_replan_attempts: int = 5
    tick_cap: int = 500
    tick_duration: float = 0.1
    ik_restarts: int = 10
    ik_tolerance: float = 1e-3

    def __post_init__(self):
        if self.max_iters <= 0:
            raise ValueError("max_iters must be positive")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must be in [0, 1]")
        if self.steer_step <= 0 or self.edge_check_resolution <= 0:
            raise ValueError("steer_step and edge_check_resolution must be positive")
        if self.predictive_check_count < 1:
            raise ValueError("predictive_check_count must be >= 1")
        if self.max_replan_attempts < 1 or self.tick_cap < 1:
            raise ValueError("max_replan_attempts and tick_cap must be >= 1")

    def effective_iters(self, budget_seconds: Optional[float] = None) -> int:
        """Iteration cap implied by a time budget (defaults to self.time_budget)."""
        budget = self.time_budget if budget_seconds is None else budget_seconds
        if budget is None or math.isinf(budget):
            return self.max_iters
        return max(1, min(self.max_iters, int(budget * self.iters_per_second)))


@dataclass
class Path:
    """Joint-space waypoints, consecutive rows at most steer_step apart (max-norm)."""

    waypoints: np.ndarray  # (n, n_joints)

    def __post_init__(self):
        self.waypoints = np.asarray(self.waypoints, dtype=np.float64)
        if self.waypoints.ndim != 2 or len(self.waypoints) == 0:
            raise ValueError("path must hold at least one waypoint")

    def __len__(self) -> int:
        return len(self.waypoints)

    @property
    def start(self) -> JointConfig:
        return self.waypoints[0]

    @property
    def end(self) -> JointConfig:
        return self.waypoints[-1]

    def cost(self) -> float:
        diffs = np.diff(self.waypoints, axis=0)
        return float(np.sum(np.sqrt(np.sum(diffs * diffs, axis=1))))


@dataclass
class PlanDebug:
    status: int
    path: Optional[Path]
    nodes: np.ndarray
    parents: np.ndarray
    costs: np.ndarray
    n_nodes: int
    goal_index: int
    iters_used: int


@dataclass
class ExecutionResult:
    success: bool
    replan_count: int
    ee_trace: list[Point2]
    elapsed_ticks: int
    failure_reason: str
    plan_requests: int = 0
    plan_failures: int = 0
    final_config: Optional[np.ndarray] = None

    def __eq__(self, other):
        if not isinstance(other, ExecutionResult):
            return NotImplemented
        return (
            self.success == other.success
            and self.replan_count == other.replan_count
            and self.ee_trace == other.ee_trace
            and self.elapsed_ticks == other.elapsed_ticks
            and self.failure_reason == other.failure_reason
            and self.plan_requests == other.plan_requests
            and self.plan_failures == other.plan_failures
            and (
                (self.final_config is None and other.final_config is None)
                or (
                    self.final_config is not None
                    and other.final_config is not None
                    and np.array_equal(self.final_config, other.final_config)
                )
            )
        )


def collision_check(model: ArmModel, q: JointConfig, obstacles: list[Capsule2]) -> bool:
    """True iff any link capsule of q overlaps any obstacle capsule."""
    if not obstacles:
        return False
    q = np.asarray(q, dtype=np.float64)
    return bool(
        _kernels.config_collides(
            q, model.base.x, model.base.y, model.lengths_array, model.link_radius,
            capsule_array(obstacles),
        )
    )


def ee_path_length(trace: list[Point2]) -> float:
    """Sum of consecutive Euclidean distances along an end-effector trace."""
    if not trace:
        raise ValueError("trace must be non-empty")
    total = 0.0
    for (x0, y0), (x1, y1) in zip(trace[:-1], trace[1:]):
        total += math.hypot(x1 - x0, y1 - y0)
    return total


def _subdivide(chain: np.ndarray, steer_step: float) -> np.ndarray:
    """Split tree edges so consecutive waypoints stay within steer_step (max-norm)."""
    out = [chain[0]]
    for a, b in zip(chain[:-1], chain[1:]):
        span = float(np.max(np.abs(b - a)))
        k = max(1, math.ceil(span / steer_step - 1e-12))
        for s in range(1, k):
            out.append(a + (b - a) * (s / k))
        out.append(b.copy())
    return np.asarray(out)


def _seed_u64(seed) -> np.uint64:
    if isinstance(seed, np.random.Generator):
        return np.uint64(seed.integers(0, 2**64, dtype=np.uint64))
    if seed is None:
        return np.uint64(np.random.default_rng().integers(0, 2**64, dtype=np.uint64))
    return np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)


def plan_rrt_star_debug(
    model: ArmModel,
    start: JointConfig,
    goal: JointConfig,
    obstacles: list[Capsule2],
    params: PlannerParams,
    seed=None,
    iters: Optional[int] = None,
) -> PlanDebug:
    """Run the planner and keep the whole tree (test and debugging surface)."""
    start = np.asarray(start, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    for name, q in (("start", start), ("goal", goal)):
        if q.shape != (model.n_joints,):
            raise ValueError(f"{name} has wrong shape {q.shape}")
        if not model.within_limits(q):
            raise ValueError(f"{name} configuration violates joint limits")
    n_iters = params.effective_iters() if iters is None else iters
    status, nodes, parents, costs, n_nodes, goal_idx = _kernels.rrt_star_core(
        start,
        goal,
        model.limits_lo,
        model.limits_hi,
        model.base.x,
        model.base.y,
        model.lengths_array,
        model.link_radius,
        capsule_array(obstacles) if obstacles else np.empty((0, 5)),
        n_iters,
        params.steer_step,
        params.goal_bias,
        params.rewire_radius_const,
        params.edge_check_resolution,
        _seed_u64(seed),
    )
    path = None
    if status == _kernels.PLAN_OK:
        chain_idx = []
        i = goal_idx
        while i != -1:
            chain_idx.append(i)
            i = parents[i]
        chain_idx.reverse()
        path = Path(_subdivide(nodes[np.asarray(chain_idx)], params.steer_step))
    return PlanDebug(
        status=status,
        path=path,
        nodes=nodes[:n_nodes].copy(),
        parents=parents[:n_nodes].copy(),
        costs=costs[:n_nodes].copy(),
        n_nodes=n_nodes,
        goal_index=goal_idx,
        iters_used=n_iters,
    )


def plan_rrt_star(
    model: ArmModel,
    start: JointConfig,
    goal: JointConfig,
    obstacles: list[Capsule2],
    params: PlannerParams,
    seed=None,
) -> Optional[Path]:
    """Plan start -> goal against a static obstacle snapshot; None on failure."""
    return plan_rrt_star_debug(model, start, goal, obstacles, params, seed=seed).path


class _Executor:
    """Shared bookkeeping for both execution loops."""

    def __init__(self, model, start, goal_ee, world, params, rng, trace):
        self.model = model
        self.params = params
        self.world = world
        self.rng = np.random.default_rng(rng)
        self.trace = trace
        self.q = np.asarray(start, dtype=np.float64).copy()
        if not model.within_limits(self.q):
            raise ValueError("start configuration violates joint limits")
        self.goal_ee = goal_ee
        self.ee_trace = [self._ee(self.q)]
        self.ticks = 0
        self.invocations = 0
        self.plan_failures = 0
        self.pending: deque[np.ndarray] = deque()
        self.q_goal: Optional[np.ndarray] = None

    def _ee(self, q) -> Point2:
        buf = np.empty((self.model.n_joints + 1, 2))
        _kernels.fk_positions(q, self.model.base.x, self.model.base.y, self.model.lengths_array, buf)
        return Point2(float(buf[-1, 0]), float(buf[-1, 1]))

    def _emit(self, event: str, **extra) -> None:
        if self.trace is not None:
            row = {"tick": self.ticks, "event": event, "q": self.q.tolist(),
                   "ee": list(self.ee_trace[-1])}
            row.update(extra)
            self.trace.append(row)

    def resolve_goal(self) -> bool:
        q_goal = inverse_kinematics(
            self.model, self.goal_ee, self.q,
            tol=self.params.ik_tolerance,
            restarts=self.params.ik_restarts, rng=self.rng,
        )
        if q_goal is None:
            return False
        self.q_goal = q_goal
        return True

    def obstacle_array(self) -> np.ndarray:
        obs = self.world.obstacles()
        return capsule_array(obs) if obs else np.empty((0, 5))

    def collides(self, q, obs_arr) -> bool:
        if obs_arr.shape[0] == 0:
            return False
        return bool(
            _kernels.config_collides(
                q, self.model.base.x, self.model.base.y, self.model.lengths_array,
                self.model.link_radius, obs_arr,
            )
        )

    def request_plan(self, obs_arr, budget: Optional[float]) -> bool:
        """One planner invocation from the current config; updates pending on success."""
        self.invocations += 1
        status, nodes, parents, costs, n_nodes, goal_idx = _kernels.rrt_star_core(
            self.q,
            self.q_goal,
            self.model.limits_lo,
            self.model.limits_hi,
            self.model.base.x,
            self.model.base.y,
            self.model.lengths_array,
            self.model.link_radius,
            obs_arr,
            self.params.effective_iters(budget),
            self.params.steer_step,
            self.params.goal_bias,
            self.params.rewire_radius_const,
            self.params.edge_check_resolution,
            _seed_u64(self.rng),
        )
        if status != _kernels.PLAN_OK:
            self.plan_failures += 1
            self._emit("plan_failed", status=int(status))
            return False
        chain = []
        i = goal_idx
        while i != -1:
            chain.append(i)
            i = parents[i]
        chain.reverse()
        waypoints = _subdivide(nodes[np.asarray(chain)], self.params.steer_step)
        self.pending = deque(waypoints[1:])
        self._emit("plan", waypoints=len(waypoints))
        return True

    def advance(self) -> None:
        """Follow the next waypoint (or hold) while the world moves one tick."""
        if self.pending:
            self.q = self.pending.popleft()
        self.ee_trace.append(self._ee(self.q))
        self.world.step()
        self.ticks += 1
        self._emit("move")

    def at_goal(self) -> bool:
        return self.q_goal is not None and np.array_equal(self.q, self.q_goal)

    def result(self, success: bool, reason: str) -> ExecutionResult:
        return ExecutionResult(
            success=success,
            replan_count=max(0, self.invocations - 1),
            ee_trace=self.ee_trace,
            elapsed_ticks=self.ticks,
            failure_reason=reason,
            plan_requests=self.invocations,
            plan_failures=self.plan_failures,
            final_config=self.q.copy(),
        )


def execute_re_rrt_star(
    model: ArmModel,
    start: JointConfig,
    goal_ee: Point2,
    world: WorldHandle,
    params: PlannerParams,
    rng=None,
    trace: Optional[list] = None,
) -> ExecutionResult:
    """Follow the current path; replan only when the goal or the upcoming
    waypoints are invalidated by the moving obstacles.

    Per tick: if the goal configuration is occupied the run aborts
    (success=False). Otherwise the current configuration plus the next
    predictive_check_count waypoints are checked; any hit triggers a replan
    from the current configuration (up to max_replan_attempts planner calls
    that tick). Then the robot advances one waypoint and the world moves one
    step.
    """
    ex = _Executor(model, start, goal_ee, world, params, rng, trace)
    if not ex.resolve_goal():
        ex._emit("ik_failed")
        return ex.result(False, FAIL_GOAL_IN_COLLISION)
    m = params.predictive_check_count
    have_path = False
    while True:
        if ex.at_goal():
            return ex.result(True, FAIL_NONE)
        if ex.ticks >= params.tick_cap:
            return ex.result(False, FAIL_TICK_LIMIT)
        obs = ex.obstacle_array()
        if ex.collides(ex.q_goal, obs):
            ex._emit("goal_collision")
            return ex.result(False, FAIL_GOAL_IN_COLLISION)
        need = not have_path
        if not need:
            if ex.collides(ex.q, obs):
                need = True
            else:
                for i, wp in enumerate(ex.pending):
                    if i >= m:
                        break
                    if ex.collides(wp, obs):
                        need = True
                        break
        if need:
            if have_path:
                ex._emit("path_invalidated")
            replanned = False
            for _ in range(params.max_replan_attempts):
                if ex.request_plan(obs, None):
                    replanned = True
                    break
            if not replanned:
                return ex.result(False, FAIL_REPLAN)
            have_path = True
        ex.advance()


def execute_fixed_frequency(
    model: ArmModel,
    start: JointConfig,
    goal_ee: Point2,
    world: WorldHandle,
    replan_every: Optional[int],
    params: PlannerParams,
    rng=None,
    trace: Optional[list] = None,
) -> ExecutionResult:
    """Replan unconditionally every replan_every ticks (None/inf: plan once).

    Each request gets a simulated budget of replan_every * tick_duration
    seconds. A failed request keeps the previous path; with no path the
    robot holds position until the next scheduled request. The run aborts
    with replan_failed after max_replan_attempts consecutive failed
    requests, and with goal_in_collision whenever the goal configuration is
    occupied.
    """
    if replan_every is not None and (math.isinf(replan_every) or replan_every <= 0):
        replan_every = None
    ex = _Executor(model, start, goal_ee, world, params, rng, trace)
    if not ex.resolve_goal():
        ex._emit("ik_failed")
        return ex.result(False, FAIL_GOAL_IN_COLLISION)
    budget = None if replan_every is None else replan_every * params.tick_duration
    consecutive_failures = 0
    while True:
        if ex.at_goal():
            return ex.result(True, FAIL_NONE)
        if ex.ticks >= params.tick_cap:
            return ex.result(False, FAIL_TICK_LIMIT)
        obs = ex.obstacle_array()
        if ex.collides(ex.q_goal, obs):
            ex._emit("goal_collision")
            return ex.result(False, FAIL_GOAL_IN_COLLISION)
        scheduled = ex.ticks == 0 or (
            replan_every is not None and ex.ticks % replan_every == 0
        )
        if scheduled:
            if ex.request_plan(obs, budget if replan_every is not None else params.time_budget):
                consecutive_failures = 0
            else:
                consecutive_failures += 1
                if consecutive_failures >= params.max_replan_attempts:
                    return ex.result(False, FAIL_REPLAN)
        ex.advance()
