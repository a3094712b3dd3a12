"""Shared-workspace simulation: task blocks and two moving human arms.

Time is discrete; one tick advances both arms by one smoothing step. Each
arm is a capsule from a fixed shoulder anchor on the far (human) edge of
the workspace toward a tracked wrist position. In gaussian mode the wrist
chases targets drawn around a per-episode mean that is itself resampled
uniformly every episode; in uniform mode targets are drawn anywhere in the
workspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .geometry import Capsule2, Point2, Segment2


@dataclass(frozen=True)
class Workspace:
    x_min: float = -0.5
    x_max: float = 0.5
    y_min: float = 0.2
    y_max: float = 1.2

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("workspace bounds must satisfy min < max")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> Point2:
        return Point2((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def contains(self, p: Point2) -> bool:
        return self.x_min <= p.x <= self.x_max and self.y_min <= p.y <= self.y_max

    def clamp(self, x: float, y: float) -> Point2:
        return Point2(
            min(self.x_max, max(self.x_min, x)),
            min(self.y_max, max(self.y_min, y)),
        )


@dataclass(frozen=True)
class HumanMotionModel:
    """Wrist-target process for one pair of human arms.

    kind 'gaussian': targets ~ N(episode mean, sigma^2) per axis, the mean
    resampled uniformly over the workspace each episode. kind 'uniform':
    targets ~ U(workspace). Positions move a step_smoothing fraction toward
    the active target every tick and a fresh target is drawn every
    retarget_interval ticks.
    """

    kind: str = "gaussian"
    sigma: float = 0.15
    arm_radius: float = 0.06
    arm_length: float = 0.6
    step_smoothing: float = 0.2
    retarget_interval: int = 10

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise ValueError(f"unknown motion kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.arm_radius <= 0 or self.arm_length <= 0:
            raise ValueError("arm dimensions must be positive")
        if not 0 < self.step_smoothing <= 1:
            raise ValueError("step_smoothing must be in (0, 1]")
        if self.retarget_interval < 1:
            raise ValueError("retarget_interval must be >= 1")


@dataclass(frozen=True)
class WorldConfig:
    workspace: Workspace = field(default_factory=Workspace)
    human: HumanMotionModel = field(default_factory=HumanMotionModel)
    n_tasks: int = 12
    min_task_spacing: float = 0.12
    task_margin: float = 0.1
    shoulder_anchors: Optional[tuple[Point2, Point2]] = None
    # pin per-episode arm means (testing / scripted scenarios)
    fixed_arm_means: Optional[tuple[Point2, Point2]] = None
    # when False the arms are tracked but produce no obstacle capsules
    obstacle_arms: bool = True

    def __post_init__(self):
        if self.shoulder_anchors is None:
            ws = self.workspace
            anchors = (
                Point2(ws.x_min + 0.3 * ws.width, ws.y_max),
                Point2(ws.x_min + 0.7 * ws.width, ws.y_max),
            )
            object.__setattr__(self, "shoulder_anchors", anchors)
        if self.n_tasks < 1:
            raise ValueError("n_tasks must be >= 1")


@dataclass
class TaskItem:
    id: int
    position: Point2
    done: bool = False


@dataclass
class WorldState:
    tasks: list[TaskItem]
    episode_means: list[Point2]
    arm_targets: list[Point2]
    arm_positions: list[Point2]
    tick: int
    rng: np.random.Generator

    def remaining(self) -> list[TaskItem]:
        return [t for t in self.tasks if not t.done]


def _task_grid(cfg: WorldConfig) -> tuple[np.ndarray, np.ndarray, float]:
    """Grid points and jitter amplitude respecting min_task_spacing."""
    ws = cfg.workspace
    usable_w = ws.width - 2 * cfg.task_margin
    usable_h = ws.height - 2 * cfg.task_margin
    # pitch leaves room for jitter on both sides of each point
    jitter = 0.25 * cfg.min_task_spacing
    pitch = cfg.min_task_spacing + 2 * jitter
    cols = int(usable_w / pitch) + 1
    rows = int(usable_h / pitch) + 1
    if cols < 1 or rows < 1:
        raise ValueError("workspace too small for the task grid")
    xs = np.linspace(ws.x_min + cfg.task_margin, ws.x_max - cfg.task_margin, cols)
    ys = np.linspace(ws.y_min + cfg.task_margin, ws.y_max - cfg.task_margin, rows)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    # meshgrid pitch can exceed the minimum; jitter stays tied to spacing
    return pts, np.array([cols, rows]), jitter


def grid_capacity(cfg: WorldConfig) -> int:
    pts, _, _ = _task_grid(cfg)
    return len(pts)


def reset_episode(cfg: WorldConfig, seed) -> WorldState:
    """Fresh episode: jittered-grid tasks, new arm means, arms at their means."""
    rng = np.random.default_rng(seed)
    pts, _, jitter = _task_grid(cfg)
    if cfg.n_tasks > len(pts):
        raise ValueError(
            f"n_tasks={cfg.n_tasks} exceeds grid capacity {len(pts)}"
        )
    chosen = np.sort(rng.choice(len(pts), size=cfg.n_tasks, replace=False))
    offsets = rng.uniform(-jitter, jitter, size=(cfg.n_tasks, 2))
    tasks = [
        TaskItem(id=i, position=Point2(float(pts[c, 0] + offsets[i, 0]), float(pts[c, 1] + offsets[i, 1])))
        for i, c in enumerate(chosen)
    ]

    ws = cfg.workspace
    if cfg.fixed_arm_means is not None:
        means = [Point2(float(p.x), float(p.y)) for p in cfg.fixed_arm_means]
    else:
        means = [
            Point2(float(rng.uniform(ws.x_min, ws.x_max)), float(rng.uniform(ws.y_min, ws.y_max)))
            for _ in range(2)
        ]

    if cfg.human.kind == "gaussian":
        positions = [ws.clamp(m.x, m.y) for m in means]
    else:
        positions = [
            ws.clamp(float(rng.uniform(ws.x_min, ws.x_max)), float(rng.uniform(ws.y_min, ws.y_max)))
            for _ in range(2)
        ]
    return WorldState(
        tasks=tasks,
        episode_means=means,
        arm_targets=list(positions),
        arm_positions=list(positions),
        tick=0,
        rng=rng,
    )


def step_human(cfg: WorldConfig, state: WorldState) -> None:
    """Advance both arms one tick; draws fresh targets every retarget_interval."""
    human = cfg.human
    ws = cfg.workspace
    if state.tick % human.retarget_interval == 0:
        targets = []
        for mean in state.episode_means:
            if human.kind == "gaussian":
                tx = state.rng.normal(mean.x, human.sigma)
                ty = state.rng.normal(mean.y, human.sigma)
            else:
                tx = state.rng.uniform(ws.x_min, ws.x_max)
                ty = state.rng.uniform(ws.y_min, ws.y_max)
            targets.append(Point2(float(tx), float(ty)))
        state.arm_targets = targets
    frac = human.step_smoothing
    state.arm_positions = [
        ws.clamp(p.x + frac * (t.x - p.x), p.y + frac * (t.y - p.y))
        for p, t in zip(state.arm_positions, state.arm_targets)
    ]
    state.tick += 1


def obstacles_at(cfg: WorldConfig, state: WorldState) -> list[Capsule2]:
    """One capsule per arm: shoulder anchor toward the wrist, trimmed to arm_length."""
    if not cfg.obstacle_arms:
        return []
    caps = []
    for anchor, wrist in zip(cfg.shoulder_anchors, state.arm_positions):
        dx = wrist.x - anchor.x
        dy = wrist.y - anchor.y
        dist = math.hypot(dx, dy)
        if dist > cfg.human.arm_length:
            s = cfg.human.arm_length / dist
            tip = Point2(anchor.x + s * dx, anchor.y + s * dy)
        else:
            tip = wrist
        caps.append(Capsule2(Segment2(anchor, tip), cfg.human.arm_radius))
    return caps


def complete_task(state: WorldState, task_id: int) -> None:
    for t in state.tasks:
        if t.id == task_id:
            if t.done:
                raise ValueError(f"task {task_id} already done")
            t.done = True
            return
    raise ValueError(f"unknown task id {task_id}")


class World:
    """Episode handle owning one WorldState; the planner's obstacle source."""

    def __init__(self, cfg: WorldConfig, seed):
        self.cfg = cfg
        self.state = reset_episode(cfg, seed)

    def step(self) -> None:
        step_human(self.cfg, self.state)

    def obstacles(self) -> list[Capsule2]:
        return obstacles_at(self.cfg, self.state)

    def remaining_tasks(self) -> list[TaskItem]:
        return self.state.remaining()

    def complete(self, task_id: int) -> None:
        complete_task(self.state, task_id)

    @property
    def tick(self) -> int:
        return self.state.tick
