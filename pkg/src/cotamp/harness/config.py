"""Experiment configuration: defaults in code, overrides from one YAML file.

Every knob of every experiment lives here; unknown keys are rejected so
typos fail fast instead of silently running defaults.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from ..env import DEFAULT_HOME, EnvParams, RewardWeights
from ..geometry import ArmModel, Point2
from ..planner import PlannerParams
from ..rl import PPOParams
from ..world import HumanMotionModel, WorldConfig, Workspace


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    n_tasks: int = 12
    min_task_spacing: float = 0.12
    task_margin: float = 0.1
    obstacle_arms: bool = True


@dataclass(frozen=True)
class RobotConfig:
    base: tuple[float, float] = (0.0, 0.0)
    link_lengths: tuple[float, ...] = (0.5, 0.5, 0.4)
    link_radius: float = 0.04
    max_joint_step: float = 0.15
    home: tuple[float, ...] = tuple(DEFAULT_HOME)


@dataclass(frozen=True)
class SweepConfig:
    replan_every: tuple[int, ...] = (20, 10, 5, 2, 1)
    n_seeds: int = 50
    goal: tuple[float, float] = (0.3, 1.0)


@dataclass(frozen=True)
class CompareConfig:
    n_runs: int = 20
    strategies: tuple[str, ...] = ("rl", "random", "logical", "sequential")
    scenarios: tuple[str, ...] = ("gaussian", "uniform")


@dataclass(frozen=True)
class TrainConfig:
    seeds: tuple[int, ...] = (0,)
    checkpoint_every: int = 100
    smoothing_window: int = 20


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    out_dir: str = "runs"
    workspace: Workspace = field(default_factory=Workspace)
    human: HumanMotionModel = field(default_factory=HumanMotionModel)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    robot: RobotConfig = field(default_factory=RobotConfig)
    planner: PlannerParams = field(default_factory=PlannerParams)
    reward: RewardWeights = field(default_factory=RewardWeights)
    env: EnvParams = field(default_factory=EnvParams)
    ppo: PPOParams = field(default_factory=PPOParams)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def arm_model(self) -> ArmModel:
        r = self.robot
        return ArmModel(
            base=Point2(*r.base),
            link_lengths=tuple(r.link_lengths),
            link_radius=r.link_radius,
            max_joint_step=r.max_joint_step,
        )

    def home_config(self) -> np.ndarray:
        return np.asarray(self.robot.home, dtype=np.float64)

    def world_config(self, scenario: str = "gaussian") -> WorldConfig:
        if scenario not in ("gaussian", "uniform"):
            raise ConfigError(f"unknown scenario {scenario!r}")
        human = dataclasses.replace(self.human, kind=scenario)
        return WorldConfig(
            workspace=self.workspace,
            human=human,
            n_tasks=self.scenario.n_tasks,
            min_task_spacing=self.scenario.min_task_spacing,
            task_margin=self.scenario.task_margin,
            obstacle_arms=self.scenario.obstacle_arms,
        )

    def make_env(self, scenario: str = "gaussian"):
        from ..env import TaskEnv

        return TaskEnv(
            self.arm_model(),
            self.world_config(scenario),
            self.planner,
            self.reward,
            self.env,
            home=self.home_config(),
        )


_TUPLE_FIELDS = {
    "link_lengths": float,
    "home": float,
    "base": float,
    "replan_every": int,
    "strategies": str,
    "scenarios": str,
    "seeds": int,
}


def _coerce(name: str, value, target_type):
    if name in _TUPLE_FIELDS:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{name} must be a list")
        return tuple(_TUPLE_FIELDS[name](v) for v in value)
    if target_type is float and isinstance(value, (int, float)):
        return float(value)
    if value is None:
        return None
    return value


def _build(cls, data: Optional[dict], section: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a mapping")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"section {section!r}: unknown keys {unknown}")
    kwargs = {}
    for key, value in data.items():
        kwargs[key] = _coerce(key, value, names[key].type)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section {section!r}: {exc}") from exc


_SECTIONS = {
    "workspace": Workspace,
    "human": HumanMotionModel,
    "scenario": ScenarioConfig,
    "robot": RobotConfig,
    "planner": PlannerParams,
    "reward": RewardWeights,
    "env": EnvParams,
    "ppo": PPOParams,
    "sweep": SweepConfig,
    "compare": CompareConfig,
    "train": TrainConfig,
}


def config_from_dict(data: Optional[dict]) -> ExperimentConfig:
    data = dict(data or {})
    unknown = sorted(set(data) - set(_SECTIONS) - {"seed", "out_dir"})
    if unknown:
        raise ConfigError(f"unknown top-level keys {unknown}")
    kwargs = {}
    if "seed" in data:
        kwargs["seed"] = int(data.pop("seed"))
    if "out_dir" in data:
        kwargs["out_dir"] = str(data.pop("out_dir"))
    for section, cls in _SECTIONS.items():
        kwargs[section] = _build(cls, data.get(section), section)
    cfg = ExperimentConfig(**kwargs)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if not cfg.train.seeds:
        raise ConfigError("train.seeds must be non-empty")
    if cfg.compare.n_runs < 1 or cfg.sweep.n_seeds < 1:
        raise ConfigError("run counts must be positive")
    for s in cfg.compare.strategies:
        if s not in ("rl", "random", "logical", "sequential"):
            raise ConfigError(f"unknown strategy {s!r}")
    for s in cfg.compare.scenarios:
        if s not in ("gaussian", "uniform"):
            raise ConfigError(f"unknown scenario {s!r}")
    model = cfg.arm_model()
    home = cfg.home_config()
    if home.shape != (model.n_joints,):
        raise ConfigError("robot.home length must match link count")
    if not model.within_limits(home):
        raise ConfigError("robot.home violates joint limits")
    gx, gy = cfg.sweep.goal
    reach = model.reach
    if math.hypot(gx - cfg.robot.base[0], gy - cfg.robot.base[1]) > reach:
        raise ConfigError("sweep.goal is outside the robot's reach")


def load_config(path=None) -> ExperimentConfig:
    """Defaults when path is None, else defaults overridden by the YAML file."""
    if path is None:
        return config_from_dict({})
    text = Path(path).read_text()
    data = yaml.safe_load(text)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config root must be a mapping")
    return config_from_dict(data)
