import math

import numpy as np
import pytest

from cotamp.env import (
    DEFAULT_HOME,
    EnvParams,
    RewardWeights,
    TaskEnv,
    compute_reward,
    encode_observation,
    nearest_task,
)
from cotamp.geometry import ArmModel, Point2
from cotamp.planner import PlannerParams
from cotamp.world import (
    HumanMotionModel,
    TaskItem,
    WorldConfig,
    Workspace,
    reset_episode,
)

W = RewardWeights(task_bonus=1.0, collision_penalty=1.0, replan_penalty=0.1, distance_penalty=0.5)


def make_env(**kw):
    world_cfg = kw.pop("world_cfg", WorldConfig())
    return TaskEnv(
        ArmModel(),
        world_cfg,
        kw.pop("planner_params", PlannerParams()),
        kw.pop("reward_weights", W),
        kw.pop("env_params", EnvParams()),
    )


class TestComputeReward:
    def test_substitution_table(self):
        # direct substitutions into the four-term reward
        assert compute_reward(True, False, 0, 0.0, W) == pytest.approx(1.0)
        assert compute_reward(False, True, 0, 0.4, W) == pytest.approx(-1.2)
        assert compute_reward(True, False, 3, 0.2, W) == pytest.approx(0.6)

    def test_monotone_in_replans_and_distance(self):
        base = compute_reward(True, False, 0, 0.0, W)
        prev = base
        for c in range(1, 8):
            r = compute_reward(True, False, c, 0.0, W)
            assert r <= prev
            prev = r
        prev = base
        for d in np.linspace(0.1, 1.5, 8):
            r = compute_reward(True, False, 0, float(d), W)
            assert r <= prev
            prev = r

    def test_rejects_negative_inputs(self):
        with pytest.raises(ValueError):
            compute_reward(True, False, -1, 0.0, W)
        with pytest.raises(ValueError):
            compute_reward(True, False, 0, -0.5, W)

    def test_weights_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            RewardWeights(task_bonus=-0.1)


class TestEncodeObservation:
    def test_no_tasks_layer_zero_empty(self):
        cfg = WorldConfig()
        state = reset_episode(cfg, seed=0)
        for t in state.tasks:
            t.done = True
        obs = encode_observation(cfg.workspace, state)
        assert obs[0].sum() == 0

    def test_task_at_center_bins_to_5_5(self):
        cfg = WorldConfig()
        state = reset_episode(cfg, seed=0)
        for t in state.tasks:
            t.done = True
        state.tasks.append(TaskItem(id=99, position=cfg.workspace.center))
        obs = encode_observation(cfg.workspace, state)
        assert obs[0, 5, 5] == 1
        assert obs[0].sum() == 1

    def test_two_tasks_same_cell_one_hot(self):
        cfg = WorldConfig()
        state = reset_episode(cfg, seed=0)
        for t in state.tasks:
            t.done = True
        c = cfg.workspace.center
        state.tasks.append(TaskItem(id=50, position=Point2(c.x + 0.01, c.y + 0.01)))
        state.tasks.append(TaskItem(id=51, position=Point2(c.x + 0.02, c.y + 0.02)))
        obs = encode_observation(cfg.workspace, state)
        assert obs[0, 5, 5] == 1
        assert obs[0].sum() == 1

    def test_arm_layers_have_exactly_one_mark(self):
        cfg = WorldConfig()
        for seed in range(10):
            state = reset_episode(cfg, seed=seed)
            obs = encode_observation(cfg.workspace, state)
            assert obs[1].sum() == -1
            assert obs[2].sum() == -1
            assert set(np.unique(obs[0])) <= {0, 1}
            assert set(np.unique(obs[1])) <= {-1, 0}
            assert set(np.unique(obs[2])) <= {-1, 0}

    def test_layer0_sum_counts_distinct_cells(self):
        cfg = WorldConfig()
        state = reset_episode(cfg, seed=3)
        obs = encode_observation(cfg.workspace, state)
        cells = set()
        for t in state.remaining():
            ix = int((t.position.x - cfg.workspace.x_min) / cfg.workspace.width * 10)
            iy = int((t.position.y - cfg.workspace.y_min) / cfg.workspace.height * 10)
            cells.add((min(9, max(0, ix)), min(9, max(0, iy))))
        assert obs[0].sum() == len(cells)

    def test_idempotent(self):
        cfg = WorldConfig()
        state = reset_episode(cfg, seed=1)
        a = encode_observation(cfg.workspace, state)
        b = encode_observation(cfg.workspace, state)
        np.testing.assert_array_equal(a, b)


class TestNearestTask:
    def test_exact_hit(self):
        state = reset_episode(WorldConfig(), seed=0)
        target = state.tasks[7].position
        got = nearest_task(target, state)
        assert got.id == 7

    def test_tie_breaks_to_lowest_id(self):
        cfg = WorldConfig()
        state = reset_episode(cfg, seed=0)
        for t in state.tasks:
            t.done = True
        state.tasks.append(TaskItem(id=5, position=Point2(0.2, 0.7)))
        state.tasks.append(TaskItem(id=2, position=Point2(-0.2, 0.7)))
        got = nearest_task(Point2(0.0, 0.7), state)
        assert got.id == 2

    def test_skips_done_tasks(self):
        state = reset_episode(WorldConfig(), seed=0)
        target = state.tasks[3].position
        state.tasks[3].done = True
        got = nearest_task(target, state)
        assert got.id != 3

    def test_no_tasks_raises(self):
        state = reset_episode(WorldConfig(), seed=0)
        for t in state.tasks:
            t.done = True
        with pytest.raises(ValueError):
            nearest_task(Point2(0, 0.7), state)

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(17)
        for seed in range(100):
            state = reset_episode(WorldConfig(), seed=seed)
            for t in state.tasks:
                if rng.random() < 0.3:
                    t.done = True
            if not state.remaining():
                continue
            g = Point2(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.2, 1.2)))
            got = nearest_task(g, state)
            dists = [
                (math.hypot(t.position.x - g.x, t.position.y - g.y), t.id)
                for t in state.remaining()
            ]
            dists.sort()
            assert got.id == dists[0][1]


class TestTaskEnv:
    def test_action_decoding_center(self):
        env = make_env()
        env.reset(seed=0)
        p = env.decode_action(np.zeros(2))
        assert p == env.world_cfg.workspace.center
        # corners clamp
        p = env.decode_action(np.array([5.0, -5.0]))
        ws = env.world_cfg.workspace
        assert p == Point2(ws.x_max, ws.y_min)

    def test_encode_position_roundtrip(self):
        env = make_env()
        env.reset(seed=0)
        rng = np.random.default_rng(0)
        for _ in range(20):
            u = rng.uniform(-1, 1, 2)
            p = env.decode_action(u)
            np.testing.assert_allclose(env.encode_position(p), u, atol=1e-12)

    def test_reset_returns_initial_observation(self):
        env = make_env()
        obs = env.reset(seed=0)
        assert obs.shape == (3, 10, 10)
        assert obs[0].sum() == 12
        assert obs[1].sum() == -1 and obs[2].sum() == -1
        assert env.episode_failures == 0
        assert env.episode_replans == 0

    def test_same_seed_same_initial_observation(self):
        e1, e2 = make_env(), make_env()
        np.testing.assert_array_equal(e1.reset(seed=9), e2.reset(seed=9))

    def test_goal_in_arm_capsule_fails_without_execution(self):
        # park both arms deterministically at the workspace center
        center = WorldConfig().workspace.center
        cfg = WorldConfig(
            human=HumanMotionModel(sigma=0.0),
            fixed_arm_means=(center, center),
        )
        env = make_env(world_cfg=cfg)
        env.reset(seed=0)
        out = env.step(np.zeros(2))  # goal exactly at the arm position
        assert out.info["goal_collision"] is True
        assert out.info["task_achieved"] is False
        assert out.info["replan_count"] == 0
        assert out.info["assigned_task"] is None
        d = out.info["distance"]
        assert out.reward == pytest.approx(-W.collision_penalty - W.distance_penalty * d)
        assert env.episode_failures == 1

    def test_static_free_goal_on_task_achieves(self):
        # arms parked far in a corner; aim exactly at a task
        corner = Point2(-0.49, 1.19)
        cfg = WorldConfig(human=HumanMotionModel(sigma=0.0), fixed_arm_means=(corner, corner))
        env = make_env(world_cfg=cfg)
        env.reset(seed=0)
        task = env.world.remaining_tasks()[8]
        out = env.step(env.encode_position(task.position))
        assert out.info["goal_collision"] is False
        assert out.info["task_achieved"] is True
        assert out.info["assigned_task"] == task.id
        assert out.info["distance"] == pytest.approx(0.0, abs=1e-12)
        assert out.reward == pytest.approx(
            W.task_bonus - W.replan_penalty * out.info["replan_count"]
        )
        assert len(env.world.remaining_tasks()) == 11
        np.testing.assert_array_equal(env.robot_q, DEFAULT_HOME)

    def test_achievement_decrements_remaining_by_one(self):
        env = make_env()
        env.reset(seed=1)
        before = len(env.world.remaining_tasks())
        out = env.step(np.array([0.0, -0.6]))
        after = len(env.world.remaining_tasks())
        if out.info["task_achieved"]:
            assert after == before - 1
        else:
            assert after == before

    def test_goal_collision_implies_zero_replans(self):
        env = make_env()
        rng = np.random.default_rng(5)
        for ep in range(4):
            env.reset(seed=ep)
            while not env.done:
                out = env.step(rng.uniform(-1, 1, 2))
                if out.info["goal_collision"]:
                    assert out.info["replan_count"] == 0

    def test_episode_metric_identity(self):
        env = make_env()
        rng = np.random.default_rng(13)
        env.reset(seed=31)
        failures = 0
        replans = 0
        while not env.done:
            out = env.step(rng.uniform(-1, 1, 2))
            failures += 0 if out.info["task_achieved"] else 1
            replans += out.info["replan_count"]
        assert failures == env.episode_failures
        assert replans == env.episode_replans

    def test_done_conditions(self):
        env = make_env(env_params=EnvParams(robot_quota=2, max_steps=5))
        rng = np.random.default_rng(3)
        env.reset(seed=2)
        while not env.done:
            env.step(rng.uniform(-1, 1, 2))
        assert env.episode_completed >= 2 or env.episode_steps >= 5

    def test_step_after_done_rejected(self):
        env = make_env(env_params=EnvParams(max_steps=1))
        env.reset(seed=0)
        env.step(np.zeros(2))
        assert env.done
        with pytest.raises(RuntimeError):
            env.step(np.zeros(2))

    def test_deterministic_episode(self):
        actions = np.random.default_rng(77).uniform(-1, 1, (30, 2))
        results = []
        for _ in range(2):
            env = make_env()
            env.reset(seed=55)
            rewards = []
            for a in actions:
                out = env.step(a)
                rewards.append(out.reward)
                if out.done:
                    break
            results.append((tuple(rewards), env.episode_failures, env.episode_replans))
        assert results[0] == results[1]

    def test_world_advances_on_failed_steps(self):
        center = WorldConfig().workspace.center
        cfg = WorldConfig(human=HumanMotionModel(sigma=0.0), fixed_arm_means=(center, center))
        env = make_env(world_cfg=cfg)
        env.reset(seed=0)
        t0 = env.world.tick
        env.step(np.zeros(2))  # rejected: goal on the parked arm
        assert env.world.tick == t0 + env.params.failed_step_ticks
