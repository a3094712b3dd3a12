import math

import numpy as np
import pytest

from cotamp.geometry import ArmModel, Capsule2, Point2, Segment2, end_effector, forward_kinematics
from cotamp.planner import (
    FAIL_GOAL_IN_COLLISION,
    FAIL_NONE,
    FAIL_REPLAN,
    FAIL_TICK_LIMIT,
    PlannerParams,
    StaticWorld,
    collision_check,
    execute_fixed_frequency,
    execute_re_rrt_star,
    plan_rrt_star,
)
from cotamp.world import HumanMotionModel, World, WorldConfig


def cap(ax, ay, bx, by, r):
    return Capsule2(Segment2(Point2(ax, ay), Point2(bx, by)), r)


class ScriptedWorld:
    """Obstacles given by a tick -> capsules schedule."""

    def __init__(self, schedule):
        self.schedule = schedule
        self.t = 0

    def obstacles(self):
        return self.schedule(self.t)

    def step(self):
        self.t += 1


HOME = np.array([-math.pi / 2, 1.2, 1.2])
GOAL_EE = Point2(0.2, 0.8)


class TestReRrtStar:
    def test_static_clear_world(self, arm3):
        params = PlannerParams()
        res = execute_re_rrt_star(arm3, HOME, GOAL_EE, StaticWorld([]), params, rng=0)
        assert res.success
        assert res.failure_reason == FAIL_NONE
        assert res.replan_count == 0
        assert res.plan_requests == 1
        final = res.ee_trace[-1]
        assert math.hypot(final.x - GOAL_EE.x, final.y - GOAL_EE.y) <= params.ik_tolerance
        assert res.elapsed_ticks == len(res.ee_trace) - 1

    def test_goal_inside_static_obstacle(self, arm3):
        params = PlannerParams()
        blocker = cap(GOAL_EE.x, GOAL_EE.y, GOAL_EE.x, GOAL_EE.y, 0.08)
        res = execute_re_rrt_star(arm3, HOME, GOAL_EE, StaticWorld([blocker]), params, rng=0)
        assert not res.success
        assert res.failure_reason == FAIL_GOAL_IN_COLLISION
        assert res.replan_count == 0
        assert res.plan_requests == 0

    def test_goal_already_reached(self, arm3):
        params = PlannerParams()
        start_ee = end_effector(arm3, HOME)
        res = execute_re_rrt_star(arm3, HOME, start_ee, StaticWorld([]), params, rng=0)
        assert res.success
        assert res.elapsed_ticks == 0
        assert res.plan_requests == 0

    def test_scripted_obstacle_triggers_replan(self, arm3):
        params = PlannerParams()
        # discover the nominal path, then drop an obstacle onto a waypoint
        # several ticks ahead of the robot
        trace = []
        nominal = execute_re_rrt_star(arm3, HOME, GOAL_EE, StaticWorld([]), params, rng=7, trace=trace)
        assert nominal.success
        configs = [np.array(row["q"]) for row in trace if row["event"] == "move"]
        assert len(configs) >= 10
        ahead = configs[8]
        block_pt = end_effector(arm3, ahead)
        blocker = cap(block_pt.x, block_pt.y, block_pt.x, block_pt.y, 0.06)
        # the obstacle must hit the path ahead but not the robot where it is
        # at tick 3, or the goal
        assert collision_check(arm3, ahead, [blocker])
        assert not collision_check(arm3, configs[2], [blocker])

        def schedule(t):
            return [blocker] if 3 <= t < 7 else []

        res = execute_re_rrt_star(arm3, HOME, GOAL_EE, ScriptedWorld(schedule), params, rng=7)
        assert res.success
        assert res.replan_count >= 1

    def test_trapped_start_fails_with_replan_failed(self, arm3):
        params = PlannerParams(tick_cap=50)
        # capsule sitting on the start configuration: every plan attempt
        # fails because the tree cannot even root itself
        pts, _ = forward_kinematics(arm3, HOME)
        mid = pts[1]
        blocker = cap(mid.x, mid.y, mid.x, mid.y, 0.1)
        assert collision_check(arm3, HOME, [blocker])
        res = execute_re_rrt_star(arm3, HOME, GOAL_EE, StaticWorld([blocker]), params, rng=1)
        assert not res.success
        assert res.failure_reason == FAIL_REPLAN
        assert res.plan_failures == params.max_replan_attempts

    def test_replan_count_is_invocations_minus_one(self, arm3):
        params = PlannerParams()
        cfg = WorldConfig(human=HumanMotionModel(sigma=0.25, step_smoothing=0.35))
        for seed in range(5):
            trace = []
            world = World(cfg, seed=seed)
            res = execute_re_rrt_star(arm3, HOME, GOAL_EE, world, params, rng=seed, trace=trace)
            requests = sum(1 for row in trace if row["event"] in ("plan", "plan_failed"))
            assert requests == res.plan_requests
            if res.plan_requests >= 1:
                assert res.replan_count == res.plan_requests - 1

    def test_in_loop_safety_invariant(self, arm3):
        """Each tick either the current config is collision-free against the
        current obstacles or the run has already terminated unsuccessfully."""
        params = PlannerParams()
        cfg = WorldConfig(human=HumanMotionModel(sigma=0.35, step_smoothing=0.5, retarget_interval=4))
        for seed in range(20):
            snapshots = {}

            class RecordingWorld(World):
                def obstacles(self):
                    obs = super().obstacles()
                    snapshots.setdefault(self.tick, obs)
                    return obs

            world = RecordingWorld(cfg, seed=seed)
            trace = []
            res = execute_re_rrt_star(arm3, HOME, GOAL_EE, world, params, rng=seed, trace=trace)
            moves = [row for row in trace if row["event"] == "move"]
            for idx, row in enumerate(moves):
                t = row["tick"]
                if t not in snapshots:
                    continue  # run ended before observing that tick
                if collision_check(arm3, np.array(row["q"]), snapshots[t]):
                    assert not res.success
                    assert idx == len(moves) - 1, f"seed {seed}: kept moving after contact"

    def test_deterministic_execution(self, arm3):
        params = PlannerParams()
        cfg = WorldConfig(human=HumanMotionModel(sigma=0.2))
        r1 = execute_re_rrt_star(arm3, HOME, GOAL_EE, World(cfg, seed=11), params, rng=42)
        r2 = execute_re_rrt_star(arm3, HOME, GOAL_EE, World(cfg, seed=11), params, rng=42)
        assert r1 == r2

    def test_ik_failure_reports_goal_collision(self, arm3):
        params = PlannerParams()
        res = execute_re_rrt_star(arm3, HOME, Point2(5.0, 5.0), StaticWorld([]), params, rng=0)
        assert not res.success
        assert res.failure_reason == FAIL_GOAL_IN_COLLISION
        assert res.plan_requests == 0


class TestFixedFrequency:
    def test_never_replanning_matches_single_plan(self, arm3):
        params = PlannerParams()
        res = execute_fixed_frequency(arm3, HOME, GOAL_EE, StaticWorld([]), None, params, rng=0)
        assert res.success
        assert res.replan_count == 0
        assert res.plan_requests == 1

    def test_infinite_interval_accepted(self, arm3):
        params = PlannerParams()
        res = execute_fixed_frequency(arm3, HOME, GOAL_EE, StaticWorld([]), math.inf, params, rng=0)
        assert res.success
        assert res.replan_count == 0

    def test_scheduled_requests_count(self, arm3):
        params = PlannerParams()
        every = 4
        res = execute_fixed_frequency(arm3, HOME, GOAL_EE, StaticWorld([]), every, params, rng=3)
        assert res.success
        # requests at ticks 0, 4, 8, ... strictly below elapsed_ticks
        expected = 1 + (res.elapsed_ticks - 1) // every
        assert res.plan_requests == expected
        assert res.replan_count == expected - 1

    def test_goal_collision_aborts(self, arm3):
        params = PlannerParams()
        blocker = cap(GOAL_EE.x, GOAL_EE.y, GOAL_EE.x, GOAL_EE.y, 0.08)
        res = execute_fixed_frequency(arm3, HOME, GOAL_EE, StaticWorld([blocker]), 5, params, rng=0)
        assert not res.success
        assert res.failure_reason == FAIL_GOAL_IN_COLLISION

    def test_trapped_start_hits_replan_failed(self, arm3):
        params = PlannerParams(tick_cap=100)
        pts, _ = forward_kinematics(arm3, HOME)
        mid = pts[1]
        blocker = cap(mid.x, mid.y, mid.x, mid.y, 0.1)
        res = execute_fixed_frequency(arm3, HOME, GOAL_EE, StaticWorld([blocker]), 1, params, rng=1)
        assert not res.success
        assert res.failure_reason == FAIL_REPLAN
        assert res.plan_failures == params.max_replan_attempts

    def test_single_failed_plan_waits_until_tick_limit(self, arm3):
        params = PlannerParams(tick_cap=30)
        pts, _ = forward_kinematics(arm3, HOME)
        mid = pts[1]
        blocker = cap(mid.x, mid.y, mid.x, mid.y, 0.1)
        res = execute_fixed_frequency(arm3, HOME, GOAL_EE, StaticWorld([blocker]), None, params, rng=1)
        assert not res.success
        assert res.failure_reason == FAIL_TICK_LIMIT
        assert res.elapsed_ticks == params.tick_cap

    def test_deterministic_execution(self, arm3):
        params = PlannerParams()
        cfg = WorldConfig(human=HumanMotionModel(sigma=0.2))
        r1 = execute_fixed_frequency(arm3, HOME, GOAL_EE, World(cfg, seed=4), 5, params, rng=9)
        r2 = execute_fixed_frequency(arm3, HOME, GOAL_EE, World(cfg, seed=4), 5, params, rng=9)
        assert r1 == r2

    def test_budget_shrinks_with_frequency(self, arm3):
        params = PlannerParams(iters_per_second=5000.0, tick_duration=0.1, max_iters=3000)
        assert params.effective_iters(1 * params.tick_duration) == 500
        assert params.effective_iters(10 * params.tick_duration) == 3000
