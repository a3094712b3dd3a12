import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotamp.geometry import (
    ArmModel,
    Capsule2,
    Point2,
    Segment2,
    capsules_collide,
    end_effector,
    finite_difference_jacobian,
    forward_kinematics,
    inverse_kinematics,
    link_capsules,
    segment_segment_distance,
)

from conftest import sampled_segment_distance


def seg(ax, ay, bx, by):
    return Segment2(Point2(ax, ay), Point2(bx, by))


coords = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)


class TestSegmentDistance:
    def test_parallel_unit_offset(self):
        assert segment_segment_distance(seg(0, 0, 1, 0), seg(0, 1, 1, 1)) == pytest.approx(1.0)

    def test_crossing_segments(self):
        assert segment_segment_distance(seg(0, 0, 1, 0), seg(0.5, -1, 0.5, 1)) == pytest.approx(0.0, abs=1e-9)

    def test_degenerate_segments_are_points(self):
        # both degenerate
        assert segment_segment_distance(seg(0, 0, 0, 0), seg(3, 4, 3, 4)) == pytest.approx(5.0)
        # one degenerate
        assert segment_segment_distance(seg(0.5, 2, 0.5, 2), seg(0, 0, 1, 0)) == pytest.approx(2.0)

    def test_collinear_overlap_is_zero(self):
        assert segment_segment_distance(seg(0, 0, 3, 0), seg(2, 0, 5, 0)) == pytest.approx(0.0, abs=1e-12)
        assert segment_segment_distance(seg(2, 0, 5, 0), seg(0, 0, 3, 0)) == pytest.approx(0.0, abs=1e-12)

    def test_collinear_disjoint(self):
        assert segment_segment_distance(seg(0, 0, 1, 0), seg(2, 0, 3, 0)) == pytest.approx(1.0)

    def test_shared_endpoint_is_zero(self):
        assert segment_segment_distance(seg(0, 0, 1, 1), seg(1, 1, 2, 0)) == pytest.approx(0.0, abs=1e-12)

    @given(ax=coords, ay=coords, bx=coords, by=coords, cx=coords, cy=coords, dx=coords, dy=coords)
    @settings(max_examples=200, deadline=None)
    def test_symmetric_and_nonnegative(self, ax, ay, bx, by, cx, cy, dx, dy):
        s1, s2 = seg(ax, ay, bx, by), seg(cx, cy, dx, dy)
        d12 = segment_segment_distance(s1, s2)
        d21 = segment_segment_distance(s2, s1)
        assert d12 >= 0.0
        assert d12 == pytest.approx(d21, abs=1e-12)

    def test_zero_exactly_on_constructed_intersections(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            # build two segments through a shared interior point
            p = rng.uniform(-1, 1, 2)
            u = rng.uniform(0.1, 1.0, 2) * rng.choice([-1, 1], 2)
            v = rng.uniform(0.1, 1.0, 2) * rng.choice([-1, 1], 2)
            s1 = seg(p[0] - u[0], p[1] - u[1], p[0] + u[0], p[1] + u[1])
            s2 = seg(p[0] - v[0], p[1] - v[1], p[0] + v[0], p[1] + v[1])
            assert segment_segment_distance(s1, s2) < 1e-9
        for _ in range(100):
            # disjoint: separate two segments by a gap along x
            a = rng.uniform(-1, 0, (2, 2))
            a[:, 0] = np.minimum(a[:, 0], -0.05)
            b = rng.uniform(0, 1, (2, 2))
            b[:, 0] = np.maximum(b[:, 0], 0.05)
            s1 = seg(a[0, 0], a[0, 1], a[1, 0], a[1, 1])
            s2 = seg(b[0, 0], b[0, 1], b[1, 0], b[1, 1])
            assert segment_segment_distance(s1, s2) > 0.0

    def test_matches_point_sampling_oracle(self):
        rng = np.random.default_rng(123)
        pts = rng.uniform(0.0, 1.0, size=(1000, 8))
        for row in pts:
            got = segment_segment_distance(seg(*row[:4]), seg(*row[4:]))
            want = sampled_segment_distance(row[0:2], row[2:4], row[4:6], row[6:8])
            assert abs(got - want) <= 2e-3


class TestCapsules:
    def test_separated(self):
        c1 = Capsule2(seg(0, 0, 1, 0), 0.3)
        c2 = Capsule2(seg(0, 1, 1, 1), 0.3)
        assert not capsules_collide(c1, c2)

    def test_identical_axes(self):
        c1 = Capsule2(seg(0, 0, 1, 0), 0.01)
        c2 = Capsule2(seg(0, 0, 1, 0), 0.2)
        assert capsules_collide(c1, c2)

    def test_touching_boundary_counts(self):
        c1 = Capsule2(seg(0, 0, 1, 0), 0.5)
        c2 = Capsule2(seg(0, 1, 1, 1), 0.5)
        assert capsules_collide(c1, c2)

    @given(ax=coords, ay=coords, bx=coords, by=coords, cx=coords, cy=coords, dx=coords, dy=coords,
           r1=st.floats(0.01, 0.5), r2=st.floats(0.01, 0.5))
    @settings(max_examples=100, deadline=None)
    def test_commutative(self, ax, ay, bx, by, cx, cy, dx, dy, r1, r2):
        c1 = Capsule2(seg(ax, ay, bx, by), r1)
        c2 = Capsule2(seg(cx, cy, dx, dy), r2)
        assert capsules_collide(c1, c2) == capsules_collide(c2, c1)

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            Capsule2(seg(0, 0, 1, 0), 0.0)
        with pytest.raises(ValueError):
            Capsule2(seg(0, 0, 1, 0), -0.1)


class TestForwardKinematics:
    def test_straight_arm(self):
        m = ArmModel(link_lengths=(0.4, 0.4, 0.2))
        pts, ee = forward_kinematics(m, np.zeros(3))
        assert ee.x == pytest.approx(1.0)
        assert ee.y == pytest.approx(0.0)
        assert len(pts) == 4
        assert pts[0] == Point2(0.0, 0.0)

    def test_quarter_turn(self):
        m = ArmModel(link_lengths=(0.4, 0.4, 0.2))
        _, ee = forward_kinematics(m, np.array([math.pi / 2, 0.0, 0.0]))
        assert ee.x == pytest.approx(0.0, abs=1e-12)
        assert ee.y == pytest.approx(1.0)

    @given(q=st.lists(st.floats(-math.pi, math.pi), min_size=3, max_size=3))
    @settings(max_examples=100, deadline=None)
    def test_reach_bound(self, q):
        m = ArmModel(link_lengths=(0.5, 0.5, 0.4))
        _, ee = forward_kinematics(m, np.array(q))
        assert math.hypot(ee.x, ee.y) <= m.reach + 1e-9

    def test_scale_consistency(self):
        rng = np.random.default_rng(5)
        m1 = ArmModel(link_lengths=(0.5, 0.5, 0.4))
        m2 = ArmModel(link_lengths=(1.0, 1.0, 0.8))
        for _ in range(25):
            q = rng.uniform(-math.pi, math.pi, 3)
            _, e1 = forward_kinematics(m1, q)
            _, e2 = forward_kinematics(m2, q)
            assert e2.x == pytest.approx(2.0 * e1.x, abs=1e-12)
            assert e2.y == pytest.approx(2.0 * e1.y, abs=1e-12)

    def test_deterministic(self):
        m = ArmModel()
        q = np.array([0.3, -1.1, 2.0])
        assert forward_kinematics(m, q) == forward_kinematics(m, q)

    def test_rejects_out_of_limits(self):
        m = ArmModel(joint_limits=((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)))
        with pytest.raises(ValueError):
            forward_kinematics(m, np.array([1.5, 0.0, 0.0]))


class TestLinkCapsules:
    def test_one_per_link(self, arm3):
        caps = link_capsules(arm3, np.zeros(3))
        assert len(caps) == 3
        assert all(c.radius == arm3.link_radius for c in caps)

    def test_straight_arm_collinear_on_x_axis(self, arm3):
        caps = link_capsules(arm3, np.zeros(3))
        for c in caps:
            assert c.axis.a.y == pytest.approx(0.0, abs=1e-12)
            assert c.axis.b.y == pytest.approx(0.0, abs=1e-12)

    def test_endpoints_equal_fk_positions(self, arm3):
        rng = np.random.default_rng(11)
        for _ in range(20):
            q = rng.uniform(-math.pi, math.pi, 3)
            pts, _ = forward_kinematics(arm3, q)
            caps = link_capsules(arm3, q)
            for i, c in enumerate(caps):
                assert c.axis.a == pts[i]
                assert c.axis.b == pts[i + 1]


def analytic_jacobian(model, q):
    """Closed-form planar chain Jacobian, the independent check for the
    finite-difference one used inside IK."""
    q = np.asarray(q, dtype=float)
    cum = np.cumsum(q)
    lengths = np.asarray(model.link_lengths)
    jac = np.zeros((2, len(q)))
    for i in range(len(q)):
        jac[0, i] = -np.sum(lengths[i:] * np.sin(cum[i:]))
        jac[1, i] = np.sum(lengths[i:] * np.cos(cum[i:]))
    return jac


class TestInverseKinematics:
    def test_fixed_point(self, arm3):
        q = np.array([0.4, -0.9, 1.2])
        target = end_effector(arm3, q)
        got = inverse_kinematics(arm3, target, q)
        assert got is not None
        np.testing.assert_allclose(got, q, atol=1e-12)

    def test_unreachable_target(self, arm3):
        target = Point2(arm3.reach + 0.1, 0.0)
        assert inverse_kinematics(arm3, target, np.zeros(3)) is None

    def test_round_trip_random_targets(self, arm3):
        rng = np.random.default_rng(42)
        hits = 0
        n = 100
        for _ in range(n):
            q_true = rng.uniform(-math.pi, math.pi, 3)
            target = end_effector(arm3, q_true)
            seed = rng.uniform(-math.pi, math.pi, 3)
            q = inverse_kinematics(arm3, target, seed, restarts=10, rng=rng)
            if q is None:
                continue
            ee = end_effector(arm3, q)
            assert math.hypot(ee.x - target.x, ee.y - target.y) <= 1e-3
            assert arm3.within_limits(q)
            hits += 1
        assert hits >= 95

    def test_fd_jacobian_matches_analytic(self, arm3):
        rng = np.random.default_rng(3)
        for _ in range(100):
            q = rng.uniform(-math.pi, math.pi, 3)
            fd = finite_difference_jacobian(arm3, q)
            an = analytic_jacobian(arm3, q)
            np.testing.assert_allclose(fd, an, rtol=1e-5, atol=1e-8)
