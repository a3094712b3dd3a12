"""Planar collision primitives and a 3-link kinematic arm.

Points and segments are lightweight named tuples; capsules (a segment swept
by a radius) are the collision proxy for both robot links and human arms.
Joint configurations are plain float ndarrays of per-joint angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels

JointConfig = np.ndarray  # shape (n_links,), radians


class Point2(NamedTuple):
    x: float
    y: float


class Segment2(NamedTuple):
    a: Point2
    b: Point2


@dataclass(frozen=True)
class Capsule2:
    """Segment swept by a radius; touching counts as overlap."""

    axis: Segment2
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"capsule radius must be positive and finite, got {self.radius}")


@dataclass(frozen=True)
class ArmModel:
    """Planar revolute chain with cumulative joint angles.

    max_joint_step bounds how far any single joint may move per control tick;
    paths handed to the executor are subdivided to respect it.
    """

    base: Point2 = Point2(0.0, 0.0)
    link_lengths: tuple[float, ...] = (0.5, 0.5, 0.4)
    link_radius: float = 0.04
    joint_limits: tuple[tuple[float, float], ...] = field(default=None)  # type: ignore[assignment]
    max_joint_step: float = 0.15

    def __post_init__(self):
        if self.joint_limits is None:
            object.__setattr__(
                self, "joint_limits", tuple((-math.pi, math.pi) for _ in self.link_lengths)
            )
        if len(self.joint_limits) != len(self.link_lengths):
            raise ValueError("joint_limits must match link count")
        if any(l <= 0 for l in self.link_lengths):
            raise ValueError("link lengths must be positive")
        if any(lo >= hi for lo, hi in self.joint_limits):
            raise ValueError("each joint limit must satisfy lo < hi")
        if self.link_radius <= 0 or self.max_joint_step <= 0:
            raise ValueError("link_radius and max_joint_step must be positive")

    @property
    def n_joints(self) -> int:
        return len(self.link_lengths)

    @property
    def reach(self) -> float:
        return float(sum(self.link_lengths))

    @cached_property
    def lengths_array(self) -> np.ndarray:
        return np.asarray(self.link_lengths, dtype=np.float64)

    @cached_property
    def limits_lo(self) -> np.ndarray:
        return np.asarray([lo for lo, _ in self.joint_limits], dtype=np.float64)

    @cached_property
    def limits_hi(self) -> np.ndarray:
        return np.asarray([hi for _, hi in self.joint_limits], dtype=np.float64)

    def within_limits(self, q: JointConfig) -> bool:
        q = np.asarray(q, dtype=np.float64)
        return bool(np.all(q >= self.limits_lo) and np.all(q <= self.limits_hi))

    def clamp_to_limits(self, q: JointConfig) -> JointConfig:
        return np.clip(np.asarray(q, dtype=np.float64), self.limits_lo, self.limits_hi)


def capsule_array(obstacles: Sequence[Capsule2]) -> np.ndarray:
    """Pack capsules into the (n, 5) [ax, ay, bx, by, r] layout the kernels use."""
    out = np.empty((len(obstacles), 5), dtype=np.float64)
    for i, c in enumerate(obstacles):
        (ax, ay), (bx, by) = c.axis
        out[i, 0] = ax
        out[i, 1] = ay
        out[i, 2] = bx
        out[i, 3] = by
        out[i, 4] = c.radius
    return out


def segment_segment_distance(s1: Segment2, s2: Segment2) -> float:
    """Minimum Euclidean distance between two segments (0 iff they intersect)."""
    (ax, ay), (bx, by) = s1
    (cx, cy), (dx, dy) = s2
    return float(_kernels.seg_seg_distance(ax, ay, bx, by, cx, cy, dx, dy))


def capsules_collide(c1: Capsule2, c2: Capsule2) -> bool:
    """Touching (axis distance exactly equal to the radius sum) counts as collision."""
    return segment_segment_distance(c1.axis, c2.axis) <= c1.radius + c2.radius


def forward_kinematics(model: ArmModel, q: JointConfig) -> tuple[list[Point2], Point2]:
    """Joint positions (base included) and end-effector point for config q."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (model.n_joints,):
        raise ValueError(f"expected {model.n_joints} joint angles, got shape {q.shape}")
    if not model.within_limits(q):
        raise ValueError(f"configuration {q} violates joint limits")
    out = np.empty((model.n_joints + 1, 2), dtype=np.float64)
    _kernels.fk_positions(q, model.base.x, model.base.y, model.lengths_array, out)
    points = [Point2(float(x), float(y)) for x, y in out]
    return points, points[-1]


def end_effector(model: ArmModel, q: JointConfig) -> Point2:
    _, ee = forward_kinematics(model, q)
    return ee


def link_capsules(model: ArmModel, q: JointConfig) -> list[Capsule2]:
    """One capsule per link, axes joining consecutive joint positions."""
    points, _ = forward_kinematics(model, q)
    return [
        Capsule2(Segment2(points[i], points[i + 1]), model.link_radius)
        for i in range(model.n_joints)
    ]


def finite_difference_jacobian(model: ArmModel, q: JointConfig, h: float = 1e-6) -> np.ndarray:
    """Central-difference end-effector Jacobian, shape (2, n_joints).

    Probe configs are evaluated without the joint-limit guard so the
    difference stencil works at the limit boundary too.
    """
    q = np.asarray(q, dtype=np.float64)
    n = model.n_joints
    jac = np.empty((2, n), dtype=np.float64)
    buf = np.empty((n + 1, 2), dtype=np.float64)
    for i in range(n):
        qp = q.copy()
        qp[i] += h
        _kernels.fk_positions(qp, model.base.x, model.base.y, model.lengths_array, buf)
        fx, fy = buf[-1]
        qp[i] -= 2.0 * h
        _kernels.fk_positions(qp, model.base.x, model.base.y, model.lengths_array, buf)
        bx, by = buf[-1]
        jac[0, i] = (fx - bx) / (2.0 * h)
        jac[1, i] = (fy - by) / (2.0 * h)
    return jac


def inverse_kinematics(
    model: ArmModel,
    target: Point2,
    seed: JointConfig,
    *,
    tol: float = 1e-3,
    max_iters: int = 200,
    damping: float = 0.05,
    step_clamp: float = 0.2,
    restarts: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> Optional[JointConfig]:
    """Damped-least-squares IK from seed; None when no solution is found.

    Targets outside the reachable disc fail immediately. With restarts > 0
    additional attempts start from uniform random configurations drawn from
    rng (required in that case).
    """
    tx, ty = float(target.x), float(target.y)
    if not (math.isfinite(tx) and math.isfinite(ty)):
        raise ValueError("target must be finite")
    if math.hypot(tx - model.base.x, ty - model.base.y) > model.reach + 1e-9:
        return None
    if restarts > 0 and rng is None:
        raise ValueError("restarts require an rng")

    seed = model.clamp_to_limits(np.asarray(seed, dtype=np.float64))
    buf = np.empty((model.n_joints + 1, 2), dtype=np.float64)
    lam2 = damping * damping

    def attempt(q0: np.ndarray) -> Optional[np.ndarray]:
        q = q0.copy()
        for _ in range(max_iters):
            _kernels.fk_positions(q, model.base.x, model.base.y, model.lengths_array, buf)
            ex = tx - buf[-1, 0]
            ey = ty - buf[-1, 1]
            if math.hypot(ex, ey) <= tol:
                return q
            jac = finite_difference_jacobian(model, q)
            # dq = J^T (J J^T + lam^2 I)^-1 e, with the 2x2 inverse in closed form
            jjt = jac @ jac.T
            a = jjt[0, 0] + lam2
            b = jjt[0, 1]
            c = jjt[1, 0]
            d = jjt[1, 1] + lam2
            det = a * d - b * c
            if abs(det) < 1e-15:
                return None
            wx = (d * ex - b * ey) / det
            wy = (-c * ex + a * ey) / det
            dq = jac.T @ np.array([wx, wy])
            step = np.max(np.abs(dq))
            if step > step_clamp:
                dq *= step_clamp / step
            q = model.clamp_to_limits(q + dq)
        return None

    q = attempt(seed)
    if q is not None:
        return q
    for _ in range(restarts):
        q0 = rng.uniform(model.limits_lo, model.limits_hi)
        q = attempt(q0)
        if q is not None:
            return q
    return None
