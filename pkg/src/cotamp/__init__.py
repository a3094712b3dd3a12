"""Desk-scale human-robot cooperation stack.

A planar simulator where a 3-link robot arm shares a tabletop workspace
with two stochastically moving human arms. The motion layer keeps
execution collision-free by checking the active path every tick and
replanning only when it is invalidated; the task layer learns, with PPO,
to pick task sequences that need fewer replans and fail less often.
"""

__version__ = "0.1.0"

from .geometry import (
    ArmModel,
    Capsule2,
    JointConfig,
    Point2,
    Segment2,
    capsules_collide,
    forward_kinematics,
    inverse_kinematics,
    link_capsules,
    segment_segment_distance,
)

__all__ = [
    "ArmModel",
    "Capsule2",
    "JointConfig",
    "Point2",
    "Segment2",
    "capsules_collide",
    "forward_kinematics",
    "inverse_kinematics",
    "link_capsules",
    "segment_segment_distance",
    "__version__",
]
