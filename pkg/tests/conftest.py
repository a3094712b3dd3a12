import math

import numpy as np
import pytest

from cotamp.geometry import ArmModel, Point2


@pytest.fixture(scope="session")
def arm3():
    """Default desk-scale 3-link arm."""
    return ArmModel(base=Point2(0.0, 0.0), link_lengths=(0.5, 0.5, 0.4), link_radius=0.04)


@pytest.fixture(scope="session")
def arm2():
    """2-link arm used for the grid-search planning oracle."""
    return ArmModel(
        base=Point2(0.0, 0.0),
        link_lengths=(0.6, 0.5),
        link_radius=0.04,
        joint_limits=((-math.pi, math.pi), (-math.pi, math.pi)),
    )


def sampled_segment_distance(p1, p2, q1, q2, samples=10_000):
    """Brute-force min over samples x samples point pairs on the two segments.

    Evaluated exactly without forming the pair matrix: for a fixed sample on
    one segment, its squared distance to the other segment's samples is a
    symmetric parabola in the sample parameter, so the nearest sample sits at
    the rounded clamped projection. The overestimate against the true
    distance is at most (len1 + len2) / (2 * (samples - 1)).
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    s = np.linspace(0.0, 1.0, samples)
    a = p1[None, :] + s[:, None] * (p2 - p1)[None, :]
    v = q2 - q1
    den = float(v @ v)
    if den < 1e-300:
        return float(np.hypot(a[:, 0] - q1[0], a[:, 1] - q1[1]).min())
    t = np.clip(((a - q1[None, :]) @ v) / den, 0.0, 1.0)
    t = np.round(t * (samples - 1)) / (samples - 1)
    b = q1[None, :] + t[:, None] * v[None, :]
    return float(np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1]).min())
