"""Numba-compiled numeric kernels shared by the geometry and planner modules.

Everything here operates on plain floats and ndarrays so it can be JIT
compiled; the public modules wrap these in friendlier types. Obstacles are
passed as an (n, 5) array of capsule rows [ax, ay, bx, by, radius].

The planner kernel uses an inlined splitmix64 generator instead of numpy's
RNG so that results are bit-reproducible for a given integer seed,
independent of numba/numpy versions of global RNG state.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_EPS = 1e-12

# splitmix64 constants (unsigned 64-bit arithmetic, wraps like C)
_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_M2 = np.uint64(0x94D049BB133111EB)
_U64_TOP53 = np.uint64(11)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


@njit(cache=True, inline="always")
def _next_u64(state):
    state[0] = state[0] + _SM64_GAMMA
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _SM64_M1
    z = (z ^ (z >> np.uint64(27))) * _SM64_M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _rand01(state):
    """Uniform draw in [0, 1) with 53 bits of precision."""
    return (_next_u64(state) >> _U64_TOP53) * _INV_2_53


@njit(cache=True, inline="always")
def _point_seg_distance(px, py, ax, ay, bx, by):
    ux = bx - ax
    uy = by - ay
    den = ux * ux + uy * uy
    if den <= _EPS:
        ex = px - ax
        ey = py - ay
    else:
        t = ((px - ax) * ux + (py - ay) * uy) / den
        t = min(1.0, max(0.0, t))
        ex = px - (ax + t * ux)
        ey = py - (ay + t * uy)
    return (ex * ex + ey * ey) ** 0.5


@njit(cache=True)
def seg_seg_distance(ax, ay, bx, by, cx, cy, dx, dy):
    """Minimum distance between segments A-B and C-D (degenerate ok).

    In the plane a non-crossing pair attains its minimum at an endpoint of
    one segment, so the distance is the min of the four endpoint-to-segment
    distances, zero when the segments properly cross. Exactly symmetric in
    its arguments.
    """
    d = _point_seg_distance(ax, ay, cx, cy, dx, dy)
    d = min(d, _point_seg_distance(bx, by, cx, cy, dx, dy))
    d = min(d, _point_seg_distance(cx, cy, ax, ay, bx, by))
    d = min(d, _point_seg_distance(dx, dy, ax, ay, bx, by))
    if d == 0.0:
        return 0.0
    # proper crossing: endpoints of each segment strictly on opposite sides
    ux = bx - ax
    uy = by - ay
    o1 = ux * (cy - ay) - uy * (cx - ax)
    o2 = ux * (dy - ay) - uy * (dx - ax)
    if (o1 > 0.0 and o2 < 0.0) or (o1 < 0.0 and o2 > 0.0):
        vx = dx - cx
        vy = dy - cy
        o3 = vx * (ay - cy) - vy * (ax - cx)
        o4 = vx * (by - cy) - vy * (bx - cx)
        if (o3 > 0.0 and o4 < 0.0) or (o3 < 0.0 and o4 > 0.0):
            return 0.0
    return d


@njit(cache=True)
def fk_positions(q, base_x, base_y, lengths, out):
    """Cumulative-angle planar chain; fills out[(n+1), 2] with joint points."""
    x = base_x
    y = base_y
    th = 0.0
    out[0, 0] = x
    out[0, 1] = y
    for i in range(lengths.shape[0]):
        th += q[i]
        x += lengths[i] * np.cos(th)
        y += lengths[i] * np.sin(th)
        out[i + 1, 0] = x
        out[i + 1, 1] = y


@njit(cache=True)
def config_collides(q, base_x, base_y, lengths, link_radius, obstacles):
    """True iff any link capsule overlaps any obstacle capsule (touch counts)."""
    x = base_x
    y = base_y
    th = 0.0
    for i in range(lengths.shape[0]):
        th += q[i]
        nx = x + lengths[i] * np.cos(th)
        ny = y + lengths[i] * np.sin(th)
        for k in range(obstacles.shape[0]):
            d = seg_seg_distance(
                x, y, nx, ny,
                obstacles[k, 0], obstacles[k, 1], obstacles[k, 2], obstacles[k, 3],
            )
            if d <= link_radius + obstacles[k, 4]:
                return True
        x = nx
        y = ny
    return False


@njit(cache=True)
def edge_collides(qa, qb, base_x, base_y, lengths, link_radius, obstacles, resolution):
    """Check interpolated configs along qa->qb (spacing <= resolution, qb included).

    qa is assumed already validated by the caller.
    """
    dist = 0.0
    for i in range(qa.shape[0]):
        diff = qb[i] - qa[i]
        dist += diff * diff
    dist = dist ** 0.5
    n_steps = int(np.ceil(dist / resolution))
    if n_steps < 1:
        n_steps = 1
    q = np.empty(qa.shape[0])
    for s in range(1, n_steps + 1):
        frac = s / n_steps
        for i in range(qa.shape[0]):
            q[i] = qa[i] + frac * (qb[i] - qa[i])
        if config_collides(q, base_x, base_y, lengths, link_radius, obstacles):
            return True
    return False


# rrt_star_core status codes
PLAN_OK = 0
PLAN_NO_PATH = 1
PLAN_START_COLLIDES = 2
PLAN_GOAL_COLLIDES = 3

_INF = 1e30


@njit(cache=True)
def _link_child(child, par, first_child, next_sib, prev_sib):
    head = first_child[par]
    next_sib[child] = head
    prev_sib[child] = -1
    if head != -1:
        prev_sib[head] = child
    first_child[par] = child


@njit(cache=True)
def _unlink_child(child, par, first_child, next_sib, prev_sib):
    prv = prev_sib[child]
    nxt = next_sib[child]
    if prv == -1:
        first_child[par] = nxt
    else:
        next_sib[prv] = nxt
    if nxt != -1:
        prev_sib[nxt] = prv
    next_sib[child] = -1
    prev_sib[child] = -1


@njit(cache=True)
def _propagate_cost_delta(root, delta, cost, first_child, next_sib, stack):
    """Add delta to every descendant of root (root itself already updated)."""
    top = 0
    stack[top] = root
    top += 1
    while top > 0:
        top -= 1
        node = stack[top]
        child = first_child[node]
        while child != -1:
            cost[child] += delta
            stack[top] = child
            top += 1
            child = next_sib[child]


@njit(cache=True)
def rrt_star_core(
    start,
    goal,
    lo,
    hi,
    base_x,
    base_y,
    lengths,
    link_radius,
    obstacles,
    max_iters,
    steer_step,
    goal_bias,
    rewire_gamma,
    edge_resolution,
    seed,
):
    """Joint-space RRT*: sample, nearest, steer, choose-parent, rewire.

    Stored costs stay consistent with the tree after every rewire (subtree
    deltas are propagated), so the final arrays satisfy
    cost[i] == cost[parent[i]] + ||node[i] - node[parent[i]]||.

    Returns (status, nodes, parent, cost, n_nodes, goal_index).
    """
    d = start.shape[0]
    cap = max_iters + 2
    nodes = np.empty((cap, d))
    parent = np.full(cap, -1, np.int64)
    cost = np.zeros(cap)
    first_child = np.full(cap, -1, np.int64)
    next_sib = np.full(cap, -1, np.int64)
    prev_sib = np.full(cap, -1, np.int64)
    stack = np.empty(cap, np.int64)

    state = np.empty(1, np.uint64)
    state[0] = np.uint64(seed)

    if config_collides(start, base_x, base_y, lengths, link_radius, obstacles):
        return PLAN_START_COLLIDES, nodes, parent, cost, 0, -1
    if config_collides(goal, base_x, base_y, lengths, link_radius, obstacles):
        return PLAN_GOAL_COLLIDES, nodes, parent, cost, 0, -1

    nodes[0] = start
    n = 1
    goal_idx = -1

    same = True
    for i in range(d):
        if abs(start[i] - goal[i]) > _EPS:
            same = False
            break
    if same:
        return PLAN_OK, nodes, parent, cost, 1, 0

    sample = np.empty(d)
    q_new = np.empty(d)
    inv_d = 1.0 / d

    for _ in range(max_iters):
        # sample (goal bias consumes one draw, uniform consumes d more)
        if _rand01(state) < goal_bias:
            for i in range(d):
                sample[i] = goal[i]
        else:
            for i in range(d):
                sample[i] = lo[i] + _rand01(state) * (hi[i] - lo[i])

        # nearest node (squared euclidean)
        best = 0
        best_d2 = _INF
        for j in range(n):
            d2 = 0.0
            for i in range(d):
                diff = nodes[j, i] - sample[i]
                d2 += diff * diff
            if d2 < best_d2:
                best_d2 = d2
                best = j

        # steer: cap the max-norm step at steer_step
        max_abs = 0.0
        for i in range(d):
            a = abs(sample[i] - nodes[best, i])
            if a > max_abs:
                max_abs = a
        if max_abs <= _EPS:
            continue
        scale = 1.0 if max_abs <= steer_step else steer_step / max_abs
        for i in range(d):
            q_new[i] = nodes[best, i] + scale * (sample[i] - nodes[best, i])

        if config_collides(q_new, base_x, base_y, lengths, link_radius, obstacles):
            continue

        is_goal = True
        for i in range(d):
            if abs(q_new[i] - goal[i]) > 1e-9:
                is_goal = False
                break

        # near set within r_n = gamma * (log n / n)^(1/d)
        r = rewire_gamma * (np.log(n) / n) ** inv_d if n > 1 else 0.0
        r2 = r * r
        near = np.empty(n, np.int64)
        n_near = 0
        for j in range(n):
            d2 = 0.0
            for i in range(d):
                diff = nodes[j, i] - q_new[i]
                d2 += diff * diff
            if d2 <= r2:
                near[n_near] = j
                n_near += 1

        # candidate parents: near set plus the nearest node, cheapest first
        cand = np.empty(n_near + 1, np.int64)
        cand_cost = np.empty(n_near + 1)
        n_cand = 0
        has_best = False
        for t in range(n_near):
            j = near[t]
            if j == best:
                has_best = True
            e = 0.0
            for i in range(d):
                diff = nodes[j, i] - q_new[i]
                e += diff * diff
            cand[n_cand] = j
            cand_cost[n_cand] = cost[j] + e ** 0.5
            n_cand += 1
        if not has_best:
            e = 0.0
            for i in range(d):
                diff = nodes[best, i] - q_new[i]
                e += diff * diff
            cand[n_cand] = best
            cand_cost[n_cand] = cost[best] + e ** 0.5
            n_cand += 1

        order = np.argsort(cand_cost[:n_cand])
        chosen = -1
        chosen_cost = _INF
        for t in range(n_cand):
            j = cand[order[t]]
            if is_goal and goal_idx != -1 and j == goal_idx:
                continue
            if not edge_collides(
                nodes[j], q_new, base_x, base_y, lengths, link_radius,
                obstacles, edge_resolution,
            ):
                chosen = j
                chosen_cost = cand_cost[order[t]]
                break
        if chosen == -1:
            continue

        if is_goal and goal_idx != -1:
            # duplicate of the goal node: keep it unique, just improve its parent
            if chosen_cost + _EPS < cost[goal_idx]:
                _unlink_child(goal_idx, parent[goal_idx], first_child, next_sib, prev_sib)
                parent[goal_idx] = chosen
                delta = chosen_cost - cost[goal_idx]
                cost[goal_idx] = chosen_cost
                _link_child(goal_idx, chosen, first_child, next_sib, prev_sib)
                _propagate_cost_delta(goal_idx, delta, cost, first_child, next_sib, stack)
            continue

        new_idx = n
        nodes[new_idx] = q_new
        parent[new_idx] = chosen
        cost[new_idx] = chosen_cost
        _link_child(new_idx, chosen, first_child, next_sib, prev_sib)
        n += 1
        if is_goal:
            goal_idx = new_idx
            continue

        # rewire neighbours through the new node when it shortens them
        for t in range(n_near):
            j = near[t]
            if j == chosen or j == 0:
                continue
            e = 0.0
            for i in range(d):
                diff = nodes[j, i] - q_new[i]
                e += diff * diff
            c_via = chosen_cost + e ** 0.5
            if c_via + 1e-12 < cost[j]:
                if not edge_collides(
                    q_new, nodes[j], base_x, base_y, lengths, link_radius,
                    obstacles, edge_resolution,
                ):
                    _unlink_child(j, parent[j], first_child, next_sib, prev_sib)
                    parent[j] = new_idx
                    delta = c_via - cost[j]
                    cost[j] = c_via
                    _link_child(j, new_idx, first_child, next_sib, prev_sib)
                    _propagate_cost_delta(j, delta, cost, first_child, next_sib, stack)

        # goal connection: direct attempt while unconnected (fast first
        # solution); once connected, improvements only from nearby nodes
        # (the near-set rewiring above covers the rest)
        e = 0.0
        for i in range(d):
            diff = goal[i] - q_new[i]
            e += diff * diff
        e = e ** 0.5
        c_goal = cost[new_idx] + e
        attempt = goal_idx == -1 or (
            c_goal + _EPS < cost[goal_idx] and e <= max(r, 2.0 * steer_step)
        )
        if attempt:
            if not edge_collides(
                q_new, goal, base_x, base_y, lengths, link_radius,
                obstacles, edge_resolution,
            ):
                if goal_idx == -1:
                    goal_idx = n
                    nodes[goal_idx] = goal
                    parent[goal_idx] = new_idx
                    cost[goal_idx] = c_goal
                    _link_child(goal_idx, new_idx, first_child, next_sib, prev_sib)
                    n += 1
                else:
                    _unlink_child(goal_idx, parent[goal_idx], first_child, next_sib, prev_sib)
                    parent[goal_idx] = new_idx
                    delta = c_goal - cost[goal_idx]
                    cost[goal_idx] = c_goal
                    _link_child(goal_idx, new_idx, first_child, next_sib, prev_sib)
                    _propagate_cost_delta(goal_idx, delta, cost, first_child, next_sib, stack)

    if goal_idx == -1:
        return PLAN_NO_PATH, nodes, parent, cost, n, -1
    return PLAN_OK, nodes, parent, cost, n, goal_idx
