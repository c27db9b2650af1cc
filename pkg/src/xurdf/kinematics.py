"""Forward kinematics, tangent-space integration, frame Jacobians, and the
composite rigid body mass matrix.

Frame Jacobians are world-aligned and taken about the frame origin, with the
angular rows first. Internally, per-joint motion columns are carried in
world coordinates with the moment at the world origin, so a column (w, v)
gives a point x the velocity v + w x x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import JointKind, JointModel, RobotModel
from .se3 import Placement, Rotation, Twist, exp_se3

_UNIT_TOL = 1e-8


def neutral(model: RobotModel) -> np.ndarray:
    """Zero configuration: identity motion at every joint."""
    q = np.zeros(model.n_q)
    for j in model.joints:
        if j.kind is JointKind.CONTINUOUS:
            q[j.q_offset] = 1.0  # cos
        elif j.kind is JointKind.SPHERICAL:
            q[j.q_offset] = 1.0  # w
        elif j.kind is JointKind.FLOATING:
            q[j.q_offset + 3] = 1.0  # qw
        elif j.kind is JointKind.PLANAR:
            q[j.q_offset + 2] = 1.0  # cos
    return q


def check_configuration(model: RobotModel, q) -> np.ndarray:
    """Validate shape and unit-norm blocks; returns q as a float array."""
    q = np.asarray(q, dtype=float)
    if q.shape != (model.n_q,):
        raise ConfigurationError(
            f"configuration must have shape ({model.n_q},), got {q.shape}",
            code="BadShape")
    if not np.all(np.isfinite(q)):
        raise ConfigurationError("configuration contains non-finite values",
                                 code="BadValue")
    for j in model.joints:
        o = j.q_offset
        if j.kind in (JointKind.CONTINUOUS,):
            n = math.hypot(q[o], q[o + 1])
        elif j.kind is JointKind.PLANAR:
            n = math.hypot(q[o + 2], q[o + 3])
        elif j.kind is JointKind.SPHERICAL:
            n = math.sqrt(q[o] ** 2 + q[o + 1] ** 2 + q[o + 2] ** 2 + q[o + 3] ** 2)
        elif j.kind is JointKind.FLOATING:
            n = math.sqrt(q[o + 3] ** 2 + q[o + 4] ** 2 + q[o + 5] ** 2 + q[o + 6] ** 2)
        else:
            continue
        if abs(n - 1.0) > _UNIT_TOL:
            raise ConfigurationError(
                f"joint {j.name!r}: rotation block norm {n} is not 1",
                code="NotNormalized", subject=j.name)
    return q


def _joint_motion(j: JointModel, q: np.ndarray) -> Placement:
    o = j.q_offset
    k = j.kind
    if k is JointKind.FIXED:
        return Placement.identity()
    if k is JointKind.REVOLUTE:
        return Placement(Rotation.from_axis_angle(j.axis, q[o]), (0.0, 0.0, 0.0))
    if k is JointKind.PRISMATIC:
        a = j.axis
        d = q[o]
        return Placement(Rotation.identity(), (a[0] * d, a[1] * d, a[2] * d))
    if k is JointKind.CONTINUOUS:
        angle = math.atan2(q[o + 1], q[o])
        return Placement(Rotation.from_axis_angle(j.axis, angle), (0.0, 0.0, 0.0))
    if k is JointKind.SPHERICAL:
        return Placement(Rotation.from_quaternion(q[o], q[o + 1], q[o + 2], q[o + 3]),
                         (0.0, 0.0, 0.0))
    if k is JointKind.FLOATING:
        rot = Rotation.from_quaternion(q[o + 3], q[o + 4], q[o + 5], q[o + 6])
        return Placement(rot, (q[o], q[o + 1], q[o + 2]))
    if k is JointKind.PLANAR:
        e1, e2 = j.plane_basis
        u, v = q[o], q[o + 1]
        angle = math.atan2(q[o + 3], q[o + 2])
        return Placement(Rotation.from_axis_angle(j.axis, angle),
                         (u * e1[0] + v * e2[0], u * e1[1] + v * e2[1],
                          u * e1[2] + v * e2[2]))
    raise AssertionError(k)


@dataclass(frozen=True, eq=False)
class KinematicsCache:
    model: RobotModel
    q: np.ndarray
    joint_placements: tuple[Placement, ...]
    frame_placements: tuple[Placement, ...]


def forward_kinematics(model: RobotModel, q) -> KinematicsCache:
    q = check_configuration(model, q)
    placements: list[Placement] = []
    for j in model.joints:
        local = j.placement.compose(_joint_motion(j, q))
        if j.parent < 0:
            placements.append(local)
        else:
            placements.append(placements[j.parent].compose(local))
    frames = tuple(placements[f.joint].compose(f.placement) for f in model.frames)
    return KinematicsCache(model, q.copy(), tuple(placements), frames)


def frame_placement(cache: KinematicsCache, frame: int) -> Placement:
    return cache.frame_placements[frame]


def _rotate_complex(c: float, s: float, angle: float) -> tuple[float, float]:
    ca, sa = math.cos(angle), math.sin(angle)
    nc, ns = c * ca - s * sa, s * ca + c * sa
    n = math.hypot(nc, ns)
    return nc / n, ns / n


def integrate(model: RobotModel, q, v, dt: float = 1.0) -> np.ndarray:
    """Step q along tangent vector v for time dt, staying on the manifold."""
    q = check_configuration(model, q)
    v = np.asarray(v, dtype=float)
    if v.shape != (model.n_v,):
        raise ConfigurationError(
            f"tangent must have shape ({model.n_v},), got {v.shape}",
            code="BadShape")
    out = q.copy()
    for j in model.joints:
        o, w = j.q_offset, j.v_offset
        k = j.kind
        if k in (JointKind.REVOLUTE, JointKind.PRISMATIC):
            out[o] = q[o] + dt * v[w]
        elif k is JointKind.CONTINUOUS:
            out[o], out[o + 1] = _rotate_complex(q[o], q[o + 1], dt * v[w])
        elif k is JointKind.SPHERICAL:
            rot = Rotation.from_quaternion(q[o], q[o + 1], q[o + 2], q[o + 3])
            step = Rotation.exp((dt * v[w], dt * v[w + 1], dt * v[w + 2]))
            out[o:o + 4] = rot.compose(step).as_quaternion()
        elif k is JointKind.FLOATING:
            rot = Rotation.from_quaternion(q[o + 3], q[o + 4], q[o + 5], q[o + 6])
            pose = Placement(rot, (q[o], q[o + 1], q[o + 2]))
            step = exp_se3(Twist((dt * v[w], dt * v[w + 1], dt * v[w + 2]),
                                 (dt * v[w + 3], dt * v[w + 4], dt * v[w + 5])))
            nxt = pose.compose(step)
            out[o:o + 3] = nxt.translation
            out[o + 3:o + 7] = nxt.rotation.as_quaternion()
        elif k is JointKind.PLANAR:
            out[o] = q[o] + dt * v[w]
            out[o + 1] = q[o + 1] + dt * v[w + 1]
            out[o + 2], out[o + 3] = _rotate_complex(q[o + 2], q[o + 3], dt * v[w + 2])
    return out


def _motion_columns(cache: KinematicsCache, i: int) -> np.ndarray:
    """6 x nv world columns for joint i, moment at the world origin."""
    model = cache.model
    j = model.joints[i]
    x = cache.joint_placements[i]
    cols = np.zeros((6, j.nv))
    if j.nv == 0:
        return cols
    r = x.rotation.as_matrix()
    p = np.array(x.translation)
    k = j.kind
    if k in (JointKind.REVOLUTE, JointKind.CONTINUOUS):
        n = r @ j.axis
        cols[:3, 0] = n
        cols[3:, 0] = np.cross(p, n)
    elif k is JointKind.PRISMATIC:
        cols[3:, 0] = r @ j.axis
    elif k is JointKind.SPHERICAL:
        for c in range(3):
            n = r[:, c]
            cols[:3, c] = n
            cols[3:, c] = np.cross(p, n)
    elif k is JointKind.FLOATING:
        for c in range(3):
            n = r[:, c]
            cols[:3, c] = n
            cols[3:, c] = np.cross(p, n)
            cols[3:, 3 + c] = n
    elif k is JointKind.PLANAR:
        parent = model.joints[i].parent
        pre = j.placement if parent < 0 else cache.joint_placements[parent].compose(j.placement)
        rp = pre.rotation.as_matrix()
        e1, e2 = j.plane_basis
        cols[3:, 0] = rp @ e1
        cols[3:, 1] = rp @ e2
        n = r @ j.axis
        cols[:3, 2] = n
        cols[3:, 2] = np.cross(p, n)
    else:
        raise AssertionError(k)
    return cols


def _ancestors(model: RobotModel, joint: int) -> list[int]:
    out = []
    while joint >= 0:
        out.append(joint)
        joint = model.joints[joint].parent
    return out


def frame_jacobian(model: RobotModel, cache: KinematicsCache, frame: int) -> np.ndarray:
    """World-aligned Jacobian about the frame origin, angular rows first."""
    f = model.frames[frame]
    target = np.array(cache.frame_placements[frame].translation)
    jac = np.zeros((6, model.n_v))
    for i in _ancestors(model, f.joint):
        j = model.joints[i]
        if j.nv == 0:
            continue
        cols = _motion_columns(cache, i)
        jac[:3, j.v_offset:j.v_offset + j.nv] = cols[:3]
        jac[3:, j.v_offset:j.v_offset + j.nv] = (
            cols[3:] + np.cross(cols[:3].T, target).T)
    return jac


def _spatial_body_inertia(cache: KinematicsCache, i: int) -> np.ndarray:
    """6x6 inertia of body i in world coordinates about the world origin."""
    from .se3 import skew

    body = cache.model.bodies[i]
    x = cache.joint_placements[i]
    r = x.rotation.as_matrix()
    c = np.array(x.act(body.com))
    icm = r @ body.inertia_matrix() @ r.T
    ch = skew(c)
    m = body.mass
    out = np.zeros((6, 6))
    out[:3, :3] = icm + m * (ch @ ch.T)
    out[:3, 3:] = m * ch
    out[3:, :3] = m * ch.T
    out[3:, 3:] = m * np.eye(3)
    return out


def crba(model: RobotModel, cache: KinematicsCache) -> np.ndarray:
    """Joint-space mass matrix by the composite rigid body algorithm."""
    n = len(model.joints)
    composite = [_spatial_body_inertia(cache, i) for i in range(n)]
    for i in range(n - 1, 0, -1):
        p = model.joints[i].parent
        if p >= 0:
            composite[p] = composite[p] + composite[i]
    mass = np.zeros((model.n_v, model.n_v))
    cols = {i: _motion_columns(cache, i) for i in range(n) if model.joints[i].nv}
    for i in range(n):
        ji = model.joints[i]
        if ji.nv == 0:
            continue
        si = cols[i]
        f = composite[i] @ si
        bi = slice(ji.v_offset, ji.v_offset + ji.nv)
        mass[bi, bi] = si.T @ f
        a = ji.parent
        while a >= 0:
            ja = model.joints[a]
            if ja.nv:
                ba = slice(ja.v_offset, ja.v_offset + ja.nv)
                block = cols[a].T @ f
                mass[ba, bi] = block
                mass[bi, ba] = block.T
            a = ja.parent
    return mass
