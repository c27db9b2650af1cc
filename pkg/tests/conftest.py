"""Shared builders: random tree models over every joint kind, random
configurations drawn away from rotation singularities, finite-difference
Jacobians used as the reference for the analytic ones."""

import math

import numpy as np
import pytest

from xurdf.kinematics import forward_kinematics, integrate
from xurdf.model import (
    BodyInertia,
    FrameModel,
    JointKind,
    JointModel,
    RobotModel,
    assign_layout,
)
from xurdf.se3 import Placement, Rotation

MOVING_KINDS = (
    JointKind.REVOLUTE,
    JointKind.CONTINUOUS,
    JointKind.PRISMATIC,
    JointKind.SPHERICAL,
    JointKind.FLOATING,
    JointKind.PLANAR,
)


def make_model(joints, bodies=None, frames=(), closures=(), actuated=(), name="m"):
    laid, n_q, n_v = assign_layout(list(joints))
    if bodies is None:
        bodies = tuple(BodyInertia.zero() for _ in laid)
    return RobotModel(name, tuple(laid), tuple(bodies), tuple(frames),
                      tuple(closures), tuple(actuated), n_q, n_v)


def unit(rng):
    v = rng.normal(size=3)
    return tuple(v / np.linalg.norm(v))


def perp_basis(axis):
    a = np.array(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(a, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    return tuple(e1), tuple(e2)


def random_placement(rng, max_angle=2.0, span=1.0):
    v = rng.normal(size=3)
    v *= rng.uniform(0.0, max_angle) / np.linalg.norm(v)
    return Placement(Rotation.exp(tuple(v)), tuple(rng.uniform(-span, span, 3)))


def random_inertia(rng):
    a = rng.normal(size=(3, 3))
    m = a @ a.T + 0.05 * np.eye(3)
    return BodyInertia(
        float(rng.uniform(0.1, 2.0)), tuple(rng.uniform(-0.3, 0.3, 3)),
        (m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2], m[2, 2]))


def random_model(rng, n_joints=6, floating_root=False, with_inertia=False):
    root_kind = JointKind.FLOATING if floating_root else JointKind.FIXED
    joints = [JointModel("root", root_kind, -1, Placement.identity())]
    frames = []
    for i in range(1, n_joints + 1):
        kind = MOVING_KINDS[rng.integers(0, len(MOVING_KINDS))]
        axis = unit(rng) if kind not in (JointKind.SPHERICAL, JointKind.FLOATING) else None
        basis = perp_basis(axis) if kind is JointKind.PLANAR else None
        joints.append(JointModel(
            f"j{i}", kind, int(rng.integers(0, i)), random_placement(rng),
            axis, plane_basis=basis))
    laid, n_q, n_v = assign_layout(joints)
    for i in range(len(laid)):
        frames.append(FrameModel(f"f{i}", i, random_placement(rng)))
    if with_inertia:
        bodies = tuple(random_inertia(rng) for _ in laid)
    else:
        bodies = tuple(BodyInertia.zero() for _ in laid)
    return RobotModel("rand", tuple(laid), bodies, tuple(frames), (), (), n_q, n_v)


def random_config(rng, model, max_angle=2.2):
    q = np.zeros(model.n_q)
    for j in model.joints:
        o = j.q_offset
        if j.kind in (JointKind.REVOLUTE, JointKind.PRISMATIC):
            q[o] = rng.uniform(-1.2, 1.2)
        elif j.kind is JointKind.CONTINUOUS:
            t = rng.uniform(-max_angle, max_angle)
            q[o], q[o + 1] = math.cos(t), math.sin(t)
        elif j.kind is JointKind.PLANAR:
            q[o], q[o + 1] = rng.uniform(-1.0, 1.0, 2)
            t = rng.uniform(-max_angle, max_angle)
            q[o + 2], q[o + 3] = math.cos(t), math.sin(t)
        elif j.kind is JointKind.SPHERICAL:
            rot = Rotation.exp(np.array(unit(rng)) * rng.uniform(0.0, max_angle))
            q[o:o + 4] = rot.as_quaternion()
        elif j.kind is JointKind.FLOATING:
            q[o:o + 3] = rng.uniform(-1.0, 1.0, 3)
            rot = Rotation.exp(np.array(unit(rng)) * rng.uniform(0.0, max_angle))
            q[o + 3:o + 7] = rot.as_quaternion()
    return q


def fd_frame_jacobian(model, q, frame, eps=1e-6):
    jac = np.zeros((6, model.n_v))
    for k in range(model.n_v):
        e = np.zeros(model.n_v)
        e[k] = 1.0
        xp = forward_kinematics(model, integrate(model, q, e, eps)).frame_placements[frame]
        xm = forward_kinematics(model, integrate(model, q, e, -eps)).frame_placements[frame]
        delta = xp.rotation.compose(xm.rotation.inverse())
        jac[:3, k] = np.array(delta.log()) / (2 * eps)
        jac[3:, k] = (np.array(xp.translation) - np.array(xm.translation)) / (2 * eps)
    return jac


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
