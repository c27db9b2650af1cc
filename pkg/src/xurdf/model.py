"""Reduced robot model: the tree of moving joints after fixed-joint merging,
the bodies attached to them, named frames, and loop closures.

Configuration layout is depth-first in declaration order. Per joint kind:

    kind        n_q  n_v  configuration block
    fixed        0    0   (root only)
    revolute     1    1   angle
    prismatic    1    1   displacement
    continuous   2    1   (cos, sin)
    spherical    4    3   unit quaternion (w, x, y, z)
    floating     7    6   (x, y, z, qw, qx, qy, qz)
    planar       4    3   (u, v, cos, sin)

Tangent blocks pair with these: spherical and the angular half of floating
use body angular velocity (right-applied), planar uses in-plane rates plus
the angular rate about the plane normal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .se3 import Placement, Rotation, Vec3
from .urdf import JointLimits


class JointKind(enum.Enum):
    FIXED = "fixed"
    REVOLUTE = "revolute"
    CONTINUOUS = "continuous"
    PRISMATIC = "prismatic"
    SPHERICAL = "spherical"
    FLOATING = "floating"
    PLANAR = "planar"


JOINT_SIZES: dict[JointKind, tuple[int, int]] = {
    JointKind.FIXED: (0, 0),
    JointKind.REVOLUTE: (1, 1),
    JointKind.CONTINUOUS: (2, 1),
    JointKind.PRISMATIC: (1, 1),
    JointKind.SPHERICAL: (4, 3),
    JointKind.FLOATING: (7, 6),
    JointKind.PLANAR: (4, 3),
}


@dataclass(frozen=True)
class JointModel:
    name: str
    kind: JointKind
    parent: int  # index of the parent joint, -1 for the root
    placement: Placement  # parent joint frame -> this joint frame, at zero
    axis: Vec3 | None = None
    q_offset: int = 0
    nq: int = 0
    v_offset: int = 0
    nv: int = 0
    limits: JointLimits | None = None
    plane_basis: tuple[Vec3, Vec3] | None = None  # planar only: e1, e2


@dataclass(frozen=True)
class BodyInertia:
    """Inertia of the rigid body carried by a joint, in that joint's frame.

    The rotational part is about the center of mass, stored as the six
    independent entries (ixx, ixy, ixz, iyy, iyz, izz).
    """

    mass: float = 0.0
    com: Vec3 = (0.0, 0.0, 0.0)
    inertia_com: tuple[float, float, float, float, float, float] = (0.0,) * 6

    @staticmethod
    def zero() -> "BodyInertia":
        return BodyInertia()

    def inertia_matrix(self) -> np.ndarray:
        ixx, ixy, ixz, iyy, iyz, izz = self.inertia_com
        return np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])


def _sym6(m: np.ndarray) -> tuple[float, float, float, float, float, float]:
    return (float(m[0, 0]), float(m[0, 1]), float(m[0, 2]),
            float(m[1, 1]), float(m[1, 2]), float(m[2, 2]))


def transform_inertia(body: BodyInertia, x: Placement) -> BodyInertia:
    """Re-express a body inertia given in frame B in frame A, x = A_M_B."""
    com = x.act(body.com)
    r = x.rotation.as_matrix()
    return BodyInertia(body.mass, com, _sym6(r @ body.inertia_matrix() @ r.T))


def add_inertia(a: BodyInertia, b: BodyInertia) -> BodyInertia:
    """Combine two body inertias expressed in the same frame."""
    mass = a.mass + b.mass
    if mass == 0.0:
        return BodyInertia.zero()
    com = tuple((a.mass * a.com[i] + b.mass * b.com[i]) / mass for i in range(3))
    total = np.zeros((3, 3))
    for part in (a, b):
        d = np.array(part.com) - np.array(com)
        shift = part.mass * (float(d @ d) * np.eye(3) - np.outer(d, d))
        total += part.inertia_matrix() + shift
    return BodyInertia(mass, com, _sym6(total))  # type: ignore[arg-type]


@dataclass(frozen=True)
class FrameModel:
    name: str
    joint: int  # supporting joint index
    placement: Placement  # joint frame -> this frame


@dataclass(frozen=True)
class ClosureModel:
    name: str
    ctype: str  # "3D" or "6D"
    frame_a: int
    frame_b: int


@dataclass(frozen=True)
class RobotModel:
    name: str
    joints: tuple[JointModel, ...]
    bodies: tuple[BodyInertia, ...]  # parallel to joints
    frames: tuple[FrameModel, ...]
    closures: tuple[ClosureModel, ...] = ()
    actuated: tuple[int, ...] = ()  # joint indices, document order
    n_q: int = 0
    n_v: int = 0
    # limits lifted off joints whose type a replacement changed
    replaced_limits: tuple[tuple[str, JointLimits], ...] = ()
    # triple replacements requested in the extension, applied by
    # substitute_spherical rather than at build time
    requested_triples: tuple[tuple[str, str, str], ...] = ()

    def joint_index(self, name: str) -> int:
        for i, j in enumerate(self.joints):
            if j.name == name:
                return i
        raise KeyError(name)

    def frame_index(self, name: str) -> int:
        for i, f in enumerate(self.frames):
            if f.name == name:
                return i
        raise KeyError(name)

    def joint_names(self) -> tuple[str, ...]:
        return tuple(j.name for j in self.joints)

    def frame_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.frames)

    @property
    def n_actuated(self) -> int:
        return sum(self.joints[i].nv for i in self.actuated)

    def descendants(self, joint: int) -> list[int]:
        out = []
        for i in range(joint + 1, len(self.joints)):
            p = self.joints[i].parent
            if p == joint or p in out:
                out.append(i)
        return out


def assign_layout(joints: list[JointModel]) -> tuple[list[JointModel], int, int]:
    """Fill q/v offsets in joint declaration order; return (joints, n_q, n_v)."""
    out = []
    q = v = 0
    for j in joints:
        nq, nv = JOINT_SIZES[j.kind]
        out.append(replace(j, q_offset=q, nq=nq, v_offset=v, nv=nv))
        q += nq
        v += nv
    return out, q, v


@dataclass(frozen=True)
class ValidationFinding:
    code: str
    severity: str  # "error" or "warning"
    subject: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[ValidationFinding, ...] = ()

    @property
    def errors(self) -> tuple[ValidationFinding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")

    @property
    def warnings(self) -> tuple[ValidationFinding, ...]:
        return tuple(f for f in self.findings if f.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class BuildOptions:
    floating_base: bool = False


@dataclass(frozen=True)
class SubstitutionTolerances:
    concurrency: float = 1e-6  # max distance between the three axes
    axis_rank: float = 1e-6  # min singular value of the stacked axes
    mass: float = 1e-9  # max mass of the intermediate links
