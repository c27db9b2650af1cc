"""Rigid-body transforms on SO(3)/SE(3) plus the small linear-algebra helpers
used by the analysis layers.

Conventions, fixed package-wide:

* Quaternions are stored scalar-first ``(w, x, y, z)``, unit norm, and
  canonicalized to the ``w >= 0`` hemisphere (on a ``w == 0`` tie, the first
  nonzero of ``x, y, z`` is made positive).
* Twists order the angular block first: ``(angular, linear)``.
* ``compose`` follows column-vector convention: ``a.compose(b)`` maps
  coordinates through ``b`` first, i.e. ``(a*b).act(p) == a.act(b.act(p))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AngleNearPiError

Vec3 = tuple[float, float, float]

_HALF_ANGLE_TAYLOR = 1e-8
_PI_GUARD = 1e-6


def _canonical(w: float, x: float, y: float, z: float) -> tuple[float, float, float, float]:
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if n == 0.0:
        raise ValueError("zero quaternion")
    w, x, y, z = w / n, x / n, y / n, z / n
    if w < 0.0 or (w == 0.0 and _first_nonzero_negative(x, y, z)):
        w, x, y, z = -w, -x, -y, -z
    return w, x, y, z


def _first_nonzero_negative(x: float, y: float, z: float) -> bool:
    for c in (x, y, z):
        if c != 0.0:
            return c < 0.0
    return False


@dataclass(frozen=True, slots=True)
class Rotation:
    """Unit quaternion, scalar-first, canonical hemisphere."""

    w: float
    x: float
    y: float
    z: float

    @staticmethod
    def identity() -> "Rotation":
        return Rotation(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_quaternion(w: float, x: float, y: float, z: float) -> "Rotation":
        return Rotation(*_canonical(float(w), float(x), float(y), float(z)))

    @staticmethod
    def from_axis_angle(axis, angle: float) -> "Rotation":
        ax, ay, az = (float(axis[0]), float(axis[1]), float(axis[2]))
        n = math.sqrt(ax * ax + ay * ay + az * az)
        if n == 0.0:
            raise ValueError("zero axis")
        h = 0.5 * float(angle)
        s = math.sin(h) / n
        return Rotation(*_canonical(math.cos(h), ax * s, ay * s, az * s))

    @staticmethod
    def exp(v) -> "Rotation":
        """Exponential of a rotation vector (axis * angle)."""
        vx, vy, vz = float(v[0]), float(v[1]), float(v[2])
        t = math.sqrt(vx * vx + vy * vy + vz * vz)
        h = 0.5 * t
        if t < _HALF_ANGLE_TAYLOR:
            # sin(h)/t -> 1/2 - t^2/48
            s = 0.5 - t * t / 48.0
        else:
            s = math.sin(h) / t
        return Rotation(*_canonical(math.cos(h), vx * s, vy * s, vz * s))

    @staticmethod
    def from_rpy(roll: float, pitch: float, yaw: float) -> "Rotation":
        """Fixed-axis XYZ convention: R = Rz(yaw) Ry(pitch) Rx(roll)."""
        rz = Rotation.from_axis_angle((0.0, 0.0, 1.0), yaw)
        ry = Rotation.from_axis_angle((0.0, 1.0, 0.0), pitch)
        rx = Rotation.from_axis_angle((1.0, 0.0, 0.0), roll)
        return rz.compose(ry).compose(rx)

    @staticmethod
    def from_matrix(m) -> "Rotation":
        m = np.asarray(m, dtype=float)
        t = m[0, 0] + m[1, 1] + m[2, 2]
        if t > 0.0:
            r = math.sqrt(1.0 + t)
            s = 0.5 / r
            return Rotation(*_canonical(0.5 * r, (m[2, 1] - m[1, 2]) * s,
                                        (m[0, 2] - m[2, 0]) * s, (m[1, 0] - m[0, 1]) * s))
        i = int(np.argmax([m[0, 0], m[1, 1], m[2, 2]]))
        j, k = (i + 1) % 3, (i + 2) % 3
        r = math.sqrt(1.0 + m[i, i] - m[j, j] - m[k, k])
        s = 0.5 / r
        q = [0.0, 0.0, 0.0, 0.0]
        q[0] = (m[k, j] - m[j, k]) * s
        q[1 + i] = 0.5 * r
        q[1 + j] = (m[j, i] + m[i, j]) * s
        q[1 + k] = (m[k, i] + m[i, k]) * s
        return Rotation(*_canonical(*q))

    def compose(self, other: "Rotation") -> "Rotation":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Rotation(*_canonical(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ))

    def inverse(self) -> "Rotation":
        return Rotation(self.w, -self.x, -self.y, -self.z)

    def rotate(self, v) -> Vec3:
        vx, vy, vz = float(v[0]), float(v[1]), float(v[2])
        qx, qy, qz, qw = self.x, self.y, self.z, self.w
        # v + 2 qw (q x v) + 2 q x (q x v)
        ux = qy * vz - qz * vy
        uy = qz * vx - qx * vz
        uz = qx * vy - qy * vx
        return (
            vx + 2.0 * (qw * ux + qy * uz - qz * uy),
            vy + 2.0 * (qw * uy + qz * ux - qx * uz),
            vz + 2.0 * (qw * uz + qx * uy - qy * ux),
        )

    def angle(self) -> float:
        return 2.0 * math.atan2(math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2), abs(self.w))

    def log(self) -> Vec3:
        """Rotation vector; raises AngleNearPiError inside the pi guard band."""
        theta = self.angle()
        if theta > math.pi - _PI_GUARD:
            raise AngleNearPiError(theta)
        nv = math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)
        if nv < _HALF_ANGLE_TAYLOR:
            # 2/w (1 - nv^2 / (3 w^2)) ~ 2 for w ~ 1
            scale = 2.0 / self.w * (1.0 - nv * nv / (3.0 * self.w * self.w))
        else:
            scale = theta / nv
        return (self.x * scale, self.y * scale, self.z * scale)

    def as_matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def as_quaternion(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    def as_rpy(self) -> Vec3:
        """Fixed-axis XYZ angles reproducing this rotation via from_rpy."""
        m = self.as_matrix()
        sp = -m[2, 0]
        sp = min(1.0, max(-1.0, sp))
        pitch = math.asin(sp)
        if abs(sp) < 1.0 - 1e-12:
            roll = math.atan2(m[2, 1], m[2, 2])
            yaw = math.atan2(m[1, 0], m[0, 0])
        else:
            # gimbal fold: spread the remaining rotation onto roll
            roll = math.atan2(-m[1, 2], m[1, 1])
            yaw = 0.0
        return (roll, pitch, yaw)

    def approx_eq(self, other: "Rotation", tol: float = 1e-12) -> bool:
        return (abs(self.w - other.w) <= tol and abs(self.x - other.x) <= tol
                and abs(self.y - other.y) <= tol and abs(self.z - other.z) <= tol)


@dataclass(frozen=True, slots=True)
class Placement:
    """Rigid transform: rotation plus translation."""

    rotation: Rotation
    translation: Vec3

    @staticmethod
    def identity() -> "Placement":
        return Placement(Rotation.identity(), (0.0, 0.0, 0.0))

    @staticmethod
    def from_parts(rotation: Rotation, translation) -> "Placement":
        t = (float(translation[0]), float(translation[1]), float(translation[2]))
        return Placement(rotation, t)

    @staticmethod
    def from_xyz_rpy(xyz, rpy) -> "Placement":
        return Placement.from_parts(Rotation.from_rpy(*map(float, rpy)), xyz)

    @staticmethod
    def from_matrix(m) -> "Placement":
        m = np.asarray(m, dtype=float)
        return Placement(Rotation.from_matrix(m[:3, :3]), (float(m[0, 3]), float(m[1, 3]), float(m[2, 3])))

    def compose(self, other: "Placement") -> "Placement":
        rx, ry, rz = self.rotation.rotate(other.translation)
        tx, ty, tz = self.translation
        return Placement(self.rotation.compose(other.rotation), (tx + rx, ty + ry, tz + rz))

    def inverse(self) -> "Placement":
        rinv = self.rotation.inverse()
        tx, ty, tz = rinv.rotate(self.translation)
        return Placement(rinv, (-tx, -ty, -tz))

    def act(self, point) -> Vec3:
        rx, ry, rz = self.rotation.rotate(point)
        tx, ty, tz = self.translation
        return (tx + rx, ty + ry, tz + rz)

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation.as_matrix()
        m[:3, 3] = self.translation
        return m

    def approx_eq(self, other: "Placement", tol: float = 1e-12) -> bool:
        ta, tb = self.translation, other.translation
        return self.rotation.approx_eq(other.rotation, tol) and all(
            abs(ta[i] - tb[i]) <= tol for i in range(3))


@dataclass(frozen=True, slots=True)
class Twist:
    """Spatial velocity/increment, angular block first."""

    angular: Vec3
    linear: Vec3

    @staticmethod
    def zero() -> "Twist":
        return Twist((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))

    @staticmethod
    def from_array(a) -> "Twist":
        return Twist((float(a[0]), float(a[1]), float(a[2])),
                     (float(a[3]), float(a[4]), float(a[5])))

    def as_array(self) -> np.ndarray:
        return np.array([*self.angular, *self.linear], dtype=float)


def skew(v) -> np.ndarray:
    x, y, z = float(v[0]), float(v[1]), float(v[2])
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _so3_coeffs(theta: float) -> tuple[float, float]:
    """(1-cos)/t^2 and (t-sin)/t^3 with Taylor fallbacks."""
    if theta < 1e-5:
        t2 = theta * theta
        return 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0
    t2 = theta * theta
    return (1.0 - math.cos(theta)) / t2, (theta - math.sin(theta)) / (t2 * theta)


def _so3_left_jacobian(w) -> np.ndarray:
    wx = skew(w)
    theta = math.sqrt(w[0] ** 2 + w[1] ** 2 + w[2] ** 2)
    a, b = _so3_coeffs(theta)
    return np.eye(3) + a * wx + b * (wx @ wx)


def _so3_left_jacobian_inv(w) -> np.ndarray:
    wx = skew(w)
    theta = math.sqrt(w[0] ** 2 + w[1] ** 2 + w[2] ** 2)
    if theta < 1e-5:
        c = 1.0 / 12.0 + theta * theta / 720.0
    else:
        half = 0.5 * theta
        c = (1.0 - half * math.cos(half) / math.sin(half)) / (theta * theta)
    return np.eye(3) - 0.5 * wx + c * (wx @ wx)


def exp_se3(xi: Twist) -> Placement:
    """Group exponential. The linear block is the V-mapped translation."""
    w = xi.angular
    rot = Rotation.exp(w)
    v = _so3_left_jacobian(w) @ np.asarray(xi.linear, dtype=float)
    return Placement(rot, (float(v[0]), float(v[1]), float(v[2])))


def log_se3(m: Placement) -> Twist:
    """Group logarithm; raises AngleNearPiError near the cut locus."""
    w = m.rotation.log()
    rho = _so3_left_jacobian_inv(w) @ np.asarray(m.translation, dtype=float)
    return Twist(w, (float(rho[0]), float(rho[1]), float(rho[2])))


def algebra_adjoint(xi: Twist) -> np.ndarray:
    """ad of an algebra element: [Ad(exp(xi))]' at identity, angular-first."""
    wx = skew(xi.angular)
    out = np.zeros((6, 6))
    out[:3, :3] = wx
    out[3:, 3:] = wx
    out[3:, :3] = skew(xi.linear)
    return out


def right_jacobian_se3(xi: Twist) -> np.ndarray:
    """Right Jacobian of exp at xi: exp(xi + d) ~ exp(xi) * exp(Jr d).

    Evaluated as the entire function (I - exp(-ad))/ad via its power series,
    which converges for every argument; terms are cut once they stop
    contributing at double precision.
    """
    a = -algebra_adjoint(xi)
    out = np.eye(6)
    term = np.eye(6)
    for k in range(1, 120):
        term = term @ a / (k + 1)
        out = out + term
        if np.abs(term).max() < 1e-18 * max(1.0, np.abs(out).max()):
            break
    return out


def log_se3_with_jacobian(m: Placement) -> tuple[Twist, np.ndarray]:
    """Logarithm and the 6x6 map from right perturbations of m to d(log).

    log(m * exp(d)) ~ log(m) + Jlog d, so Jlog is the inverse of the right
    Jacobian of exp evaluated at log(m).
    """
    xi = log_se3(m)
    jlog = np.linalg.inv(right_jacobian_se3(xi))
    return xi, jlog


def adjoint(m: Placement) -> np.ndarray:
    """Twist coordinate change: (w,v) in B -> (w,v) in A for m = aMb."""
    r = m.rotation.as_matrix()
    out = np.zeros((6, 6))
    out[:3, :3] = r
    out[3:, 3:] = r
    out[3:, :3] = skew(m.translation) @ r
    return out


def numerical_rank(matrix, tol: float) -> int:
    """Count singular values above tol * sigma_max. Zero matrices rank 0."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    m = np.asarray(matrix, dtype=float)
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def singular_values(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def min_eigenvalue(sym_matrix) -> float:
    """Smallest eigenvalue of a symmetric matrix (0x0 counts as +inf)."""
    m = np.asarray(sym_matrix, dtype=float)
    if m.size == 0:
        return math.inf
    return float(np.linalg.eigvalsh(m)[0])
