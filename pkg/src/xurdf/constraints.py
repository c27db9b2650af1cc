"""Loop-closure residuals, their Jacobians, projection onto the closure
manifold, and the mobility report.

A 6D closure contributes the log of the relative placement between its two
frames (angular rows first); a 3D closure contributes the world-frame
difference of the frame origins. Rows stack in closure declaration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClosureAngleError, ProjectionError
from .kinematics import (
    KinematicsCache,
    check_configuration,
    forward_kinematics,
    frame_jacobian,
    integrate,
    neutral,
)
from .model import RobotModel, ValidationFinding
from .se3 import adjoint, log_se3, log_se3_with_jacobian, numerical_rank
from .errors import AngleNearPiError

ROWS = {"3D": 3, "6D": 6}


def residual_rows(model: RobotModel) -> int:
    return sum(ROWS[c.ctype] for c in model.closures)


def residual_slices(model: RobotModel) -> tuple[tuple[str, slice], ...]:
    out = []
    at = 0
    for c in model.closures:
        out.append((c.name, slice(at, at + ROWS[c.ctype])))
        at += ROWS[c.ctype]
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ConstraintResidual:
    values: np.ndarray
    slices: tuple[tuple[str, slice], ...]

    @property
    def inf_norm(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0

    def block(self, name: str) -> np.ndarray:
        for n, s in self.slices:
            if n == name:
                return self.values[s]
        raise KeyError(name)


def residual(model: RobotModel, cache: KinematicsCache) -> ConstraintResidual:
    """Stacked closure violation at the cached configuration."""
    values = np.zeros(residual_rows(model))
    at = 0
    for c in model.closures:
        ma = cache.frame_placements[c.frame_a]
        mb = cache.frame_placements[c.frame_b]
        if c.ctype == "6D":
            rel = ma.inverse().compose(mb)
            try:
                values[at:at + 6] = log_se3(rel).as_array()
            except AngleNearPiError as exc:
                raise ClosureAngleError(c.name, exc.angle) from None
            at += 6
        else:
            pa, pb = ma.translation, mb.translation
            values[at:at + 3] = (pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2])
            at += 3
    return ConstraintResidual(values, residual_slices(model))


def _body_jacobian(model, cache, frame: int) -> np.ndarray:
    jac = frame_jacobian(model, cache, frame)
    r = cache.frame_placements[frame].rotation.as_matrix().T
    out = np.empty_like(jac)
    out[:3] = r @ jac[:3]
    out[3:] = r @ jac[3:]
    return out


def jacobian(model: RobotModel, cache: KinematicsCache) -> np.ndarray:
    """Derivative of the stacked residual along the configuration tangent."""
    out = np.zeros((residual_rows(model), model.n_v))
    at = 0
    for c in model.closures:
        if c.ctype == "6D":
            ma = cache.frame_placements[c.frame_a]
            mb = cache.frame_placements[c.frame_b]
            rel = ma.inverse().compose(mb)
            try:
                _, jlog = log_se3_with_jacobian(rel)
            except AngleNearPiError as exc:
                raise ClosureAngleError(c.name, exc.angle) from None
            ja = _body_jacobian(model, cache, c.frame_a)
            jb = _body_jacobian(model, cache, c.frame_b)
            out[at:at + 6] = jlog @ (jb - adjoint(rel.inverse()) @ ja)
            at += 6
        else:
            ja = frame_jacobian(model, cache, c.frame_a)
            jb = frame_jacobian(model, cache, c.frame_b)
            out[at:at + 3] = jb[3:] - ja[3:]
            at += 3
    return out


def acceleration_bias(model: RobotModel, q, v, eps: float = 1e-6) -> np.ndarray:
    """k(q, v) with phi_dd = K vdot - k, i.e. minus the Jacobian drift K' v."""
    q = check_configuration(model, q)
    v = np.asarray(v, dtype=float)
    kp = jacobian(model, forward_kinematics(model, integrate(model, q, v, eps)))
    km = jacobian(model, forward_kinematics(model, integrate(model, q, v, -eps)))
    return -((kp - km) / (2.0 * eps)) @ v


@dataclass(frozen=True)
class ProjectOptions:
    tol: float = 1e-8  # stop when the residual inf-norm falls below this
    max_iters: int = 100
    damping: float = 1e-6  # initial Levenberg-Marquardt parameter


@dataclass(frozen=True)
class ProjectionStats:
    iterations: int
    final_norm: float  # inf-norm at exit
    norm_history: tuple[float, ...]  # accepted 2-norms, initial point first


def project(model: RobotModel, q,
            options: ProjectOptions = ProjectOptions()) -> tuple[np.ndarray, ProjectionStats]:
    """Pull a configuration onto the closure manifold by damped least squares.

    Steps that do not reduce the residual 2-norm are rejected and retried
    with ten times the damping; accepted steps divide it by ten. Raises
    ProjectionError when max_iters steps were spent without reaching tol.
    """
    q = check_configuration(model, q).copy()
    res = residual(model, forward_kinematics(model, q))
    norm2 = float(np.linalg.norm(res.values))
    history = [norm2]
    if res.inf_norm < options.tol:
        return q, ProjectionStats(0, res.inf_norm, tuple(history))

    lam = options.damping
    eye = np.eye(model.n_v)
    jac = jacobian(model, forward_kinematics(model, q))
    for it in range(1, options.max_iters + 1):
        gram = jac.T @ jac + lam * eye
        step = -np.linalg.solve(gram, jac.T @ res.values)
        q_try = integrate(model, q, step)
        res_try = residual(model, forward_kinematics(model, q_try))
        norm_try = float(np.linalg.norm(res_try.values))
        if norm_try < norm2:
            q, res, norm2 = q_try, res_try, norm_try
            history.append(norm2)
            lam = max(lam / 10.0, 1e-15)
            if res.inf_norm < options.tol:
                return q, ProjectionStats(it, res.inf_norm, tuple(history))
            jac = jacobian(model, forward_kinematics(model, q))
        else:
            lam *= 10.0
    stats = ProjectionStats(options.max_iters, res.inf_norm, tuple(history))
    raise ProjectionError(
        f"projection did not reach {options.tol:g} within {options.max_iters} "
        f"steps (residual {res.inf_norm:.3e})", res.inf_norm, stats)


_RANK_TOL = 1e-8
_MARGIN = 100.0
_ON_MANIFOLD = 1e-6


@dataclass(frozen=True)
class MobilityReport:
    n_q: int
    n_v: int
    constraint_rows: int
    rank: int
    n_actuated: int
    internal_mobilities: int  # tangent directions neither constrained nor driven
    net_dof: int  # n_v - rank
    residual_inf: float
    warnings: tuple[ValidationFinding, ...] = ()

    def as_dict(self) -> dict:
        return {
            "n_q": self.n_q,
            "n_v": self.n_v,
            "constraint_rows": self.constraint_rows,
            "rank": self.rank,
            "n_actuated": self.n_actuated,
            "internal_mobilities": self.internal_mobilities,
            "net_dof": self.net_dof,
            "residual_inf": self.residual_inf,
            "warnings": [
                {"code": w.code, "subject": w.subject, "message": w.message}
                for w in self.warnings
            ],
        }


def mobility_report(model: RobotModel, q=None) -> MobilityReport:
    """Count effective degrees of freedom at a configuration (neutral when
    omitted): net_dof = n_v - rank(K), and whatever the actuators do not
    cover is reported as internal mobility."""
    q = neutral(model) if q is None else check_configuration(model, q)
    cache = forward_kinematics(model, q)
    res = residual(model, cache)
    jac = jacobian(model, cache)
    rank = numerical_rank(jac, _RANK_TOL)

    warnings: list[ValidationFinding] = []
    if res.inf_norm > _ON_MANIFOLD:
        warnings.append(ValidationFinding(
            "OffManifold", "warning", "configuration",
            f"closure residual {res.inf_norm:.3e} exceeds {_ON_MANIFOLD:g}; "
            f"counts taken away from the constraint manifold are unreliable"))
    if rank and jac.size:
        sv = np.linalg.svd(jac, compute_uv=False)
        cutoff = _RANK_TOL * sv[0]
        smallest_kept = sv[rank - 1]
        if smallest_kept < _MARGIN * cutoff:
            warnings.append(ValidationFinding(
                "RankMarginal", "warning", "constraints",
                f"smallest retained singular value {smallest_kept:.3e} sits "
                f"within a factor {_MARGIN:g} of the rank cutoff"))

    return MobilityReport(
        model.n_q, model.n_v, residual_rows(model), rank, model.n_actuated,
        model.n_v - rank - model.n_actuated, model.n_v - rank,
        res.inf_norm, tuple(warnings))
