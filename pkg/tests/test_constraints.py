"""Closure residuals, constraint Jacobians, acceleration bias, projection,
and mobility counting, checked against finite differences and hand oracles."""

import dataclasses
import math

import numpy as np
import pytest

from xurdf.constraints import (
    MobilityReport,
    ProjectOptions,
    acceleration_bias,
    jacobian,
    mobility_report,
    project,
    residual,
    residual_rows,
    residual_slices,
)
from xurdf.errors import ClosureAngleError, ProjectionError
from xurdf.kinematics import forward_kinematics, integrate, neutral
from xurdf.model import ClosureModel, FrameModel, JointKind, JointModel
from xurdf.se3 import Placement, Rotation

from conftest import make_model, random_config, random_model, random_placement


def T(x, y, z):
    return Placement(Rotation.identity(), (float(x), float(y), float(z)))


def four_bar(ctype="3D"):
    # parallelogram: ground pivots at (0,0,0) and (1,0,0), all links length 1,
    # neutral pose closed with both tips at (1,1,0)
    joints = [
        JointModel("root", JointKind.FIXED, -1, Placement.identity()),
        JointModel("crank", JointKind.REVOLUTE, 0, Placement.identity(), (0.0, 0.0, 1.0)),
        JointModel("coupler", JointKind.REVOLUTE, 1, T(0, 1, 0), (0.0, 0.0, 1.0)),
        JointModel("rocker", JointKind.REVOLUTE, 0, T(1, 0, 0), (0.0, 0.0, 1.0)),
    ]
    frames = (FrameModel("tip_c", 2, T(1, 0, 0)), FrameModel("tip_r", 3, T(0, 1, 0)))
    closures = (ClosureModel("loop", ctype, 0, 1),)
    return make_model(joints, frames=frames, closures=closures, actuated=(1,))


def with_closures(model, closures):
    return dataclasses.replace(model, closures=tuple(closures))


def fd_constraint_jacobian(model, q, eps=1e-6):
    jac = np.zeros((residual_rows(model), model.n_v))
    for k in range(model.n_v):
        e = np.zeros(model.n_v)
        e[k] = 1.0
        rp = residual(model, forward_kinematics(model, integrate(model, q, e, eps)))
        rm = residual(model, forward_kinematics(model, integrate(model, q, e, -eps)))
        jac[:, k] = (rp.values - rm.values) / (2 * eps)
    return jac


def closure_angles(model, cache):
    angles = []
    for c in model.closures:
        if c.ctype != "6D":
            continue
        ma = cache.frame_placements[c.frame_a]
        mb = cache.frame_placements[c.frame_b]
        angles.append(ma.inverse().compose(mb).rotation.angle())
    return angles


def random_closed_model(rng, n_joints=6):
    model = random_model(rng, n_joints)
    n = len(model.frames)
    pairs = rng.choice(n, size=4, replace=False)
    return with_closures(model, (
        ClosureModel("c3", "3D", int(pairs[0]), int(pairs[1])),
        ClosureModel("c6", "6D", int(pairs[2]), int(pairs[3])),
    ))


def safe_config(rng, model):
    # keep 6D closure angles away from the log branch point
    for _ in range(100):
        q = random_config(rng, model)
        cache = forward_kinematics(model, q)
        if all(a < math.pi - 0.2 for a in closure_angles(model, cache)):
            return q
    raise AssertionError("could not draw a configuration away from pi")


class TestResidual:
    def test_four_bar_neutral_is_closed(self):
        for ctype in ("3D", "6D"):
            model = four_bar(ctype)
            res = residual(model, forward_kinematics(model, neutral(model)))
            assert res.values.shape == (3 if ctype == "3D" else 6,)
            assert res.inf_norm < 1e-15

    def test_three_d_values(self):
        model = four_bar("3D")
        q = np.array([0.3, 0.0, 0.0])
        cache = forward_kinematics(model, q)
        res = residual(model, cache)
        pa = np.array(cache.frame_placements[0].translation)
        pb = np.array(cache.frame_placements[1].translation)
        assert res.values == pytest.approx(pb - pa)
        assert res.inf_norm == pytest.approx(np.abs(pb - pa).max())

    def test_six_d_log_of_relative_placement(self, rng):
        model = four_bar("6D")
        q = np.array([0.4, -0.2, 0.3])
        cache = forward_kinematics(model, q)
        res = residual(model, cache)
        ma = cache.frame_placements[0]
        mb = cache.frame_placements[1]
        rel = ma.inverse().compose(mb)
        from xurdf.se3 import log_se3
        assert res.values == pytest.approx(log_se3(rel).as_array())

    def test_slices_and_blocks(self, rng):
        model = random_closed_model(rng)
        assert residual_rows(model) == 9
        assert residual_slices(model) == (("c3", slice(0, 3)), ("c6", slice(3, 9)))
        q = safe_config(rng, model)
        res = residual(model, forward_kinematics(model, q))
        assert res.block("c6") == pytest.approx(res.values[3:9])
        with pytest.raises(KeyError):
            res.block("nope")

    def test_no_closures(self, rng):
        model = random_model(rng, 3)
        res = residual(model, forward_kinematics(model, neutral(model)))
        assert res.values.shape == (0,)
        assert res.inf_norm == 0.0

    def test_angle_near_pi_rejected(self):
        joints = [
            JointModel("root", JointKind.FIXED, -1, Placement.identity()),
            JointModel("hinge", JointKind.REVOLUTE, 0, Placement.identity(), (0.0, 0.0, 1.0)),
        ]
        frames = (FrameModel("fa", 0, Placement.identity()),
                  FrameModel("fb", 1, Placement.identity()))
        model = make_model(joints, frames=frames,
                           closures=(ClosureModel("flip", "6D", 0, 1),))
        cache = forward_kinematics(model, np.array([math.pi]))
        with pytest.raises(ClosureAngleError) as exc:
            residual(model, cache)
        assert exc.value.code == "AngleNearPi"
        assert exc.value.subject == "flip"
        with pytest.raises(ClosureAngleError):
            jacobian(model, cache)

    def test_world_offset_equivariance(self, rng):
        # moving the whole assembly leaves 6D rows unchanged and rotates 3D rows
        model = random_closed_model(rng)
        q = safe_config(rng, model)
        base = residual(model, forward_kinematics(model, q))

        t = random_placement(rng)
        moved_joints = (dataclasses.replace(model.joints[0], placement=t),) \
            + model.joints[1:]
        moved = dataclasses.replace(model, joints=moved_joints)
        shifted = residual(moved, forward_kinematics(moved, q))

        assert shifted.block("c6") == pytest.approx(base.block("c6"), abs=1e-12)
        r = t.rotation.as_matrix()
        assert shifted.block("c3") == pytest.approx(r @ base.block("c3"), abs=1e-12)


class TestJacobian:
    def test_four_bar_hand_structure(self):
        model = four_bar("3D")
        jac = jacobian(model, forward_kinematics(model, neutral(model)))
        # residual is tip_r minus tip_c with both tips at (1,1,0): crank and
        # coupler columns enter negated, the rocker column directly
        assert jac[:, 0] == pytest.approx([1.0, -1.0, 0.0])
        assert jac[:, 1] == pytest.approx([0.0, -1.0, 0.0])
        assert jac[:, 2] == pytest.approx([-1.0, 0.0, 0.0])
        assert np.linalg.matrix_rank(jac) == 2

    def test_matches_finite_differences_four_bar(self, rng):
        for ctype in ("3D", "6D"):
            model = four_bar(ctype)
            for _ in range(5):
                q = random_config(rng, model)
                jac = jacobian(model, forward_kinematics(model, q))
                ref = fd_constraint_jacobian(model, q)
                assert np.abs(jac - ref).max() < 1e-6

    def test_matches_finite_differences_random_models(self, rng):
        worst = 0.0
        for _ in range(20):
            model = random_closed_model(rng)
            q = safe_config(rng, model)
            jac = jacobian(model, forward_kinematics(model, q))
            ref = fd_constraint_jacobian(model, q)
            worst = max(worst, np.abs(jac - ref).max())
        assert worst < 1e-6

    def test_rows_match_residual_rows(self, rng):
        model = random_closed_model(rng)
        q = safe_config(rng, model)
        jac = jacobian(model, forward_kinematics(model, q))
        assert jac.shape == (9, model.n_v)


class TestAccelerationBias:
    def test_centripetal_oracle(self):
        # point at radius 0.5 spinning at 1 rad/s: |k| = w^2 r
        joints = [
            JointModel("root", JointKind.FIXED, -1, Placement.identity()),
            JointModel("spin", JointKind.REVOLUTE, 0, Placement.identity(), (0.0, 0.0, 1.0)),
        ]
        frames = (FrameModel("anchor", 0, T(0.5, 0, 0)),
                  FrameModel("tip", 1, T(0.5, 0, 0)))
        model = make_model(joints, frames=frames,
                           closures=(ClosureModel("pin", "3D", 0, 1),))
        k = acceleration_bias(model, neutral(model), np.array([1.0]))
        assert k == pytest.approx([0.5, 0.0, 0.0], abs=1e-6)
        assert np.linalg.norm(k) == pytest.approx(0.5, abs=1e-6)

    def test_zero_velocity(self, rng):
        model = random_closed_model(rng)
        q = safe_config(rng, model)
        assert acceleration_bias(model, q, np.zeros(model.n_v)) == pytest.approx(0.0)

    def test_matches_second_difference(self, rng):
        model = four_bar("3D")
        q = np.array([0.3, -0.2, 0.4])
        v = np.array([0.7, -0.4, 0.9])
        k = acceleration_bias(model, q, v)
        dt = 1e-4
        phi = lambda s: residual(model, forward_kinematics(
            model, integrate(model, q, v, s))).values
        acc = (phi(dt) - 2 * phi(0.0) + phi(-dt)) / dt ** 2
        assert k == pytest.approx(-acc, abs=1e-5)

    def test_taylor_order(self):
        # residual along a constant-velocity ray matches the quadratic model
        # to third order: halving dt divides the defect by about eight
        model = four_bar("3D")
        q = np.array([0.3, -0.2, 0.4])
        v = np.array([0.7, -0.4, 0.9])
        cache = forward_kinematics(model, q)
        phi0 = residual(model, cache).values
        kv = jacobian(model, cache) @ v
        k = acceleration_bias(model, q, v)

        def defect(dt):
            phi = residual(model, forward_kinematics(
                model, integrate(model, q, v, dt))).values
            return np.abs(phi - phi0 - kv * dt + 0.5 * k * dt ** 2).max()

        e1, e2 = defect(2e-2), defect(1e-2)
        assert e2 < e1
        assert e1 / e2 == pytest.approx(8.0, rel=0.25)


class TestProject:
    def test_already_on_manifold(self):
        model = four_bar("3D")
        q0 = neutral(model)
        q, stats = project(model, q0)
        assert stats.iterations == 0
        assert np.array_equal(q, q0)
        assert len(stats.norm_history) == 1

    def test_converges_from_perturbation(self):
        model = four_bar("3D")
        q0 = neutral(model) + np.array([0.25, -0.2, 0.15])
        q, stats = project(model, q0)
        assert stats.final_norm < 1e-8
        res = residual(model, forward_kinematics(model, q))
        assert res.inf_norm < 1e-8
        assert stats.iterations <= 50
        hist = np.array(stats.norm_history)
        assert np.all(np.diff(hist) < 0)

    def test_batch_of_perturbations(self, rng):
        model = four_bar("3D")
        for _ in range(20):
            q0 = neutral(model) + rng.uniform(-0.1, 0.1, model.n_v)
            q, stats = project(model, q0)
            assert stats.final_norm < 1e-8
            assert stats.iterations <= 50

    def test_six_d_loop(self, rng):
        model = four_bar("6D")
        q0 = neutral(model) + rng.uniform(-0.05, 0.05, model.n_v)
        q, stats = project(model, q0)
        assert residual(model, forward_kinematics(model, q)).inf_norm < 1e-8

    def test_infeasible_raises_with_stats(self):
        # both closure frames ride the same body: the gap cannot close
        joints = [
            JointModel("root", JointKind.FIXED, -1, Placement.identity()),
            JointModel("hinge", JointKind.REVOLUTE, 0, Placement.identity(), (0.0, 0.0, 1.0)),
        ]
        frames = (FrameModel("fa", 1, Placement.identity()),
                  FrameModel("fb", 1, T(1, 0, 0)))
        model = make_model(joints, frames=frames,
                           closures=(ClosureModel("stuck", "3D", 0, 1),))
        with pytest.raises(ProjectionError) as exc:
            project(model, neutral(model), ProjectOptions(max_iters=8))
        err = exc.value
        assert err.code == "MaxIterations"
        assert err.stats.iterations == 8
        assert err.final_norm == pytest.approx(1.0)
        assert err.stats.norm_history == (1.0,)

    def test_custom_tolerance(self):
        model = four_bar("3D")
        q0 = neutral(model) + np.array([0.25, -0.2, 0.15])
        q, stats = project(model, q0, ProjectOptions(tol=1e-3))
        loose = residual(model, forward_kinematics(model, q)).inf_norm
        assert loose < 1e-3
        assert stats.final_norm < 1e-3


class TestMobility:
    def test_four_bar_counts(self):
        report = mobility_report(four_bar("3D"))
        assert isinstance(report, MobilityReport)
        assert (report.n_q, report.n_v) == (3, 3)
        assert report.constraint_rows == 3
        assert report.rank == 2
        assert report.n_actuated == 1
        assert report.internal_mobilities == 0
        assert report.net_dof == 1
        assert report.residual_inf < 1e-12
        assert report.warnings == ()

    def test_welded_four_bar_is_immobile(self):
        report = mobility_report(four_bar("6D"))
        assert report.constraint_rows == 6
        assert report.rank == 3
        assert report.net_dof == 0

    def test_open_chain(self, rng):
        model = random_model(rng, 4)
        report = mobility_report(model)
        assert report.constraint_rows == 0
        assert report.rank == 0
        assert report.net_dof == model.n_v

    def test_off_manifold_warning(self):
        model = four_bar("3D")
        report = mobility_report(model, np.array([0.4, 0.0, 0.0]))
        assert [w.code for w in report.warnings] == ["OffManifold"]
        assert report.residual_inf > 1e-6

    def test_rank_marginal_warning(self):
        # two nearly parallel slide axes leave one singular value barely
        # above the rank cutoff
        tilt = np.array([1.0, 1e-7, 0.0])
        tilt /= np.linalg.norm(tilt)
        joints = [
            JointModel("root", JointKind.FIXED, -1, Placement.identity()),
            JointModel("p1", JointKind.PRISMATIC, 0, Placement.identity(), (1.0, 0.0, 0.0)),
            JointModel("p2", JointKind.PRISMATIC, 1, Placement.identity(), tuple(tilt)),
        ]
        frames = (FrameModel("anchor", 0, Placement.identity()),
                  FrameModel("tip", 2, Placement.identity()))
        model = make_model(joints, frames=frames,
                           closures=(ClosureModel("tie", "3D", 0, 1),))
        report = mobility_report(model)
        assert report.rank == 2
        assert "RankMarginal" in [w.code for w in report.warnings]

    def test_as_dict_round_trip(self):
        report = mobility_report(four_bar("3D"))
        d = report.as_dict()
        assert d["n_v"] == 3 and d["rank"] == 2 and d["net_dof"] == 1
        assert d["warnings"] == []
