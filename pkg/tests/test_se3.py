"""Rotation/Placement/Twist kernels checked against scipy and hand values."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, logm
from scipy.spatial.transform import Rotation as ScipyRot

from xurdf import (
    AngleNearPiError,
    Placement,
    Rotation,
    Twist,
    adjoint,
    exp_se3,
    log_se3,
    log_se3_with_jacobian,
    min_eigenvalue,
    numerical_rank,
    right_jacobian_se3,
    skew,
)


def hat4(xi: Twist) -> np.ndarray:
    m = np.zeros((4, 4))
    m[:3, :3] = skew(xi.angular)
    m[:3, 3] = xi.linear
    return m


rotvecs = st.tuples(
    st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0)
).map(lambda v: np.array(v)).filter(
    lambda v: np.linalg.norm(v) > 1e-12
).map(
    lambda v: tuple(v / np.linalg.norm(v) * min(np.linalg.norm(v) * 3.0, math.pi - 0.01))
)

vecs3 = st.tuples(st.floats(-10.0, 10.0), st.floats(-10.0, 10.0), st.floats(-10.0, 10.0))


class TestRotation:
    def test_canonical_hemisphere(self):
        r = Rotation.from_quaternion(-1.0, 0.0, 0.0, 0.0)
        assert r.w == 1.0
        r = Rotation.from_quaternion(0.0, -1.0, 0.0, 0.0)
        assert r.x == 1.0
        r = Rotation.from_quaternion(0.0, 0.0, 0.0, -1.0)
        assert r.z == 1.0

    def test_normalizes(self):
        r = Rotation.from_quaternion(2.0, 0.0, 0.0, 0.0)
        assert r.w == 1.0

    def test_rejects_zero_quaternion(self):
        with pytest.raises(ValueError):
            Rotation.from_quaternion(0.0, 0.0, 0.0, 0.0)

    def test_axis_angle_z90(self):
        r = Rotation.from_axis_angle((0, 0, 1), math.pi / 2)
        assert r.rotate((1.0, 0.0, 0.0)) == pytest.approx((0.0, 1.0, 0.0))

    def test_rpy_matches_scipy_extrinsic_xyz(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            rpy = rng.uniform(-math.pi, math.pi, 3)
            ours = Rotation.from_rpy(*rpy).as_matrix()
            ref = ScipyRot.from_euler("xyz", rpy).as_matrix()
            assert np.allclose(ours, ref, atol=1e-12)

    @given(rotvecs)
    @settings(max_examples=50, deadline=None)
    def test_exp_log_round_trip(self, v):
        assert Rotation.exp(v).log() == pytest.approx(v, abs=1e-10)

    @given(rotvecs)
    @settings(max_examples=50, deadline=None)
    def test_matrix_round_trip(self, v):
        r = Rotation.exp(v)
        r2 = Rotation.from_matrix(r.as_matrix())
        assert r.approx_eq(r2, 1e-10)

    @given(rotvecs)
    @settings(max_examples=50, deadline=None)
    def test_rpy_round_trip(self, v):
        r = Rotation.exp(v)
        r2 = Rotation.from_rpy(*r.as_rpy())
        assert r.approx_eq(r2, 1e-9)

    @given(rotvecs, vecs3)
    @settings(max_examples=50, deadline=None)
    def test_rotate_matches_matrix(self, v, p):
        r = Rotation.exp(v)
        assert np.allclose(r.rotate(p), r.as_matrix() @ p, atol=1e-12)

    @given(rotvecs, rotvecs)
    @settings(max_examples=50, deadline=None)
    def test_compose_matches_matrix_product(self, a, b):
        ra, rb = Rotation.exp(a), Rotation.exp(b)
        assert np.allclose(ra.compose(rb).as_matrix(), ra.as_matrix() @ rb.as_matrix(), atol=1e-12)

    def test_inverse(self):
        r = Rotation.from_rpy(0.3, -0.2, 0.9)
        assert r.compose(r.inverse()).approx_eq(Rotation.identity(), 1e-15)

    def test_log_rejects_near_pi(self):
        r = Rotation.from_axis_angle((1, 0, 0), math.pi - 1e-9)
        with pytest.raises(AngleNearPiError):
            r.log()

    def test_log_small_angle(self):
        v = (1e-10, -2e-10, 3e-10)
        assert Rotation.exp(v).log() == pytest.approx(v, rel=1e-6, abs=1e-18)

    def test_composition_drift_stays_unit(self):
        # long products must not drift off the unit sphere
        step = Rotation.from_axis_angle((0.3, 0.5, 0.81), 0.01)
        r = Rotation.identity()
        for _ in range(100_000):
            r = r.compose(step)
        n = math.sqrt(r.w ** 2 + r.x ** 2 + r.y ** 2 + r.z ** 2)
        assert abs(n - 1.0) < 1e-12


class TestPlacement:
    def test_compose_oracle(self):
        a = Placement.from_parts(Rotation.from_axis_angle((0, 0, 1), math.pi / 2), (1, 0, 0))
        b = Placement.from_parts(Rotation.identity(), (1, 0, 0))
        c = a.compose(b)
        assert c.translation == pytest.approx((1.0, 1.0, 0.0))
        assert c.rotation.approx_eq(a.rotation, 1e-15)

    def test_action_associativity(self):
        a = Placement.from_xyz_rpy((0.1, 0.2, 0.3), (0.4, 0.5, 0.6))
        b = Placement.from_xyz_rpy((-1.0, 0.5, 2.0), (-0.3, 0.1, 1.2))
        p = (0.7, -0.8, 0.9)
        assert a.compose(b).act(p) == pytest.approx(a.act(b.act(p)))

    def test_inverse(self):
        a = Placement.from_xyz_rpy((0.1, 0.2, 0.3), (0.4, 0.5, 0.6))
        assert a.compose(a.inverse()).approx_eq(Placement.identity(), 1e-14)

    @given(rotvecs, vecs3)
    @settings(max_examples=50, deadline=None)
    def test_matrix_round_trip(self, v, t):
        m = Placement.from_parts(Rotation.exp(v), t)
        assert m.approx_eq(Placement.from_matrix(m.as_matrix()), 1e-9)


class TestExpLog:
    def test_log_frozen_value(self):
        # quarter turn about z with unit x offset
        m = Placement.from_parts(Rotation.from_axis_angle((0, 0, 1), math.pi / 2), (1, 0, 0))
        xi = log_se3(m)
        assert xi.angular == pytest.approx((0.0, 0.0, math.pi / 2))
        assert xi.linear == pytest.approx((math.pi / 4, -math.pi / 4, 0.0))

    @given(rotvecs, vecs3)
    @settings(max_examples=50, deadline=None)
    def test_matches_matrix_exponential(self, w, v):
        xi = Twist(w, v)
        ours = exp_se3(xi).as_matrix()
        ref = expm(hat4(xi))
        assert np.allclose(ours, ref, atol=1e-10)

    @given(rotvecs, vecs3)
    @settings(max_examples=50, deadline=None)
    def test_log_matches_matrix_logarithm(self, w, v):
        m = Placement.from_parts(Rotation.exp(w), v)
        xi = log_se3(m)
        ref = logm(m.as_matrix())
        assert np.allclose(skew(xi.angular), ref[:3, :3], atol=1e-8)
        assert np.allclose(xi.linear, ref[:3, 3], atol=1e-8)

    @given(rotvecs, vecs3)
    @settings(max_examples=50, deadline=None)
    def test_round_trip(self, w, v):
        m = Placement.from_parts(Rotation.exp(w), v)
        assert exp_se3(log_se3(m)).approx_eq(m, 1e-9)

    def test_pure_translation(self):
        xi = Twist((0, 0, 0), (1.0, -2.0, 3.0))
        m = exp_se3(xi)
        assert m.translation == pytest.approx((1.0, -2.0, 3.0))
        assert log_se3(m).linear == pytest.approx((1.0, -2.0, 3.0))

    def test_log_rejects_near_pi(self):
        m = Placement.from_parts(Rotation.from_axis_angle((0, 1, 0), math.pi), (0.1, 0, 0))
        with pytest.raises(AngleNearPiError) as exc:
            log_se3(m)
        assert exc.value.code == "AngleNearPi"


class TestJacobians:
    @given(rotvecs, vecs3)
    @settings(max_examples=30, deadline=None)
    def test_right_jacobian_finite_difference(self, w, v):
        # exp(xi + d) ~ exp(xi) exp(Jr d)
        xi = Twist(w, v)
        jr = right_jacobian_se3(xi)
        base = exp_se3(xi)
        eps = 1e-7
        for k in range(6):
            d = np.zeros(6)
            d[k] = eps
            shifted = exp_se3(Twist.from_array(xi.as_array() + d))
            fd = log_se3(base.inverse().compose(shifted)).as_array() / eps
            assert np.allclose(fd, jr[:, k], atol=1e-5)

    @given(rotvecs, vecs3)
    @settings(max_examples=30, deadline=None)
    def test_log_jacobian_finite_difference(self, w, v):
        # log(m exp(d)) ~ log(m) + Jlog d
        m = Placement.from_parts(Rotation.exp(w), v)
        xi, jlog = log_se3_with_jacobian(m)
        eps = 1e-7
        for k in range(6):
            d = np.zeros(6)
            d[k] = eps
            fd = (log_se3(m.compose(exp_se3(Twist.from_array(d)))).as_array()
                  - xi.as_array()) / eps
            assert np.allclose(fd, jlog[:, k], atol=1e-5)

    def test_jacobian_identity_at_zero(self):
        assert np.allclose(right_jacobian_se3(Twist.zero()), np.eye(6))


class TestAdjoint:
    @given(rotvecs, vecs3, rotvecs, vecs3)
    @settings(max_examples=30, deadline=None)
    def test_matches_matrix_conjugation(self, w, t, xw, xv):
        m = Placement.from_parts(Rotation.exp(w), t)
        xi = Twist(xw, xv)
        mapped = adjoint(m) @ xi.as_array()
        ref = m.as_matrix() @ hat4(xi) @ m.inverse().as_matrix()
        assert np.allclose(skew(mapped[:3]), ref[:3, :3], atol=1e-10)
        assert np.allclose(mapped[3:], ref[:3, 3], atol=1e-9)

    def test_inverse_adjoint(self):
        m = Placement.from_xyz_rpy((1, 2, 3), (0.1, 0.2, 0.3))
        assert np.allclose(adjoint(m) @ adjoint(m.inverse()), np.eye(6), atol=1e-12)


class TestLinearAlgebra:
    def test_rank_of_rank_deficient(self):
        assert numerical_rank([[1.0, 1.0], [1.0, 1.0]], 1e-8) == 1

    def test_rank_full(self):
        assert numerical_rank(np.eye(5), 1e-8) == 5

    def test_rank_zero_matrix(self):
        assert numerical_rank(np.zeros((3, 4)), 1e-8) == 0

    def test_rank_empty(self):
        assert numerical_rank(np.zeros((0, 6)), 1e-8) == 0

    def test_rank_relative_threshold(self):
        # second value 1e-9 of the largest: below a 1e-8 relative cut
        m = np.diag([1.0, 1e-9])
        assert numerical_rank(m, 1e-8) == 1
        assert numerical_rank(m, 1e-10) == 2

    def test_min_eigenvalue(self):
        m = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert min_eigenvalue(m) == pytest.approx(1.0)

    def test_skew_antisymmetry(self):
        s = skew((1.0, 2.0, 3.0))
        assert np.allclose(s, -s.T)
        assert np.allclose(s @ [1.0, 2.0, 3.0], 0.0)
