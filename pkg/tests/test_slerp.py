import numpy as np
import pytest
from hypothesis import assume, given

from qkin import quat, so3, slerp
from qkin.quat import DomainError
from strategies import fractions, unit_quaternions, vectors

METHODS = [slerp.slerp_geodesic, slerp.slerp_trig, slerp.slerp_davis]


def test_quarter_turn_midpoint():
    q1 = quat.from_rotvec([0, 0, np.pi / 2])
    expected = quat.from_rotvec([0, 0, np.pi / 4])
    for fn in METHODS:
        np.testing.assert_allclose(fn(quat.identity(), q1, 0.5), expected, atol=1e-15)


@given(unit_quaternions(), unit_quaternions())
def test_endpoints(q0, q1):
    q0s, q1s = slerp.shortest_path(q0, q1)
    for fn in METHODS:
        assert np.max(np.abs(fn(q0, q1, 0.0) - q0s)) <= 1e-12
        assert np.max(np.abs(fn(q0, q1, 1.0) - q1s)) <= 1e-12


@given(unit_quaternions(), unit_quaternions(), fractions)
def test_methods_agree(q0, q1, t):
    a, b, c = (fn(q0, q1, t) for fn in METHODS)
    assert np.max(np.abs(a - b)) <= 1e-10
    assert np.max(np.abs(b - c)) <= 1e-10
    assert abs(quat.norm(a) - 1.0) <= 1e-9


@given(unit_quaternions(), unit_quaternions(), fractions)
def test_davis_is_symmetric(q0, q1, t):
    q0, q1 = slerp.shortest_path(q0, q1)
    np.testing.assert_allclose(slerp.slerp_davis(q0, q1, t), slerp.slerp_davis(q1, q0, 1.0 - t), atol=1e-12)


def test_degenerate_pair_falls_back_to_nlerp():
    q = quat.unit([0.3, 0.2, -0.4, 0.8])
    for fn in METHODS:
        np.testing.assert_allclose(fn(q, q, 0.5), q, atol=1e-15)


@given(unit_quaternions(), unit_quaternions())
def test_constant_angular_speed(q0, q1):
    ts = np.linspace(0.0, 1.0, 9)
    qs = [slerp.slerp_geodesic(q0, q1, t) for t in ts]
    steps = [np.linalg.norm(so3.ominus(b, a)) for a, b in zip(qs[:-1], qs[1:])]
    assert np.ptp(steps) <= 1e-9


def test_shortest_path_policy():
    q0 = quat.unit([1.0, 0.1, 0.0, 0.0])
    q1 = quat.unit([0.9, 0.0, 0.3, 0.0])
    a, b = slerp.shortest_path(q0, q1)
    np.testing.assert_array_equal(b, q1)
    a, b = slerp.shortest_path(q0, -q1)
    np.testing.assert_array_equal(b, q1)
    x = np.array([0.3, 1.0, -0.5])
    np.testing.assert_array_equal(quat.rotate(-q1, x), quat.rotate(q1, x))
    # an exactly orthogonal pair is left alone
    ortho = np.array([0.0, 0.0, 0.0, 1.0])
    _, b = slerp.shortest_path(np.array([1.0, 0, 0, 0]), ortho)
    np.testing.assert_array_equal(b, ortho)


def test_long_way_round_without_shortest_path():
    q0 = quat.identity()
    q1 = -quat.from_rotvec([0, 0, 0.4])
    short = slerp.slerp_geodesic(q0, q1, 0.5)
    long = slerp.slerp_geodesic(q0, q1, 0.5, shortest=False)
    assert np.isclose(np.linalg.norm(quat.to_rotvec(quat.canonicalize(short))), 0.2)
    assert not np.isclose(np.linalg.norm(quat.to_rotvec(quat.canonicalize(long))), 0.2)


@given(unit_quaternions(), unit_quaternions(), fractions)
def test_matrix_slerp_matches_quaternion(q0, q1, t):
    R0, R1 = so3.quat_to_matrix(q0), so3.quat_to_matrix(q1)
    # stay clear of the half-turn singularity of Log
    assume(abs(np.dot(*slerp.shortest_path(q0, q1))) > 1e-3)
    R = slerp.slerp_matrix(R0, R1, t)
    np.testing.assert_allclose(R, so3.quat_to_matrix(slerp.slerp_geodesic(q0, q1, t)), atol=1e-9)


def test_matrix_slerp_examples():
    R0 = so3.exp_so3([0.1, 0.5, -0.3])
    np.testing.assert_allclose(slerp.slerp_matrix(R0, so3.exp_so3([1.0, 0, 0]), 0.0), R0, atol=1e-15)
    for t in (0.0, 0.3, 1.0):
        np.testing.assert_allclose(slerp.slerp_matrix(R0, R0, t), R0, atol=1e-15)
    with pytest.raises(DomainError):
        slerp.slerp_matrix(np.eye(3), np.diag([-1.0, -1.0, 1.0]), 0.5)
