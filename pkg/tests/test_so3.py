import numpy as np
import pytest
from hypothesis import given, settings
from scipy.spatial.transform import Rotation

from qkin import quat, so3
from qkin.oracles import numerical_jacobian
from qkin.quat import DomainError
from strategies import rotation_vectors, unit_quaternions, vectors


def test_skew_and_vee():
    np.testing.assert_array_equal(so3.skew([0, 0, 1.0]) @ [1.0, 0, 0], [0, 1.0, 0])
    a = np.array([0.3, -1.0, 2.5])
    np.testing.assert_array_equal(so3.vee(so3.skew(a)), a)
    np.testing.assert_array_equal(so3.skew(a).T, -so3.skew(a))


def test_vee_rejects_non_skew():
    with pytest.raises(DomainError):
        so3.vee(np.eye(3))


@given(vectors(), vectors())
def test_skew_is_cross_product(a, b):
    np.testing.assert_allclose(so3.skew(a) @ b, np.cross(a, b), atol=1e-12)


def test_exp_examples():
    np.testing.assert_array_equal(so3.exp_so3(np.zeros(3)), np.eye(3))
    np.testing.assert_allclose(so3.exp_so3([0, 0, np.pi]), np.diag([-1.0, -1.0, 1.0]), atol=1e-15)


def test_exp_matches_scipy():
    phi = np.array([0.7, -0.4, 1.9])
    np.testing.assert_allclose(so3.exp_so3(phi), Rotation.from_rotvec(phi).as_matrix(), atol=1e-15)


@given(rotation_vectors())
def test_exp_matches_quaternion_route(phi):
    np.testing.assert_allclose(so3.exp_so3(phi), so3.quat_to_matrix(quat.qexp(phi / 2)), atol=1e-14)


def test_log_examples():
    np.testing.assert_array_equal(so3.log_so3(np.eye(3)), np.zeros(3))
    np.testing.assert_allclose(so3.log_so3(so3.exp_so3([0.1, 0.2, 0.3])), [0.1, 0.2, 0.3], atol=1e-15)


def test_log_near_half_turn_raises():
    with pytest.raises(DomainError):
        so3.log_so3(so3.exp_so3([0, 0, np.pi - 1e-8]))


@given(rotation_vectors(max_angle=np.pi - 1e-6))
def test_log_exp_round_trip(phi):
    assert np.max(np.abs(so3.log_so3(so3.exp_so3(phi)) - phi)) <= 1e-9


@settings(max_examples=50)
@given(unit_quaternions())
def test_exp_of_log_reproduces_matrix(q):
    R = so3.quat_to_matrix(q)
    try:
        phi = so3.log_so3(R)
    except DomainError:
        return
    np.testing.assert_allclose(so3.exp_so3(phi), R, atol=1e-9)


def test_quat_to_matrix_examples():
    np.testing.assert_array_equal(so3.quat_to_matrix([1.0, 0, 0, 0]), np.eye(3))
    c = np.cos(np.pi / 4)
    np.testing.assert_allclose(
        so3.quat_to_matrix([c, 0, 0, c]), [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-15
    )


@given(unit_quaternions(), unit_quaternions())
def test_quat_to_matrix_properties(q1, q2):
    R1 = so3.quat_to_matrix(q1)
    assert np.max(np.abs(R1.T @ R1 - np.eye(3))) <= 1e-9
    assert abs(np.linalg.det(R1) - 1.0) <= 1e-9
    np.testing.assert_array_equal(so3.quat_to_matrix(-q1), R1)
    np.testing.assert_allclose(so3.quat_to_matrix(quat.conjugate(q1)), R1.T, atol=1e-15)
    np.testing.assert_allclose(so3.quat_to_matrix(quat.qprod(q1, q2)), R1 @ so3.quat_to_matrix(q2), atol=1e-14)


def test_matrix_to_quat_examples():
    np.testing.assert_array_equal(so3.matrix_to_quat(np.eye(3)), [1.0, 0, 0, 0])
    np.testing.assert_allclose(so3.matrix_to_quat(np.diag([-1.0, -1.0, 1.0])), [0, 0, 0, 1.0], atol=1e-15)


def test_matrix_to_quat_rejects_non_rotations():
    with pytest.raises(DomainError):
        so3.matrix_to_quat(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(DomainError):
        so3.matrix_to_quat(2 * np.eye(3))


@given(unit_quaternions())
def test_matrix_to_quat_round_trip(q):
    back = so3.matrix_to_quat(so3.quat_to_matrix(q))
    assert back[0] >= 0
    # at w == 0 both signs are canonical, so compare up to the double cover
    sign = 1.0 if back @ q >= 0 else -1.0
    np.testing.assert_allclose(back, sign * q, atol=1e-12)


# ------------------------------------------------------------- plus/minus


def test_oplus_with_zero():
    q = quat.unit([0.3, 0.1, -0.5, 0.2])
    np.testing.assert_allclose(so3.oplus(q, np.zeros(3)), q, atol=0)
    R = so3.quat_to_matrix(q)
    np.testing.assert_allclose(so3.oplus(R, np.zeros(3)), R, atol=0)


@given(unit_quaternions(), rotation_vectors(max_angle=np.pi - 1e-4))
def test_ominus_inverts_oplus_in_both_representations(q, theta):
    R = so3.quat_to_matrix(q)
    via_q = so3.ominus(so3.oplus(q, theta), q)
    via_R = so3.ominus(so3.oplus(R, theta), R)
    np.testing.assert_allclose(via_q, theta, atol=1e-9)
    np.testing.assert_allclose(via_R, via_q, atol=1e-9)


def test_ominus_near_half_turn_raises():
    q = quat.identity()
    with pytest.raises(DomainError):
        so3.ominus(so3.oplus(q, [np.pi - 1e-8, 0, 0]), q)


# -------------------------------------------------------------- Jacobians


def test_right_jacobian_at_zero():
    np.testing.assert_array_equal(so3.right_jacobian(np.zeros(3)), np.eye(3))
    np.testing.assert_array_equal(so3.right_jacobian_inv(np.zeros(3)), np.eye(3))


@given(rotation_vectors(max_angle=3.0))
def test_right_jacobian_inverse(theta):
    np.testing.assert_allclose(so3.right_jacobian(theta) @ so3.right_jacobian_inv(theta), np.eye(3), atol=1e-9)


def test_right_jacobian_branches_meet():
    u = np.array([0.6, 0.0, 0.8])
    for fn in (so3.right_jacobian, so3.right_jacobian_inv):
        lo = fn(u * so3.JACOBIAN_SMALL_ANGLE * (1 - 1e-9))
        hi = fn(u * so3.JACOBIAN_SMALL_ANGLE * (1 + 1e-9))
        assert np.max(np.abs(lo - hi)) < 1e-12


@settings(max_examples=50)
@given(rotation_vectors(max_angle=3.0), rotation_vectors(max_angle=1.0, min_angle=1.0))
def test_right_jacobian_first_order_expansion(theta, direction):
    d = direction * 1e-4
    lhs = so3.exp_so3(theta + d)
    rhs = so3.exp_so3(theta) @ so3.exp_so3(so3.right_jacobian(theta) @ d)
    assert np.linalg.norm(so3.log_so3(rhs.T @ lhs)) <= 1e-8


def test_right_jacobian_finite_difference():
    theta = np.array([0.3, 0.0, 0.0])
    R = so3.exp_so3(theta)
    N = numerical_jacobian(lambda d: so3.log_so3(R.T @ so3.exp_so3(theta + d)), np.zeros(3))
    J = so3.right_jacobian(theta)
    assert np.linalg.norm(J - N) / np.linalg.norm(N) <= 1e-6


def test_rotate_wrt_vector():
    np.testing.assert_array_equal(so3.jac_rotate_wrt_vector([1.0, 0, 0, 0]), np.eye(3))
    q = quat.unit([0.2, -0.7, 0.1, 0.4])
    np.testing.assert_array_equal(so3.jac_rotate_wrt_vector(q), so3.quat_to_matrix(q))
    N = numerical_jacobian(lambda a: quat.rotate(q, a), np.array([0.5, 1.0, -2.0]))
    np.testing.assert_allclose(so3.jac_rotate_wrt_vector(q), N, atol=1e-7)


def test_rotate_wrt_quat_at_identity():
    a = np.array([1.0, 0, 0])
    expected = 2 * np.column_stack([a, -so3.skew(a)])
    np.testing.assert_array_equal(so3.jac_rotate_wrt_quat([1.0, 0, 0, 0], a), expected)


@given(unit_quaternions(), vectors())
def test_rotate_wrt_quat_is_linear_in_a(q, a):
    np.testing.assert_allclose(so3.jac_rotate_wrt_quat(q, 2 * a), 2 * so3.jac_rotate_wrt_quat(q, a), atol=1e-12)


def test_rotate_wrt_rotvec_limits():
    a = np.array([0.2, -0.3, 1.0])
    np.testing.assert_allclose(so3.jac_rotate_wrt_rotvec(np.zeros(3), a), -so3.skew(a), atol=0)
    np.testing.assert_array_equal(so3.jac_rotate_wrt_rotvec([0.4, 0.1, -0.3], np.zeros(3)), np.zeros((3, 3)))


def test_composition_jacobians():
    Q = quat.unit([0.9, 0.1, 0.3, -0.2])
    R = quat.unit([0.4, -0.5, 0.2, 0.7])
    JQ, JR = so3.jac_composition(Q, R)
    np.testing.assert_array_equal(JR, np.eye(3))
    JQ_id, _ = so3.jac_composition(Q, quat.identity())
    np.testing.assert_array_equal(JQ_id, np.eye(3))
    QR = quat.qprod(Q, R)
    N = numerical_jacobian(lambda d: so3.ominus(quat.qprod(so3.oplus(Q, d), R), QR), np.zeros(3))
    np.testing.assert_allclose(JQ, N, atol=1e-6)
