import numpy as np
import pytest
from hypothesis import given, settings
from scipy.spatial.transform import Rotation

from qkin import quat, so3
from qkin.quat import DomainError
from strategies import rotation_vectors, unit_quaternions, vectors

I = np.array([1.0, 0.0, 0.0, 0.0])
i, j, k = np.eye(4)[1], np.eye(4)[2], np.eye(4)[3]


def wxyz(r: Rotation) -> np.ndarray:
    x, y, z, w = r.as_quat()
    return np.array([w, x, y, z])


# ---------------------------------------------------------------- product


def test_identity_is_neutral():
    q = quat.unit([0.3, -0.1, 0.7, 0.2])
    np.testing.assert_array_equal(quat.qprod(I, q), q)
    np.testing.assert_array_equal(quat.qprod(q, I), q)


def test_ij_is_k_and_ji_is_minus_k():
    np.testing.assert_array_equal(quat.qprod(i, j), k)
    np.testing.assert_array_equal(quat.qprod(j, i), -k)


def test_product_matches_rotation_composition():
    # Hamilton product composes like matrix products: R{p⊗q} = R{p}R{q}
    a = Rotation.from_rotvec([0.4, -1.1, 0.3])
    b = Rotation.from_rotvec([-0.2, 0.5, 2.0])
    got = quat.qprod(wxyz(a), wxyz(b))
    expected = wxyz(a * b)
    assert np.allclose(got, expected) or np.allclose(got, -expected)


def test_product_broadcasts_over_batches():
    rng = np.random.default_rng(0)
    p = quat.unit(rng.normal(size=(5, 4)))
    q = quat.unit(rng.normal(size=(5, 4)))
    batch = quat.qprod(p, q)
    for n in range(5):
        np.testing.assert_allclose(batch[n], quat.qprod(p[n], q[n]), atol=0)


@given(unit_quaternions(), unit_quaternions(), unit_quaternions())
def test_associativity(p, q, r):
    lhs = quat.qprod(quat.qprod(p, q), r)
    rhs = quat.qprod(p, quat.qprod(q, r))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


@given(vectors(4), vectors(4))
def test_norm_is_multiplicative(p, q):
    assert np.isclose(quat.norm(quat.qprod(p, q)), quat.norm(p) * quat.norm(q), rtol=1e-12, atol=1e-12)


@given(unit_quaternions(), unit_quaternions())
def test_commutator_is_twice_the_cross_product(p, q):
    diff = quat.qprod(p, q) - quat.qprod(q, p)
    np.testing.assert_allclose(diff, quat.pure(2 * np.cross(p[1:], q[1:])), atol=1e-12)


@given(vectors())
def test_pure_square_is_minus_norm_squared(v):
    sq = quat.qprod(quat.pure(v), quat.pure(v))
    np.testing.assert_allclose(sq, [-v @ v, 0, 0, 0], atol=1e-12 * max(1.0, v @ v))


# ------------------------------------------------- conjugate, norm, inverse


def test_conjugate_examples():
    np.testing.assert_array_equal(quat.conjugate(I), I)
    np.testing.assert_array_equal(quat.conjugate([1.0, 2.0, 3.0, 4.0]), [1.0, -2.0, -3.0, -4.0])
    h = np.array([0.5, 0.5, 0.5, 0.5])
    np.testing.assert_allclose(quat.qprod(h, quat.conjugate(h)), I, atol=1e-15)


@given(unit_quaternions(), unit_quaternions())
def test_conjugate_of_product_reverses_order(p, q):
    lhs = quat.conjugate(quat.qprod(p, q))
    rhs = quat.qprod(quat.conjugate(q), quat.conjugate(p))
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_norm_examples():
    assert quat.norm(I) == 1.0
    assert quat.norm([0.0, 3.0, 4.0, 0.0]) == 5.0


def test_inverse_examples():
    np.testing.assert_array_equal(quat.inverse(I), I)
    np.testing.assert_array_equal(quat.inverse([2.0, 0, 0, 0]), [0.5, 0, 0, 0])
    q = quat.unit([0.2, 0.4, -0.1, 0.9])
    np.testing.assert_allclose(quat.inverse(q), quat.conjugate(q), atol=1e-15)
    np.testing.assert_allclose(quat.qprod(q, quat.inverse(q)), I, atol=1e-15)


def test_inverse_of_zero_raises():
    with pytest.raises(DomainError):
        quat.inverse(np.zeros(4))


def test_unit_rejects_tiny_quaternions():
    with pytest.raises(DomainError):
        quat.unit([1e-7, 0, 0, 0])
    np.testing.assert_allclose(quat.norm(quat.unit([3.0, 0, 4.0, 0])), 1.0)


# ---------------------------------------------------------------- exp/log


def test_exp_examples():
    np.testing.assert_array_equal(quat.qexp(np.zeros(3)), I)
    c = np.cos(np.pi / 4)
    np.testing.assert_allclose(quat.qexp([0, 0, np.pi / 4]), [c, 0, 0, c], atol=1e-15)


def test_log_examples():
    np.testing.assert_array_equal(quat.qlog(I), np.zeros(3))
    c = np.cos(np.pi / 4)
    np.testing.assert_allclose(quat.qlog([c, 0, 0, c]), [0, 0, np.pi / 4], atol=1e-15)


def test_exp_matches_scipy_rotation():
    phi = np.array([0.3, -1.2, 0.8])
    np.testing.assert_allclose(quat.from_rotvec(phi), wxyz(Rotation.from_rotvec(phi)), atol=1e-15)


@given(vectors())
def test_exp_of_negative_is_conjugate(v):
    np.testing.assert_allclose(quat.qexp(-v), quat.conjugate(quat.qexp(v)), atol=1e-15)


@given(rotation_vectors(max_angle=np.pi - 1e-6, min_angle=1e-12))
def test_exp_log_round_trip(v):
    # v here is the half-angle vector, so ||v|| < π keeps us on the first sheet
    assert np.max(np.abs(quat.qlog(quat.qexp(v)) - v)) <= 1e-9


def test_small_angle_branches_are_continuous():
    u = np.array([1.0, 2.0, -2.0]) / 3.0
    lo = quat.qexp(u * (quat.SMALL_ANGLE * (1 - 1e-9)))
    hi = quat.qexp(u * (quat.SMALL_ANGLE * (1 + 1e-9)))
    assert np.max(np.abs(lo - hi)) < 1e-14
    assert abs(quat.norm(lo) - 1.0) < 1e-15
    np.testing.assert_allclose(quat.qlog(lo), u * quat.SMALL_ANGLE * (1 - 1e-9), rtol=1e-12)


def test_log_does_not_canonicalize():
    q = quat.from_rotvec([0, 0, 0.5])
    # -q is the same rotation but its log has angle π - 0.25
    assert np.isclose(np.linalg.norm(quat.qlog(-q)), np.pi - 0.25)
    np.testing.assert_allclose(quat.canonicalize(-q), q)


def test_general_exp_and_log_are_inverse():
    q = np.array([0.3, -1.2, 0.5, 0.8])
    back = quat.qexp_general(quat.qlog_general(q))
    np.testing.assert_allclose(back, q, atol=1e-14)


# ----------------------------------------------------------------- powers


@given(unit_quaternions())
def test_power_endpoints(q):
    np.testing.assert_allclose(quat.qpow(q, 0.0), I, atol=1e-15)
    np.testing.assert_allclose(quat.qpow(q, 1.0), q, atol=1e-12)


@given(unit_quaternions())
def test_square_is_self_product(q):
    np.testing.assert_allclose(quat.qpow(q, 2.0), quat.qprod(q, q), atol=1e-12)


# ------------------------------------------------------- product matrices


def test_left_matrix_of_identity():
    np.testing.assert_array_equal(quat.left_matrix(I), np.eye(4))
    np.testing.assert_array_equal(quat.right_matrix(I), np.eye(4))


@given(vectors(4), vectors(4))
def test_product_matrices_reproduce_product(p, q):
    pq = quat.qprod(p, q)
    scale = max(1.0, quat.norm(p) * quat.norm(q))
    assert np.max(np.abs(quat.left_matrix(p) @ q - pq)) <= 1e-12 * scale
    assert np.max(np.abs(quat.right_matrix(q) @ p - pq)) <= 1e-12 * scale


@given(unit_quaternions(), unit_quaternions())
def test_left_and_right_matrices_commute(p, q):
    L, R = quat.left_matrix(q), quat.right_matrix(p)
    np.testing.assert_allclose(R @ L, L @ R, atol=1e-14)


# ----------------------------------------------------------------- rotate


def test_rotate_examples():
    x = np.array([0.3, -2.0, 5.0])
    np.testing.assert_allclose(quat.rotate(I, x), x, atol=0)
    q = quat.from_rotvec([0, 0, np.pi / 2])
    np.testing.assert_allclose(quat.rotate(q, [1.0, 0, 0]), [0, 1.0, 0], atol=1e-15)


@given(unit_quaternions(), vectors())
def test_rotate_preserves_norm(q, x):
    assert abs(np.linalg.norm(quat.rotate(q, x)) - np.linalg.norm(x)) <= 1e-12 * max(1.0, np.linalg.norm(x))


@given(unit_quaternions(), vectors(), vectors())
def test_rotate_preserves_cross_product(q, v, w):
    lhs = quat.rotate(q, np.cross(v, w))
    rhs = np.cross(quat.rotate(q, v), quat.rotate(q, w))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.linalg.norm(v) * np.linalg.norm(w))


@given(unit_quaternions(), vectors())
def test_double_cover(q, x):
    np.testing.assert_array_equal(quat.rotate(-q, x), quat.rotate(q, x))


@settings(max_examples=50)
@given(unit_quaternions(), vectors())
def test_rotate_matches_matrix(q, x):
    err = np.linalg.norm(quat.rotate(q, x) - so3.quat_to_matrix(q) @ x)
    assert err <= 1e-12 * max(1.0, np.linalg.norm(x))
