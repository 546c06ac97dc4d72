"""Rotation group SO(3): matrices, Exp/Log maps, ⊕/⊖ and rotation Jacobians.

Group elements are accepted either as unit quaternions (shape ``(4,)``) or as
rotation matrices (shape ``(3, 3)``); :func:`oplus` and :func:`ominus` keep the
representation they were given.
"""

from __future__ import annotations

import numpy as np

from . import quat
from .quat import DomainError

#: Rodrigues and Log switch to truncated series below this angle.
SMALL_ANGLE = 1e-6

#: The right Jacobian switches to its second-order expansion below this angle.
JACOBIAN_SMALL_ANGLE = 1e-4

#: Log and ⊖ refuse angles closer than this to π.
PI_MARGIN = 1e-6


def skew(a) -> np.ndarray:
    """Cross-product matrix: ``skew(a) @ b == a × b``."""
    a = np.asarray(a, dtype=float)
    out = np.zeros(a.shape[:-1] + (3, 3))
    x, y, z = a[..., 0], a[..., 1], a[..., 2]
    out[..., 0, 1], out[..., 0, 2] = -z, y
    out[..., 1, 0], out[..., 1, 2] = z, -x
    out[..., 2, 0], out[..., 2, 1] = -y, x
    return out


def vee(m) -> np.ndarray:
    """Inverse of :func:`skew`. Raises :class:`DomainError` if ``m`` is not skew."""
    m = np.asarray(m, dtype=float)
    if np.max(np.abs(m + np.swapaxes(m, -1, -2))) > 1e-9:
        raise DomainError("matrix is not skew-symmetric")
    return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], axis=-1)


def exp_so3(phi) -> np.ndarray:
    """Rodrigues formula, rotation vector to rotation matrix."""
    phi = np.asarray(phi, dtype=float)
    angle = np.linalg.norm(phi)
    if angle < SMALL_ANGLE:
        k = skew(phi)
        return np.eye(3) + k + 0.5 * k @ k
    k = skew(phi / angle)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * k @ k


def log_so3(R) -> np.ndarray:
    """Rotation matrix to rotation vector, angle in ``[0, π)``.

    Raises :class:`DomainError` within ``1e-6`` of a half turn, where the axis
    extracted from ``R - Rᵀ`` degenerates.
    """
    R = np.asarray(R, dtype=float)
    w = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    s = np.linalg.norm(w)
    c = 0.5 * (np.trace(R) - 1.0)
    # atan2 is the well-conditioned equivalent of arccos((tr R - 1)/2)
    angle = np.arctan2(s, c)
    if angle < SMALL_ANGLE:
        return w
    if angle > np.pi - PI_MARGIN:
        raise DomainError(f"rotation angle {angle!r} too close to π for Log")
    return w * (angle / s)


def quat_to_matrix(q) -> np.ndarray:
    """``R{q} = (w² - vᵀv) I + 2 v vᵀ + 2 w [v]×``; broadcasts over ``(..., 4)``."""
    q = np.asarray(q, dtype=float)
    w = q[..., 0, None, None]
    v = q[..., 1:]
    vv = np.sum(v * v, axis=-1)[..., None, None]
    outer = v[..., :, None] * v[..., None, :]
    return (w**2 - vv) * np.eye(3) + 2.0 * outer + 2.0 * w * skew(v)


def matrix_to_quat(R) -> np.ndarray:
    """Rotation matrix to unit quaternion with ``w >= 0``.

    Uses the largest of ``(tr R, R00, R11, R22)`` to pick the stable branch.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise DomainError(f"expected a 3x3 matrix, got shape {R.shape}")
    if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-9 or abs(np.linalg.det(R) - 1.0) > 1e-9:
        raise DomainError("matrix is not a proper rotation")
    tr = np.trace(R)
    d = np.diag(R)
    k = int(np.argmax([tr, d[0], d[1], d[2]]))
    if k == 0:
        s = 2.0 * np.sqrt(1.0 + tr)
        q = [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif k == 1:
        s = 2.0 * np.sqrt(1.0 + d[0] - d[1] - d[2])
        q = [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
    elif k == 2:
        s = 2.0 * np.sqrt(1.0 - d[0] + d[1] - d[2])
        q = [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 - d[0] - d[1] + d[2])
        q = [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
    return quat.canonicalize(quat.unit(np.array(q)))


def _is_quat(x: np.ndarray) -> bool:
    return x.shape == (4,)


def as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return quat_to_matrix(X) if _is_quat(X) else X


def oplus(X, theta):
    """``X ⊕ θ = X ∘ Exp(θ)``, in the representation of ``X``."""
    X = np.asarray(X, dtype=float)
    if _is_quat(X):
        return quat.qprod(X, quat.from_rotvec(theta))
    return X @ exp_so3(theta)


def ominus(S, R):
    """``S ⊖ R = Log(R⁻¹ ∘ S)``; both arguments in the same representation."""
    S = np.asarray(S, dtype=float)
    R = np.asarray(R, dtype=float)
    if _is_quat(S):
        d = quat.canonicalize(quat.qprod(quat.conjugate(R), S))
        theta = quat.to_rotvec(d)
        if np.linalg.norm(theta) > np.pi - PI_MARGIN:
            raise DomainError("difference angle too close to π")
        return theta
    return log_so3(R.T @ S)


def right_jacobian(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    a = np.linalg.norm(theta)
    K = skew(theta)
    if a < JACOBIAN_SMALL_ANGLE:
        return np.eye(3) - 0.5 * K + K @ K / 6.0
    return np.eye(3) - (1.0 - np.cos(a)) / a**2 * K + (a - np.sin(a)) / a**3 * K @ K


def right_jacobian_inv(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    a = np.linalg.norm(theta)
    K = skew(theta)
    if a < JACOBIAN_SMALL_ANGLE:
        return np.eye(3) + 0.5 * K + K @ K / 12.0
    coef = 1.0 / a**2 - (1.0 + np.cos(a)) / (2.0 * a * np.sin(a))
    return np.eye(3) + 0.5 * K + coef * K @ K


def jac_rotate_wrt_vector(q) -> np.ndarray:
    """∂(q ⊗ a ⊗ q*)/∂a, which is just ``R{q}``."""
    return quat_to_matrix(q)


def jac_rotate_wrt_quat(q, a) -> np.ndarray:
    """∂(q ⊗ a ⊗ q*)/∂q as a 3x4 matrix."""
    q = np.asarray(q, dtype=float)
    a = np.asarray(a, dtype=float)
    w, v = q[0], q[1:]
    left = w * a + np.cross(v, a)
    right = (v @ a) * np.eye(3) + np.outer(v, a) - np.outer(a, v) - w * skew(a)
    return 2.0 * np.column_stack([left, right])


def jac_rotate_wrt_rotvec(theta, a) -> np.ndarray:
    """∂(R{θ} a)/∂θ ``= -R{θ} [a]× J_r(θ)``."""
    return -exp_so3(theta) @ skew(a) @ right_jacobian(theta)


def jac_composition(Q, R):
    """Jacobians of ``Q ∘ R`` w.r.t. ``Q`` and ``R`` (tangent-space, right ⊕)."""
    return as_matrix(R).T, np.eye(3)
