"""Spherical linear interpolation between two orientations.

All three quaternion variants pre-flip ``q1`` onto the hemisphere of ``q0``
unless called with ``shortest=False``; without the flip the interpolation may
take the long way round the rotation.
"""

from __future__ import annotations

import numpy as np

from . import quat, so3
from .quat import DomainError

#: Below this 4D angle between q0 and q1 the trig methods fall back to nlerp.
DEGENERATE_ANGLE = 1e-9


def shortest_path(q0, q1):
    """Return ``(q0, q1)`` or ``(q0, -q1)`` so that ``q0ᵀ q1 >= 0``."""
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    if np.dot(q0, q1) < 0.0:
        return q0, -q1
    return q0, q1


def _nlerp(q0, q1, t):
    return quat.unit((1.0 - t) * q0 + t * q1)


def slerp_geodesic(q0, q1, t, shortest: bool = True) -> np.ndarray:
    """``q0 ⊗ (q0* ⊗ q1)^t``."""
    if shortest:
        q0, q1 = shortest_path(q0, q1)
    q0 = np.asarray(q0, dtype=float)
    dq = quat.qprod(quat.conjugate(q0), q1)
    return quat.qprod(q0, quat.qpow(dq, t))


def _angle(q0, q1):
    # arccos of the dot product loses half the digits near zero; the chord form does not
    return float(2.0 * np.arctan2(np.linalg.norm(q1 - q0), np.linalg.norm(q1 + q0)))


def slerp_trig(q0, q1, t, shortest: bool = True) -> np.ndarray:
    """Rotate ``q0`` by ``tΔθ`` in the plane spanned by ``q0`` and ``q1``."""
    if shortest:
        q0, q1 = shortest_path(q0, q1)
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    dtheta = _angle(q0, q1)
    if dtheta < DEGENERATE_ANGLE:
        return _nlerp(q0, q1, t)
    q_perp = q1 - np.dot(q0, q1) * q0
    q_perp = q_perp / np.linalg.norm(q_perp)
    return q0 * np.cos(t * dtheta) + q_perp * np.sin(t * dtheta)


def slerp_davis(q0, q1, t, shortest: bool = True) -> np.ndarray:
    """Symmetric endpoint-weighted form of slerp."""
    if shortest:
        q0, q1 = shortest_path(q0, q1)
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    dtheta = _angle(q0, q1)
    s = np.sin(dtheta)
    if s < DEGENERATE_ANGLE:
        return _nlerp(q0, q1, t)
    return (np.sin((1.0 - t) * dtheta) * q0 + np.sin(t * dtheta) * q1) / s


def slerp_matrix(R0, R1, t) -> np.ndarray:
    """``R0 Exp(t Log(R0ᵀ R1))``; raises near a half-turn difference."""
    R0 = np.asarray(R0, dtype=float)
    R1 = np.asarray(R1, dtype=float)
    try:
        phi = so3.log_so3(R0.T @ R1)
    except DomainError as exc:
        raise DomainError("slerp between rotations a half turn apart is ambiguous") from exc
    return R0 @ so3.exp_so3(t * phi)
