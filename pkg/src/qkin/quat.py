"""Hamilton quaternion algebra.

Quaternions are plain numpy arrays of shape ``(..., 4)`` stored scalar-first,
``(w, x, y, z)``. Every function broadcasts over leading dimensions, so a
batch of quaternions is just an ``(N, 4)`` array. Pure quaternions are passed
around as their 3-vector part.

Conventions: ``i*j = k`` and rotations act as the passive local-to-global
operator ``x_global = q ⊗ x_local ⊗ q*``.
"""

from __future__ import annotations

import numpy as np

#: Below this angle the exp/log maps switch to truncated Taylor forms.
SMALL_ANGLE = 1e-6

#: Minimum norm accepted by :func:`unit` before it refuses to normalize.
MIN_NORM = 1e-6


class DomainError(ValueError):
    """Input lies outside the domain where an operation is defined."""


def identity(*batch: int) -> np.ndarray:
    q = np.zeros(batch + (4,))
    q[..., 0] = 1.0
    return q


def unit(q) -> np.ndarray:
    """Return ``q / ||q||``.

    Raises :class:`DomainError` when ``||q|| < 1e-6``; a near-zero quaternion
    carries no usable orientation.
    """
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n < MIN_NORM):
        raise DomainError(f"cannot normalize quaternion with norm {n.min():.3g}")
    return q / n


def pure(v) -> np.ndarray:
    """Embed 3-vectors as pure quaternions ``(0, v)``."""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def qprod(p, q) -> np.ndarray:
    """Quaternion product ``p ⊗ q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    qw, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(np.broadcast_shapes(p.shape, q.shape))
    out[..., 0] = pw * qw - px * qx - py * qy - pz * qz
    out[..., 1] = pw * qx + px * qw + py * qz - pz * qy
    out[..., 2] = pw * qy - px * qz + py * qw + pz * qx
    out[..., 3] = pw * qz + px * qy - py * qx + pz * qw
    return out


def conjugate(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def norm(q):
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def inverse(q) -> np.ndarray:
    """``q* / ||q||²``; raises :class:`DomainError` for a zero quaternion."""
    q = np.asarray(q, dtype=float)
    n2 = np.sum(q * q, axis=-1, keepdims=True)
    if np.any(n2 == 0.0):
        raise DomainError("zero quaternion has no inverse")
    return conjugate(q) / n2


def canonicalize(q) -> np.ndarray:
    """Flip sign where needed so that ``w >= 0``. Same rotation, other cover."""
    q = np.asarray(q, dtype=float)
    return np.where(q[..., :1] < 0.0, -q, q)


def qexp(v) -> np.ndarray:
    """Exponential of the pure quaternion with vector part ``v``.

    Returns ``[cos θ, u sin θ]`` with ``θ = ||v||``.
    """
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1, keepdims=True)
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    w_big = np.cos(theta)
    v_big = v * (np.sin(theta) / safe)
    w_small = 1.0 - theta**2 / 2.0
    v_small = v * (1.0 - theta**2 / 6.0)
    out = np.concatenate(
        [np.where(small, w_small, w_big), np.where(small, v_small, v_big)], axis=-1
    )
    # the truncated series is only unit to O(θ⁴)
    if np.any(small):
        out = np.where(small, out / np.linalg.norm(out, axis=-1, keepdims=True), out)
    return out


def qlog(q) -> np.ndarray:
    """Logarithm of a unit quaternion, returned as the 3-vector ``u θ``.

    ``θ = atan2(||q_v||, q_w)`` lies in ``[0, π]``; no sign canonicalization is
    applied, so ``q`` with ``w < 0`` maps to an angle above ``π/2``. For
    ``q = (-1, 0, 0, 0)`` the axis is arbitrary and ``x`` is returned.
    """
    q = np.asarray(q, dtype=float)
    w = q[..., :1]
    v = q[..., 1:]
    nv = np.linalg.norm(v, axis=-1, keepdims=True)
    theta = np.arctan2(nv, w)
    small = theta < SMALL_ANGLE
    axisless = nv == 0.0
    big = v * (theta / np.where(small | axisless, 1.0, nv))
    big = np.where(axisless & ~small, np.array([1.0, 0.0, 0.0]) * theta, big)
    ws = np.where(small, w, 1.0)
    tiny = (v / ws) * (1.0 - nv**2 / (3.0 * ws**2))
    return np.where(small, tiny, big)


def qexp_general(q) -> np.ndarray:
    """Exponential of an arbitrary quaternion, ``e^{q_w} e^{q_v}``."""
    q = np.asarray(q, dtype=float)
    return np.exp(q[..., :1]) * qexp(q[..., 1:])


def qlog_general(q) -> np.ndarray:
    """Logarithm of a non-zero quaternion, ``[log ||q||, u θ]``."""
    q = np.asarray(q, dtype=float)
    n = norm(q)[..., None]
    if np.any(n == 0.0):
        raise DomainError("logarithm of the zero quaternion is undefined")
    return np.concatenate([np.log(n), qlog(q / n)], axis=-1)


def qpow(q, t) -> np.ndarray:
    """``q^t = exp(t log q)`` for unit ``q``."""
    return qexp(np.asarray(t, dtype=float)[..., None] * qlog(q))


def from_rotvec(phi) -> np.ndarray:
    """Capitalized exponential map: rotation vector to unit quaternion."""
    return qexp(np.asarray(phi, dtype=float) / 2.0)


def to_rotvec(q) -> np.ndarray:
    """Capitalized logarithmic map: unit quaternion to rotation vector."""
    return 2.0 * qlog(q)


def left_matrix(q) -> np.ndarray:
    """``[q]_L`` such that ``left_matrix(p) @ q == p ⊗ q``."""
    w, x, y, z = np.moveaxis(np.asarray(q, dtype=float), -1, 0)
    return np.stack(
        [
            np.stack([w, -x, -y, -z], axis=-1),
            np.stack([x, w, -z, y], axis=-1),
            np.stack([y, z, w, -x], axis=-1),
            np.stack([z, -y, x, w], axis=-1),
        ],
        axis=-2,
    )


def right_matrix(q) -> np.ndarray:
    """``[q]_R`` such that ``right_matrix(q) @ p == p ⊗ q``."""
    w, x, y, z = np.moveaxis(np.asarray(q, dtype=float), -1, 0)
    return np.stack(
        [
            np.stack([w, -x, -y, -z], axis=-1),
            np.stack([x, w, z, -y], axis=-1),
            np.stack([y, -z, w, x], axis=-1),
            np.stack([z, y, -x, w], axis=-1),
        ],
        axis=-2,
    )


def rotate(q, x) -> np.ndarray:
    """Rotate ``x`` by ``q`` through the sandwich product ``q ⊗ x ⊗ q*``."""
    q = np.asarray(q, dtype=float)
    return qprod(qprod(q, pure(x)), conjugate(q))[..., 1:]
