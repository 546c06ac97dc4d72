"""Brute-force reference computations used to check the closed forms.

Nothing here is used by the filter itself. These routines are deliberately
naive (direct series, finite differences, fine-step integration) so that they
share no code path with what they verify.
"""

from __future__ import annotations

import math

import numpy as np

from . import quat


def taylor_expm(M, terms: int = 20) -> np.ndarray:
    """``e^M`` by a truncated Taylor series, with scaling and squaring."""
    M = np.asarray(M, dtype=float)
    nrm = np.linalg.norm(M, ord=np.inf)
    squarings = 0
    if nrm > 0.5:
        squarings = int(math.ceil(math.log2(nrm / 0.5)))
    Ms = M / 2.0**squarings
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms + 1):
        term = term @ Ms / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def sigma_series_direct(omega, dt: float, n: int, terms: int = 20) -> np.ndarray:
    """``Σₙ = Σ_{k=n}^{n+terms} Θ^{k-n} Δt^k / k!`` summed term by term."""
    w = np.asarray(omega, dtype=float)
    theta = -np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    out = np.zeros((3, 3))
    power = np.eye(3)
    for k in range(n, n + terms + 1):
        out = out + power * dt**k / math.factorial(k)
        power = power @ theta
    return out


def numerical_jacobian(f, x0, step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of a vector function."""
    x0 = np.asarray(x0, dtype=float)
    f0 = np.asarray(f(x0))
    J = np.zeros((f0.size, x0.size))
    for i in range(x0.size):
        e = np.zeros_like(x0)
        e[i] = step
        J[:, i] = (np.asarray(f(x0 + e)) - np.asarray(f(x0 - e))).ravel() / (2 * step)
    return J


def integrate_rate_fine(q0, omega_of_t, t0: float, t1: float, substeps: int = 1000) -> np.ndarray:
    """Integrate ``q̇ = ½ q ⊗ ω(t)`` with classical RK4 on a fine grid."""
    q = np.asarray(q0, dtype=float)
    h = (t1 - t0) / substeps

    def f(t, q):
        return 0.5 * quat.qprod(q, quat.pure(omega_of_t(t)))

    t = t0
    for _ in range(substeps):
        k1 = f(t, q)
        k2 = f(t + h / 2, q + h / 2 * k1)
        k3 = f(t + h / 2, q + h / 2 * k2)
        k4 = f(t + h, q + h * k3)
        q = q + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return quat.unit(q)


def rotation_angle_between(q_a, q_b) -> float:
    """Angle in radians of the rotation taking ``q_a`` to ``q_b``."""
    d = quat.qprod(quat.conjugate(q_a), q_b)
    return float(2.0 * np.arctan2(np.linalg.norm(d[1:]), abs(d[0])))
