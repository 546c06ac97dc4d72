"""Integration of body-frame angular rates into an orientation quaternion."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import quat


class IntegratorMethod(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    MIDWARD = "midward"
    FIRST_ORDER = "first-order"


@dataclass(frozen=True)
class RateSample:
    t: float
    omega: np.ndarray


def step_zeroth_forward(q, omega_n, dt: float) -> np.ndarray:
    """Hold the rate at the start of the interval: ``q ⊗ q{ω_n Δt}``."""
    return quat.qprod(q, quat.from_rotvec(np.asarray(omega_n) * dt))


def step_zeroth_backward(q, omega_next, dt: float) -> np.ndarray:
    """Hold the rate at the end of the interval."""
    return quat.qprod(q, quat.from_rotvec(np.asarray(omega_next) * dt))


def step_zeroth_midward(q, omega_n, omega_next, dt: float) -> np.ndarray:
    """Hold the mean rate ``(ω_n + ω_{n+1})/2``."""
    mean = 0.5 * (np.asarray(omega_n) + np.asarray(omega_next))
    return quat.qprod(q, quat.from_rotvec(mean * dt))


def first_order_increment(omega_n, omega_next, dt: float) -> np.ndarray:
    """Unnormalized increment ``q{ω̄Δt} + Δt²/24 [0, ω_n × ω_{n+1}]``."""
    omega_n = np.asarray(omega_n, dtype=float)
    omega_next = np.asarray(omega_next, dtype=float)
    mean = 0.5 * (omega_n + omega_next)
    dq = quat.from_rotvec(mean * dt)
    return dq + (dt**2 / 24.0) * quat.pure(np.cross(omega_n, omega_next))


def step_first_order(q, omega_n, omega_next, dt: float) -> np.ndarray:
    """Midward step plus the commutator correction, renormalized.

    The correction vanishes for collinear rates, in which case the result is
    bit-identical to :func:`step_zeroth_midward`.
    """
    if not np.any(np.cross(omega_n, omega_next)):
        return step_zeroth_midward(q, omega_n, omega_next, dt)
    dq = first_order_increment(omega_n, omega_next, dt)
    return quat.unit(quat.qprod(q, dq))


def qdot_local(q, omega_local) -> np.ndarray:
    """``q̇ = ½ q ⊗ ω`` for a body-frame rate."""
    return 0.5 * quat.qprod(q, quat.pure(omega_local))


def qdot_global(q, omega_global) -> np.ndarray:
    """``q̇ = ½ ω ⊗ q`` for a world-frame rate."""
    return 0.5 * quat.qprod(quat.pure(omega_global), q)


def step(q, omega_n, omega_next, dt: float, method: IntegratorMethod | str) -> np.ndarray:
    method = IntegratorMethod(method)
    if method is IntegratorMethod.FORWARD:
        return step_zeroth_forward(q, omega_n, dt)
    if method is IntegratorMethod.BACKWARD:
        return step_zeroth_backward(q, omega_next, dt)
    if method is IntegratorMethod.MIDWARD:
        return step_zeroth_midward(q, omega_n, omega_next, dt)
    return step_first_order(q, omega_n, omega_next, dt)


def integrate_stream(
    q0,
    samples: Sequence[RateSample],
    method: IntegratorMethod | str = IntegratorMethod.BACKWARD,
    dt: float | None = None,
) -> np.ndarray:
    """Fold a step method over consecutive pairs of rate samples.

    Sample ``n`` and ``n+1`` bound each interval; the method decides which of
    the two rates (or which combination) drives the step. A single sample
    needs an explicit ``dt`` and is integrated as a constant rate.
    """
    if len(samples) == 0:
        raise ValueError("need at least one rate sample")
    q = quat.unit(q0)
    if len(samples) == 1:
        if dt is None or dt <= 0:
            raise ValueError("a single sample needs a positive dt")
        return step_zeroth_forward(q, samples[0].omega, dt)
    times = np.array([s.t for s in samples], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("rate sample timestamps must be strictly increasing")
    for a, b in zip(samples[:-1], samples[1:]):
        q = step(q, a.omega, b.omega, b.t - a.t, method)
    return q
