"""Error-state Kalman filter for IMU-driven systems.

The nominal state ``(p, v, q, a_b, ω_b, g)`` is integrated from IMU samples
without noise; an 18-dimensional Gaussian error state ``(δp, δv, δθ, δa_b,
δω_b, δg)`` tracks its uncertainty. The angular error is composed either on
the right of the nominal quaternion (``ErrorFrame.LOCAL``, ``q_t = q ⊗ δq``)
or on the left (``ErrorFrame.GLOBAL``, ``q_t = δq ⊗ q``).

The module-level functions are pure; :class:`ESKF` strings them together into
a stateful filter.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import quat, rate_int, so3
from .discretize import (
    AB,
    G,
    N_ERR,
    TH,
    WB,
    LtiErrorSystem,
    NoiseSpec,
    TransitionMethod,
    impulse_covariance,
    impulse_jacobian,
    transition_matrix,
    transition_rk4,
)
from .discretize import P as P_
from .discretize import V as V_
from .rate_int import IntegratorMethod

STANDARD_GRAVITY = np.array([0.0, 0.0, -9.80665])


class ErrorFrame(str, enum.Enum):
    LOCAL = "local"
    GLOBAL = "global"


class ResetMode(str, enum.Enum):
    FULL = "full"
    IDENTITY = "identity"


class GravityMode(str, enum.Enum):
    ESTIMATED = "estimated"
    CLASSICAL = "classical"


class InnovationError(np.linalg.LinAlgError):
    """The innovation covariance is singular or too badly conditioned to invert."""


@dataclass
class NominalState:
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    q: np.ndarray = field(default_factory=quat.identity)
    a_b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    w_b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    g: np.ndarray = field(default_factory=lambda: STANDARD_GRAVITY.copy())

    def __post_init__(self):
        for name in ("p", "v", "a_b", "w_b", "g"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).copy())
        self.q = quat.unit(self.q)

    @property
    def R(self) -> np.ndarray:
        return so3.quat_to_matrix(self.q)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.v, self.q, self.a_b, self.w_b, self.g])

    @classmethod
    def from_vector(cls, x) -> "NominalState":
        x = np.asarray(x, dtype=float)
        return cls(x[0:3], x[3:6], x[6:10], x[10:13], x[13:16], x[16:19])

    def copy(self) -> "NominalState":
        return NominalState(self.p, self.v, self.q, self.a_b, self.w_b, self.g)


@dataclass
class ErrorBelief:
    dx: np.ndarray
    P: np.ndarray

    @classmethod
    def from_sigmas(cls, sigmas) -> "ErrorBelief":
        """Zero mean, diagonal covariance from six per-block standard deviations."""
        s = np.repeat(np.asarray(sigmas, dtype=float), 3)
        return cls(np.zeros(N_ERR), np.diag(s**2))

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.P), 0.0, None))


@dataclass(frozen=True)
class ImuSample:
    t: float
    acc: np.ndarray
    gyro: np.ndarray


@dataclass
class Measurement:
    """``y = h(x_t) + v`` with ``v ~ N(0, V)``.

    ``H_x`` returns the Jacobian of ``h`` w.r.t. the 19-entry nominal state
    vector ``(p, v, q, a_b, ω_b, g)``.
    """

    y: np.ndarray
    h: Callable[[NominalState], np.ndarray]
    H_x: Callable[[NominalState], np.ndarray]
    V: np.ndarray


def position_fix(z, sigma: float) -> Measurement:
    H = np.zeros((3, 19))
    H[:, 0:3] = np.eye(3)
    return Measurement(
        y=np.asarray(z, dtype=float),
        h=lambda x: x.p.copy(),
        H_x=lambda x: H,
        V=sigma**2 * np.eye(3),
    )


# ------------------------------------------------------------ prediction


def _mean_sample(u0: ImuSample, u1: ImuSample) -> ImuSample:
    return ImuSample(0.5 * (u0.t + u1.t), 0.5 * (u0.acc + u1.acc), 0.5 * (u0.gyro + u1.gyro))


def effective_input(u0: ImuSample, u1: ImuSample, integrator) -> ImuSample:
    """The single IMU sample that stands for the interval under ``integrator``."""
    integrator = IntegratorMethod(integrator)
    if integrator is IntegratorMethod.FORWARD:
        return u0
    if integrator is IntegratorMethod.BACKWARD:
        return u1
    return _mean_sample(u0, u1)


def propagate_nominal(
    x: NominalState,
    u0: ImuSample,
    u1: ImuSample,
    dt: float,
    integrator: IntegratorMethod | str = IntegratorMethod.FORWARD,
) -> NominalState:
    """Integrate the nominal kinematics over one IMU interval.

    ``forward`` is the plain difference equations driven by ``u0``;
    ``backward`` uses ``u1`` at the end of the interval; ``midward`` and
    ``first-order`` integrate the attitude with the matching rate integrator
    and average the world-frame acceleration at both ends.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    integrator = IntegratorMethod(integrator)
    w0 = u0.gyro - x.w_b
    w1 = u1.gyro - x.w_b
    q_next = quat.unit(rate_int.step(x.q, w0, w1, dt, integrator))
    if integrator is IntegratorMethod.FORWARD:
        acc = x.R @ (u0.acc - x.a_b) + x.g
    elif integrator is IntegratorMethod.BACKWARD:
        acc = so3.quat_to_matrix(q_next) @ (u1.acc - x.a_b) + x.g
    else:
        f0 = x.R @ (u0.acc - x.a_b)
        f1 = so3.quat_to_matrix(q_next) @ (u1.acc - x.a_b)
        acc = 0.5 * (f0 + f1) + x.g
    return NominalState(
        p=x.p + x.v * dt + 0.5 * acc * dt**2,
        v=x.v + acc * dt,
        q=q_next,
        a_b=x.a_b,
        w_b=x.w_b,
        g=x.g,
    )


def build_error_dynamics(x: NominalState, u: ImuSample, frame: ErrorFrame | str) -> LtiErrorSystem:
    """Continuous-time ``(A, B, C)`` of the error state at ``(x, u)``."""
    frame = ErrorFrame(frame)
    R = x.R
    a = u.acc - x.a_b
    w = u.gyro - x.w_b
    I3 = np.eye(3)
    A = np.zeros((N_ERR, N_ERR))
    B = np.zeros((N_ERR, 6))
    C = np.zeros((N_ERR, 6))
    A[P_, V_] = I3
    A[V_, AB] = -R
    A[V_, G] = I3
    B[V_, 0:3] = -R
    if frame is ErrorFrame.LOCAL:
        A[V_, TH] = -R @ so3.skew(a)
        A[TH, TH] = -so3.skew(w)
        A[TH, WB] = -I3
        B[TH, 3:6] = -I3
    else:
        A[V_, TH] = -so3.skew(R @ a)
        A[TH, WB] = -R
        B[TH, 3:6] = -R
    C[AB, 0:3] = I3
    C[WB, 3:6] = I3
    return LtiErrorSystem(A, B, C)


def _midpoint_state(x0: NominalState, x1: NominalState) -> NominalState:
    q1 = x1.q if np.dot(x0.q, x1.q) >= 0.0 else -x1.q
    return NominalState(
        p=0.5 * (x0.p + x1.p),
        v=0.5 * (x0.v + x1.v),
        q=quat.unit(x0.q + q1),
        a_b=0.5 * (x0.a_b + x1.a_b),
        w_b=0.5 * (x0.w_b + x1.w_b),
        g=0.5 * (x0.g + x1.g),
    )


def error_transition(
    x: NominalState,
    u: ImuSample,
    dt: float,
    frame: ErrorFrame | str,
    method: TransitionMethod | str,
    x_next: NominalState | None = None,
    u_next: ImuSample | None = None,
) -> np.ndarray:
    """``F_x`` for one step.

    With ``method='rk4'`` and both end-of-interval arguments given, ``A`` is
    evaluated at the start, the midpoint and the end of the step; the midpoint
    uses averaged nominal states and controls.
    """
    method = TransitionMethod(method)
    if method is TransitionMethod.RK4 and x_next is not None and u_next is not None:
        x_mid = _midpoint_state(x, x_next)
        u_mid = _mean_sample(u, u_next)
        A = {
            0.0: build_error_dynamics(x, u, frame).A,
            0.5: build_error_dynamics(x_mid, u_mid, frame).A,
            1.0: build_error_dynamics(x_next, u_next, frame).A,
        }
        return transition_rk4(lambda t: A[round(t / dt, 6)], 0.0, dt).Phi
    return transition_matrix(build_error_dynamics(x, u, frame), dt, method).Phi


def predict(
    belief: ErrorBelief,
    x: NominalState,
    u: ImuSample,
    dt: float,
    frame: ErrorFrame | str,
    method: TransitionMethod | str,
    noise: NoiseSpec,
    x_next: NominalState | None = None,
    u_next: ImuSample | None = None,
) -> ErrorBelief:
    """``δx ← F_x δx``, ``P ← F_x P F_xᵀ + F_i Q_i F_iᵀ``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    Fx = error_transition(x, u, dt, frame, method, x_next, u_next)
    Fi = impulse_jacobian()
    Q = Fi @ impulse_covariance(noise, dt) @ Fi.T
    Pn = Fx @ belief.P @ Fx.T + Q
    return ErrorBelief(Fx @ belief.dx, 0.5 * (Pn + Pn.T))


# ------------------------------------------------------------ correction


def quat_error_jacobian(q, frame: ErrorFrame | str) -> np.ndarray:
    """``Q_δθ``, the 4x3 derivative of the true quaternion w.r.t. ``δθ``."""
    frame = ErrorFrame(frame)
    lift = 0.5 * np.vstack([np.zeros((1, 3)), np.eye(3)])
    if frame is ErrorFrame.LOCAL:
        return quat.left_matrix(q) @ lift
    return quat.right_matrix(q) @ lift


def error_state_jacobian(x: NominalState, frame: ErrorFrame | str) -> np.ndarray:
    """``X_δx``: 19x18 Jacobian of the true state w.r.t. the error state."""
    X = np.zeros((19, N_ERR))
    X[0:6, 0:6] = np.eye(6)
    X[6:10, 6:9] = quat_error_jacobian(x.q, frame)
    X[10:19, 9:18] = np.eye(9)
    return X


def correct(
    belief: ErrorBelief,
    x: NominalState,
    m: Measurement,
    frame: ErrorFrame | str,
    joseph: bool = True,
    max_condition: float = 1e12,
) -> ErrorBelief:
    """Kalman update of the error belief; returns the observed error and its covariance."""
    H = m.H_x(x) @ error_state_jacobian(x, frame)
    P = belief.P
    S = H @ P @ H.T + m.V
    cond = np.linalg.cond(S)
    if not np.isfinite(cond) or cond > max_condition:
        raise InnovationError(
            f"innovation covariance is ill-conditioned (cond={cond:.3g}, diag={np.diag(S)})"
        )
    K = np.linalg.solve(S, H @ P).T
    innovation = m.y - m.h(x) - H @ belief.dx
    dx = belief.dx + K @ innovation
    IKH = np.eye(N_ERR) - K @ H
    if joseph:
        Pn = IKH @ P @ IKH.T + K @ m.V @ K.T
    else:
        Pn = IKH @ P
    return ErrorBelief(dx, 0.5 * (Pn + Pn.T))


def inject(x: NominalState, dx, frame: ErrorFrame | str) -> NominalState:
    """Fold an observed error into the nominal state, ``x ← x ⊕ δx``."""
    frame = ErrorFrame(frame)
    dx = np.asarray(dx, dtype=float)
    dq = quat.from_rotvec(dx[TH])
    if frame is ErrorFrame.LOCAL:
        q = quat.qprod(x.q, dq)
    else:
        q = quat.qprod(dq, x.q)
    return NominalState(
        p=x.p + dx[P_],
        v=x.v + dx[V_],
        q=quat.unit(q),
        a_b=x.a_b + dx[AB],
        w_b=x.w_b + dx[WB],
        g=x.g + dx[G],
    )


def reset_jacobian(dx, frame: ErrorFrame | str, mode: ResetMode | str = ResetMode.FULL) -> np.ndarray:
    """``G``: identity except the angular block ``I ∓ [½δθ]×`` (local: minus)."""
    G_ = np.eye(N_ERR)
    if ResetMode(mode) is ResetMode.IDENTITY:
        return G_
    half = so3.skew(0.5 * np.asarray(dx, dtype=float)[TH])
    G_[TH, TH] = np.eye(3) - half if ErrorFrame(frame) is ErrorFrame.LOCAL else np.eye(3) + half
    return G_


def reset(
    belief: ErrorBelief, dx, frame: ErrorFrame | str, mode: ResetMode | str = ResetMode.FULL
) -> ErrorBelief:
    G_ = reset_jacobian(dx, frame, mode)
    Pn = G_ @ belief.P @ G_.T
    return ErrorBelief(np.zeros(N_ERR), 0.5 * (Pn + Pn.T))


def state_difference(x_true: NominalState, x: NominalState, frame: ErrorFrame | str) -> np.ndarray:
    """``x_true ⊖ x``: the error state that would map ``x`` onto ``x_true``."""
    frame = ErrorFrame(frame)
    if frame is ErrorFrame.LOCAL:
        dq = quat.qprod(quat.conjugate(x.q), x_true.q)
    else:
        dq = quat.qprod(x_true.q, quat.conjugate(x.q))
    return np.concatenate(
        [
            x_true.p - x.p,
            x_true.v - x.v,
            quat.to_rotvec(quat.canonicalize(dq)),
            x_true.a_b - x.a_b,
            x_true.w_b - x.w_b,
            x_true.g - x.g,
        ]
    )


# ---------------------------------------------------------------- filter


@dataclass
class FilterConfig:
    frame: ErrorFrame = ErrorFrame.LOCAL
    transition: TransitionMethod = TransitionMethod.BLOCKWISE
    integrator: IntegratorMethod = IntegratorMethod.MIDWARD
    reset: ResetMode = ResetMode.FULL
    joseph: bool = True
    gravity: GravityMode = GravityMode.ESTIMATED
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    # initial 1σ per error block: p, v, θ, a_b, ω_b, g
    initial_sigmas: tuple = (0.5, 0.1, 0.001, 0.05, 0.005, 0.05)

    def __post_init__(self):
        self.frame = ErrorFrame(self.frame)
        self.transition = TransitionMethod(self.transition)
        self.integrator = IntegratorMethod(self.integrator)
        self.reset = ResetMode(self.reset)
        self.gravity = GravityMode(self.gravity)

    def initial_belief(self) -> ErrorBelief:
        """Initial error belief; classical gravity pins ``δg`` to zero variance."""
        sig = list(self.initial_sigmas)
        if self.gravity is GravityMode.CLASSICAL:
            sig[5] = 0.0
        return ErrorBelief.from_sigmas(sig)


class ESKF:
    """Stateful error-state filter.

    One owner mutates it at a time; :meth:`snapshot` hands out copies that are
    safe to share.
    """

    def __init__(self, x0: NominalState, config: FilterConfig, belief: ErrorBelief | None = None):
        self.config = config
        self.x = x0.copy()
        if config.gravity is GravityMode.CLASSICAL:
            self.x.g = STANDARD_GRAVITY.copy()
        self.belief = belief if belief is not None else config.initial_belief()

    def propagate(self, u0: ImuSample, u1: ImuSample) -> None:
        """Advance nominal state and error covariance from ``u0.t`` to ``u1.t``."""
        cfg = self.config
        dt = u1.t - u0.t
        x_next = propagate_nominal(self.x, u0, u1, dt, cfg.integrator)
        if cfg.transition is TransitionMethod.RK4:
            # A(t) is sampled at both ends of the interval and at its midpoint
            self.belief = predict(
                self.belief, self.x, u0, dt, cfg.frame, cfg.transition, cfg.noise,
                x_next=x_next, u_next=u1,
            )
        else:
            # A is frozen at the same point of the interval the integrator samples
            u = effective_input(u0, u1, cfg.integrator)
            if cfg.integrator is IntegratorMethod.FORWARD:
                x_lin = self.x
            elif cfg.integrator is IntegratorMethod.BACKWARD:
                x_lin = x_next
            else:
                x_lin = _midpoint_state(self.x, x_next)
            self.belief = predict(self.belief, x_lin, u, dt, cfg.frame, cfg.transition, cfg.noise)
        self.x = x_next

    def update(self, m: Measurement) -> np.ndarray:
        """Correct, inject and reset; returns the observed error ``δx̂``."""
        cfg = self.config
        observed = correct(self.belief, self.x, m, cfg.frame, cfg.joseph)
        dx = observed.dx.copy()
        if cfg.gravity is GravityMode.CLASSICAL:
            dx[G] = 0.0
        self.x = inject(self.x, dx, cfg.frame)
        self.belief = reset(observed, dx, cfg.frame, cfg.reset)
        return dx

    def snapshot(self) -> tuple[NominalState, ErrorBelief]:
        return self.x.copy(), ErrorBelief(self.belief.dx.copy(), self.belief.P.copy())
