"""Discrete-time machinery for the linearized IMU error system.

Covers explicit Runge-Kutta integration, the Σₙ matrix series and the exact
transition matrix built from them, system-wise and block-wise truncated
approximations, an RK4 transition matrix for time-varying dynamics, and the
discretization of white measurement noise and random-walk perturbations.

Error-state layout (18 entries, 3 each): δp, δv, δθ, δa_b, δω_b, δg.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import so3

# error-state block slices
P, V, TH, AB, WB, G = (slice(3 * i, 3 * i + 3) for i in range(6))
N_ERR = 18

#: Below this value of ||ω||Δt the Σₙ series use their Taylor expansion.
SMALL_ROTATION = 1e-5

# ---------------------------------------------------------------- Runge-Kutta


class RKScheme(str, enum.Enum):
    EULER = "euler"
    MIDPOINT = "midpoint"
    RK4 = "rk4"


@dataclass(frozen=True)
class ButcherTableau:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if np.any(np.triu(a) != 0.0):
            raise ValueError("only explicit (strictly lower-triangular) tableaus are supported")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))

    @property
    def stages(self) -> int:
        return len(self.b)


TABLEAUS = {
    RKScheme.EULER: ButcherTableau([[0.0]], [1.0], [0.0]),
    RKScheme.MIDPOINT: ButcherTableau([[0.0, 0.0], [0.5, 0.0]], [0.0, 1.0], [0.0, 0.5]),
    RKScheme.RK4: ButcherTableau(
        [[0, 0, 0, 0], [0.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 1.0, 0]],
        [1 / 6, 1 / 3, 1 / 3, 1 / 6],
        [0.0, 0.5, 0.5, 1.0],
    ),
}


def rk_step(f: Callable, x0, t0: float, dt: float, tableau: ButcherTableau):
    """One step of a general explicit Runge-Kutta method for ``ẋ = f(t, x)``."""
    x0 = np.asarray(x0, dtype=float)
    k = []
    for i in range(tableau.stages):
        xi = x0 + dt * sum((tableau.a[i, j] * k[j] for j in range(i)), np.zeros_like(x0))
        k.append(np.asarray(f(t0 + tableau.c[i] * dt, xi), dtype=float))
    return x0 + dt * sum(bi * ki for bi, ki in zip(tableau.b, k))


def rk_integrate(f: Callable, x0, t0: float, dt: float, scheme: RKScheme | str = RKScheme.RK4):
    """Integrate ``ẋ = f(t, x)`` over one step with euler, midpoint or rk4."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    scheme = RKScheme(scheme)
    x0 = np.asarray(x0, dtype=float)
    if scheme is RKScheme.EULER:
        return x0 + dt * f(t0, x0)
    if scheme is RKScheme.MIDPOINT:
        k1 = f(t0, x0)
        return x0 + dt * f(t0 + dt / 2, x0 + dt / 2 * k1)
    k1 = f(t0, x0)
    k2 = f(t0 + dt / 2, x0 + dt / 2 * k1)
    k3 = f(t0 + dt / 2, x0 + dt / 2 * k2)
    k4 = f(t0 + dt, x0 + dt * k3)
    return x0 + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


# ------------------------------------------------------------- Σₙ series


def _remainders(phi: float, n: int) -> tuple[float, float]:
    """Coefficients ``(α, β)`` of ``R{ωΔt}ᵀ - Σ_{k≤n} (ΘΔt)^k/k! = α X + β X²``.

    ``X = ΘΔt`` with ``Θ = -[ω]×`` and ``phi = ||ω||Δt``. Using ``X³ = -φ² X``
    the difference is the tail of the sine and cosine series; summing the tail
    directly avoids the cancellation of the naive subtraction for small ``φ``.
    """
    if phi > 1.0:
        alpha = math.sin(phi) / phi
        beta = (1.0 - math.cos(phi)) / phi**2
        for k in range(1, n + 1):
            term = (-(phi**2)) ** ((k - 1) // 2) / math.factorial(k)
            if k % 2:
                alpha -= term
            else:
                beta -= term
        return alpha, beta
    alpha = beta = 0.0
    for k in range(n + 1, n + 40):
        term = (-(phi**2)) ** ((k - 1) // 2) / math.factorial(k)
        if k % 2:
            alpha += term
        else:
            beta += term
    return alpha, beta


def sigma_series(omega, dt: float, n: int) -> np.ndarray:
    """Closed form of ``Σₙ = Σ_{k≥n} Θ^{k-n} Δt^k / k!`` with ``Θ = -[ω]×``."""
    if n not in (0, 1, 2, 3):
        raise ValueError("n must be 0, 1, 2 or 3")
    omega = np.asarray(omega, dtype=float)
    w = float(np.linalg.norm(omega))
    phi = w * dt
    theta = -so3.skew(omega)
    if n == 0:
        return so3.exp_so3(omega * dt).T
    if phi < SMALL_ROTATION:
        return (
            dt**n / math.factorial(n) * np.eye(3)
            + dt ** (n + 1) / math.factorial(n + 1) * theta
            + dt ** (n + 2) / math.factorial(n + 2) * theta @ theta
        )
    X = theta * dt
    alpha, beta = _remainders(phi, n)
    bracket = alpha * X + beta * X @ X
    base = dt**n / math.factorial(n) * np.eye(3)
    wx = so3.skew(omega)
    if n % 2:
        return base - (-1.0) ** ((n + 1) // 2) * wx @ bracket / w ** (n + 1)
    return base + (-1.0) ** (n // 2) * bracket / w**n


# ---------------------------------------------------------- error system


@dataclass
class LtiErrorSystem:
    """Continuous error dynamics ``δẋ = A δx + B ũ + C w``.

    ``A`` is 18x18 with the IMU block layout, ``B`` maps the 6-vector of
    measurement noise (accelerometer, gyrometer), ``C`` maps the 6-vector of
    bias random-walk perturbations.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def P_v(self):
        return self.A[P, V]

    @property
    def V_theta(self):
        return self.A[V, TH]

    @property
    def V_a(self):
        return self.A[V, AB]

    @property
    def V_g(self):
        return self.A[V, G]

    @property
    def Theta_theta(self):
        return self.A[TH, TH]

    @property
    def Theta_omega(self):
        return self.A[TH, WB]

    @property
    def angular_rate(self) -> np.ndarray:
        """The ω for which ``Θ_θ = -[ω]×`` (zero for a global angular error)."""
        return so3.vee(-self.Theta_theta)


@dataclass(frozen=True)
class NoiseSpec:
    """Isotropic IMU noise levels.

    sigma_acc: accelerometer white noise, m/s²
    sigma_gyro: gyrometer white noise, rad/s
    sigma_acc_walk: accelerometer bias random walk, m/s²·√s
    sigma_gyro_walk: gyrometer bias random walk, rad/s·√s
    """

    sigma_acc: float = 0.0
    sigma_gyro: float = 0.0
    sigma_acc_walk: float = 0.0
    sigma_gyro_walk: float = 0.0

    def __post_init__(self):
        for name in ("sigma_acc", "sigma_gyro", "sigma_acc_walk", "sigma_gyro_walk"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


class TransitionMethod(str, enum.Enum):
    EULER = "euler"
    TRUNC2 = "trunc2"
    TRUNC3 = "trunc3"
    BLOCKWISE = "blockwise"
    CLOSED = "closed"
    RK4 = "rk4"


@dataclass
class TransitionMatrix:
    Phi: np.ndarray
    method: TransitionMethod


def _assemble(sys: LtiErrorSystem, sigmas, dt: float, max_order: int = 3) -> np.ndarray:
    """Fill the block structure of Φ from ``Σ₀..Σ₃``.

    Blocks whose leading Taylor term is of order above ``max_order`` are left
    at zero.
    """
    s0, s1, s2, s3 = sigmas
    Pv, Vt, Va, Vg, To = sys.P_v, sys.V_theta, sys.V_a, sys.V_g, sys.Theta_omega
    Phi = np.eye(N_ERR)
    Phi[P, V] = Pv * dt
    Phi[V, TH] = Vt @ s1
    Phi[V, AB] = Va * dt
    Phi[V, G] = Vg * dt
    Phi[TH, TH] = s0
    Phi[TH, WB] = s1 @ To
    if max_order >= 2:
        Phi[P, TH] = Pv @ Vt @ s2
        Phi[P, AB] = 0.5 * Pv @ Va * dt**2
        Phi[P, G] = 0.5 * Pv @ Vg * dt**2
        Phi[V, WB] = Vt @ s2 @ To
    if max_order >= 3:
        Phi[P, WB] = Pv @ Vt @ s3 @ To
    return Phi


def _rate(sys: LtiErrorSystem, omega):
    return sys.angular_rate if omega is None else np.asarray(omega, dtype=float)


def transition_closed(sys: LtiErrorSystem, dt: float, omega=None) -> TransitionMatrix:
    """Exact ``Φ = e^{AΔt}`` through the Σₙ closed forms.

    ``omega`` defaults to the rate encoded in ``Θ_θ = -[ω]×``.
    """
    omega = _rate(sys, omega)
    sigmas = [sigma_series(omega, dt, n) for n in range(4)]
    return TransitionMatrix(_assemble(sys, sigmas, dt), TransitionMethod.CLOSED)


def transition_blockwise(sys: LtiErrorSystem, dt: float, omega=None, max_order: int = 3) -> TransitionMatrix:
    """Keep ``Σ₀`` exact and truncate each ``Σₙ`` to ``Δtⁿ/n! I``."""
    omega = _rate(sys, omega)
    sigmas = [sigma_series(omega, dt, 0)] + [
        dt**n / math.factorial(n) * np.eye(3) for n in (1, 2, 3)
    ]
    return TransitionMatrix(_assemble(sys, sigmas, dt, max_order), TransitionMethod.BLOCKWISE)


def transition_truncated(sys: LtiErrorSystem, dt: float, order: int, omega=None) -> TransitionMatrix:
    """``I + AΔt + … + (AΔt)^order/order!`` with the exact rotational block."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    Adt = sys.A * dt
    Phi = np.eye(N_ERR)
    term = np.eye(N_ERR)
    for k in range(1, order + 1):
        term = term @ Adt / k
        Phi = Phi + term
    Phi[TH, TH] = so3.exp_so3(_rate(sys, omega) * dt).T
    tag = {1: TransitionMethod.EULER, 2: TransitionMethod.TRUNC2, 3: TransitionMethod.TRUNC3}
    return TransitionMatrix(Phi, tag[order])


def transition_rk4(A_of_t: Callable[[float], np.ndarray], t_n: float, dt: float) -> TransitionMatrix:
    """RK4 integration of ``Φ̇ = A(t) Φ`` from ``Φ(t_n) = I``."""
    A0 = np.asarray(A_of_t(t_n), dtype=float)
    Am = np.asarray(A_of_t(t_n + dt / 2), dtype=float)
    A1 = np.asarray(A_of_t(t_n + dt), dtype=float)
    eye = np.eye(A0.shape[0])
    K1 = A0
    K2 = Am @ (eye + dt / 2 * K1)
    K3 = Am @ (eye + dt / 2 * K2)
    K4 = A1 @ (eye + dt * K3)
    return TransitionMatrix(eye + dt / 6 * (K1 + 2 * K2 + 2 * K3 + K4), TransitionMethod.RK4)


def transition_matrix(sys: LtiErrorSystem, dt: float, method: TransitionMethod | str) -> TransitionMatrix:
    """Dispatch on ``method``; ``rk4`` here treats ``A`` as constant over the step."""
    method = TransitionMethod(method)
    if method is TransitionMethod.CLOSED:
        return transition_closed(sys, dt)
    if method is TransitionMethod.BLOCKWISE:
        return transition_blockwise(sys, dt)
    if method is TransitionMethod.RK4:
        return transition_rk4(lambda t: sys.A, 0.0, dt)
    order = {TransitionMethod.EULER: 1, TransitionMethod.TRUNC2: 2, TransitionMethod.TRUNC3: 3}
    return transition_truncated(sys, dt, order[method])


# ------------------------------------------------------------------ noise


def continuous_covariances(spec: NoiseSpec) -> tuple[np.ndarray, np.ndarray]:
    """``(Uᶜ, Wᶜ)``: measurement noise and perturbation spectral densities."""
    I3 = np.eye(3)
    Uc = np.zeros((6, 6))
    Uc[:3, :3] = spec.sigma_acc**2 * I3
    Uc[3:, 3:] = spec.sigma_gyro**2 * I3
    Wc = np.zeros((6, 6))
    Wc[:3, :3] = spec.sigma_acc_walk**2 * I3
    Wc[3:, 3:] = spec.sigma_gyro_walk**2 * I3
    return Uc, Wc


def discretize_noise(sys: LtiErrorSystem, spec: NoiseSpec, dt: float):
    """Return ``(U, W, Q)`` with ``U = Uᶜ``, ``W = WᶜΔt``, ``Q = Δt²BUᶜBᵀ + ΔtCWᶜCᵀ``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    Uc, Wc = continuous_covariances(spec)
    Q = dt**2 * sys.B @ Uc @ sys.B.T + dt * sys.C @ Wc @ sys.C.T
    return Uc, Wc * dt, Q


def impulse_jacobian() -> np.ndarray:
    """``F_i``: maps the 12 impulses (v, θ, a_b, ω_b) into the error state."""
    Fi = np.zeros((N_ERR, 12))
    Fi[3:15, :] = np.eye(12)
    return Fi


def impulse_covariance(spec: NoiseSpec, dt: float) -> np.ndarray:
    """``Q_i = diag(σ_ã²Δt², σ_ω̃²Δt², σ_aw²Δt, σ_ωw²Δt)`` per 3-axis block."""
    return np.diag(
        np.repeat(
            [
                spec.sigma_acc**2 * dt**2,
                spec.sigma_gyro**2 * dt**2,
                spec.sigma_acc_walk**2 * dt,
                spec.sigma_gyro_walk**2 * dt,
            ],
            3,
        )
    )
