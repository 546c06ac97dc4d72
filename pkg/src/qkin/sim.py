"""Synthetic trajectories, IMU and position-fix streams, and an end-to-end filter run.

Ground truth always starts at the origin with identity attitude. Every truth
quantity comes from a closed-form expression of ``t``, with derivatives taken
analytically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import quat, so3
from .discretize import N_ERR, TH, WB, NoiseSpec
from .eskf import (
    ESKF,
    STANDARD_GRAVITY,
    ErrorBelief,
    FilterConfig,
    GravityMode,
    ImuSample,
    NominalState,
    inject,
    position_fix,
    state_difference,
)

RNG_ID = "PCG64"
GAUSS_ID = "marsaglia-polar"
DIVERGENCE_LIMIT = 1e3


class Family(str, enum.Enum):
    STATIC = "static"
    CONSTANT_RATE = "constant_rate"
    SINUSOID_FIXED_AXIS = "sinusoid_fixed_axis"
    SINUSOID_VARYING_AXIS = "sinusoid_varying_axis"
    CIRCLE = "circle"


@dataclass
class TrajectorySpec:
    family: Family = Family.CIRCLE
    duration: float = 60.0  # s
    imu_rate: float = 100.0  # Hz
    fix_rate: float = 1.0  # Hz
    amplitude: float = 0.5  # rad/s, peak rate of the sinusoid families
    frequency: float = 0.2  # Hz
    axis: tuple = (0.0, 0.0, 1.0)
    rate: tuple = (0.0, 0.0, 0.1)  # rad/s, constant_rate family
    radius: float = 10.0  # m, circle
    angular_speed: float = 0.5  # rad/s, circle

    def __post_init__(self):
        self.family = Family(self.family)
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.fix_rate > 0:
            raise ValueError("fix_rate must be positive")
        if self.imu_rate < 2 * self.fix_rate:
            raise ValueError("imu_rate must be at least twice fix_rate")

    @property
    def dt(self) -> float:
        return 1.0 / self.imu_rate

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.imu_rate)) + 1


@dataclass
class GroundTruth:
    t: np.ndarray
    p: np.ndarray
    v: np.ndarray
    q: np.ndarray
    a: np.ndarray  # coordinate acceleration, world frame
    w: np.ndarray  # body angular rate
    g: np.ndarray = field(default_factory=lambda: STANDARD_GRAVITY.copy())

    def __len__(self):
        return len(self.t)

    def state(self, i: int, a_b=(0, 0, 0), w_b=(0, 0, 0)) -> NominalState:
        return NominalState(self.p[i], self.v[i], self.q[i], a_b, w_b, self.g)


@dataclass(frozen=True)
class FixSample:
    t: float
    z: np.ndarray
    sigma: float


# ------------------------------------------------------------ trajectories


def _axis(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("axis must be nonzero")
    return v / n


def _about(axis_index: int, angle: np.ndarray) -> np.ndarray:
    """Quaternions for rotations by ``angle`` about a coordinate axis."""
    out = np.zeros(angle.shape + (4,))
    out[..., 0] = np.cos(angle / 2)
    out[..., 1 + axis_index] = np.sin(angle / 2)
    return out


def generate_truth(spec: TrajectorySpec) -> GroundTruth:
    t = np.arange(spec.n_samples) / spec.imu_rate
    n = len(t)
    zeros = np.zeros((n, 3))
    p, v, a, w = zeros.copy(), zeros.copy(), zeros.copy(), zeros.copy()
    fam = spec.family
    if fam is Family.STATIC:
        q = quat.identity(n)
    elif fam is Family.CONSTANT_RATE:
        rate = np.asarray(spec.rate, dtype=float)
        q = quat.from_rotvec(t[:, None] * rate)
        w[:] = rate
    elif fam is Family.SINUSOID_FIXED_AXIS:
        u = _axis(spec.axis)
        k = 2 * math.pi * spec.frequency
        angle = spec.amplitude * (1 - np.cos(k * t)) / k
        q = quat.from_rotvec(angle[:, None] * u)
        w = (spec.amplitude * np.sin(k * t))[:, None] * u
    elif fam is Family.SINUSOID_VARYING_AXIS:
        # yaw α(t) followed by roll β(t) about the rotated x axis, so the
        # body-frame rate axis wanders as β changes
        k1 = 2 * math.pi * spec.frequency
        k2 = 0.6 * k1
        A = spec.amplitude
        alpha = A * (1 - np.cos(k1 * t)) / k1
        beta = A * (1 - np.cos(k2 * t)) / k2
        alpha_dot = A * np.sin(k1 * t)
        beta_dot = A * np.sin(k2 * t)
        q = quat.qprod(_about(2, alpha), _about(0, beta))
        # body rate = Rx(β)ᵀ α̇ e_z + β̇ e_x
        w[:, 0] = beta_dot
        w[:, 1] = alpha_dot * np.sin(beta)
        w[:, 2] = alpha_dot * np.cos(beta)
    elif fam is Family.CIRCLE:
        r, W = spec.radius, spec.angular_speed
        s, c = np.sin(W * t), np.cos(W * t)
        p[:, 0], p[:, 1] = r * s, r * (1 - c)
        v[:, 0], v[:, 1] = r * W * c, r * W * s
        a[:, 0], a[:, 1] = -r * W**2 * s, r * W**2 * c
        q = _about(2, W * t)
        w[:, 2] = W
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(fam)
    return GroundTruth(t, p, v, quat.unit(q), a, w)


# ------------------------------------------------------------------ noise


def polar_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` standard normal draws by the Marsaglia polar method."""
    out = np.empty(0)
    while out.size < n:
        need = n - out.size
        u = rng.random((max(need, 8), 2)) * 2.0 - 1.0
        s = np.sum(u * u, axis=1)
        ok = (s > 0.0) & (s < 1.0)
        u, s = u[ok], s[ok]
        f = np.sqrt(-2.0 * np.log(s) / s)
        out = np.concatenate([out, (u * f[:, None]).ravel()])
    return out[:n]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def synthesize_imu(
    truth: GroundTruth,
    spec: NoiseSpec,
    bias0=((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
    seed: int = 0,
    return_bias: bool = False,
):
    """Corrupt the truth into accelerometer and gyrometer readings.

    ``a_m = R_tᵀ(a_t - g) + a_b + a_n`` and ``ω_m = ω_t + ω_b + ω_n``. The
    biases random-walk by ``σ_w√Δt`` per step; the walk is applied before the
    sample it affects, and sample 0 sees ``bias0``.
    """
    n = len(truth)
    rng = make_rng(seed)
    draws = polar_normals(rng, 12 * n).reshape(n, 12)
    a_b = np.empty((n, 3))
    w_b = np.empty((n, 3))
    a_b[0], w_b[0] = bias0
    for i in range(1, n):
        dt = truth.t[i] - truth.t[i - 1]
        a_b[i] = a_b[i - 1] + spec.sigma_acc_walk * math.sqrt(dt) * draws[i, 6:9]
        w_b[i] = w_b[i - 1] + spec.sigma_gyro_walk * math.sqrt(dt) * draws[i, 9:12]
    R = so3.quat_to_matrix(truth.q)
    f = np.einsum("nji,nj->ni", R, truth.a - truth.g)
    acc = f + a_b + spec.sigma_acc * draws[:, 0:3]
    gyro = truth.w + w_b + spec.sigma_gyro * draws[:, 3:6]
    samples = [ImuSample(float(truth.t[i]), acc[i], gyro[i]) for i in range(n)]
    if return_bias:
        return samples, a_b, w_b
    return samples


def invert_imu(u: ImuSample, q_t, g, a_b, w_b) -> tuple[np.ndarray, np.ndarray]:
    """Isolate the true acceleration and body rate from noiseless readings."""
    R = so3.quat_to_matrix(q_t)
    return R @ (u.acc - a_b) + g, u.gyro - w_b


def fix_indices(truth: GroundTruth, rate: float) -> np.ndarray:
    """IMU grid indices nearest to the fix times ``k/rate``, ``k ≥ 1``."""
    if not rate > 0:
        raise ValueError("fix rate must be positive")
    t_end = truth.t[-1]
    times = np.arange(1, int(math.floor(t_end * rate + 1e-9)) + 1) / rate
    dt = truth.t[1] - truth.t[0] if len(truth) > 1 else 1.0
    idx = np.clip(np.rint((times - truth.t[0]) / dt).astype(int), 0, len(truth) - 1)
    return np.unique(idx)


def synthesize_fixes(truth: GroundTruth, sigma_fix: float, rate: float, seed: int = 1) -> list[FixSample]:
    if sigma_fix < 0:
        raise ValueError("sigma_fix must be non-negative")
    idx = fix_indices(truth, rate)
    rng = make_rng(seed)
    noise = polar_normals(rng, 3 * len(idx)).reshape(-1, 3)
    return [
        FixSample(float(truth.t[i]), truth.p[i] + sigma_fix * noise[k], sigma_fix)
        for k, i in enumerate(idx)
    ]


# ------------------------------------------------------------- experiment


@dataclass
class RunReport:
    ok: bool
    message: str
    t: np.ndarray
    states: list
    stds: np.ndarray
    rmse_position: float = float("nan")
    rmse_velocity: float = float("nan")
    rmse_attitude_deg: float = float("nan")
    final_attitude_error_deg: float = float("nan")
    nees: np.ndarray = field(default_factory=lambda: np.zeros(0))
    nees_band: tuple = (0.0, 0.0)
    acc_bias_error: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gyro_bias_error: np.ndarray = field(default_factory=lambda: np.zeros(3))
    final_P: np.ndarray | None = None

    @property
    def nees_pass_fraction(self) -> float:
        if self.nees.size == 0:
            return float("nan")
        lo, hi = self.nees_band
        return float(np.mean((self.nees >= lo) & (self.nees <= hi)))

    @property
    def gyro_bias_sigma(self) -> np.ndarray:
        return self.stds[-1, WB]

    @property
    def attitude_sigma(self) -> float:
        """Total 1σ attitude uncertainty, ``sqrt(trace(P_θθ))``, radians."""
        return float(np.sqrt(np.trace(self.final_P[TH, TH])))


def initial_nominal(
    truth: GroundTruth,
    config: FilterConfig,
    seed: int | None,
    bias0=((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
    belief: ErrorBelief | None = None,
) -> NominalState:
    """Filter start: the true state at ``t₀`` offset by one draw from P₀.

    ``bias0`` holds the true initial sensor biases. With ``seed=None`` the
    filter starts exactly on the truth, so the initial error really is
    distributed as the filter believes it to be only when a seed is given.
    """
    x0 = truth.state(0, *bias0)
    if config.gravity is GravityMode.CLASSICAL:
        x0.g = STANDARD_GRAVITY.copy()
    if seed is None:
        return x0
    belief = belief or config.initial_belief()
    rng = make_rng(seed)
    draw = polar_normals(rng, N_ERR) * belief.std
    return inject(x0, -draw, config.frame)


def _attitude_error_deg(q_true, q) -> float:
    d = quat.qprod(quat.conjugate(q_true), q)
    return math.degrees(2.0 * math.atan2(np.linalg.norm(d[1:]), abs(d[0])))


def run_filter(
    imu: list[ImuSample],
    fixes: list[FixSample],
    x0: NominalState,
    config: FilterConfig,
    truth: GroundTruth | None = None,
    true_bias=None,
) -> RunReport:
    """Drive the filter over an IMU stream, correcting at each fix.

    Fixes are matched to IMU samples by nearest timestamp. ``true_bias`` is an
    optional pair of ``(n, 3)`` arrays used for NEES and bias errors; without
    it the truth biases are taken as zero.
    """
    n = len(imu)
    if n < 2:
        raise ValueError("need at least two IMU samples")
    times = np.array([u.t for u in imu])
    fix_at = {}
    for f in fixes:
        j = int(np.argmin(np.abs(times - f.t)))
        fix_at[j] = f
    filt = ESKF(x0, config)
    states = [filt.x.copy()]
    stds = [filt.belief.std]
    nees = []
    dof = N_ERR if config.gravity is GravityMode.ESTIMATED else N_ERR - 3
    band = (float(stats.chi2.ppf(0.025, dof)), float(stats.chi2.ppf(0.975, dof)))
    ok, message = True, "ok"
    sq_p, sq_v, sq_a = [], [], []

    def truth_state(i):
        if true_bias is None:
            return truth.state(i)
        return truth.state(i, true_bias[0][i], true_bias[1][i])

    def score(i):
        x = filt.x
        xt = truth_state(i)
        sq_p.append(float(np.sum((x.p - xt.p) ** 2)))
        sq_v.append(float(np.sum((x.v - xt.v) ** 2)))
        sq_a.append(_attitude_error_deg(xt.q, x.q) ** 2)
        e = state_difference(xt, x, config.frame)
        P = filt.belief.P
        if dof < N_ERR:
            e, P = e[:dof], P[:dof, :dof]
        try:
            nees.append(float(e @ np.linalg.solve(P, e)))
        except np.linalg.LinAlgError:
            # NEES is undefined while the covariance is singular
            nees.append(float("nan"))
        return math.sqrt(sq_p[-1])

    if truth is not None:
        score(0)
    for i in range(n - 1):
        try:
            filt.propagate(imu[i], imu[i + 1])
            if i + 1 in fix_at:
                f = fix_at[i + 1]
                filt.update(position_fix(f.z, f.sigma))
        except (ValueError, np.linalg.LinAlgError) as exc:
            ok, message = False, f"filter failed at t={imu[i + 1].t:.6g}: {exc}"
            break
        states.append(filt.x.copy())
        stds.append(filt.belief.std)
        if truth is not None:
            err = score(i + 1)
            if not err <= DIVERGENCE_LIMIT:
                ok, message = False, f"diverged at t={imu[i + 1].t:.6g}: position error {err:.3g} m"
                break
    k = len(states)
    report = RunReport(ok, message, times[:k], states, np.array(stds), final_P=filt.belief.P.copy())
    if truth is not None:
        report.rmse_position = math.sqrt(np.mean(sq_p))
        report.rmse_velocity = math.sqrt(np.mean(sq_v))
        report.rmse_attitude_deg = math.sqrt(np.mean(sq_a))
        report.final_attitude_error_deg = math.sqrt(sq_a[-1])
        report.nees = np.array(nees)
        report.nees_band = band
        xt = truth_state(k - 1)
        report.acc_bias_error = filt.x.a_b - xt.a_b
        report.gyro_bias_error = filt.x.w_b - xt.w_b
    return report


@dataclass
class Experiment:
    truth: GroundTruth
    imu: list
    fixes: list
    acc_bias: np.ndarray
    gyro_bias: np.ndarray
    report: RunReport


def run_experiment(
    spec: TrajectorySpec,
    noise: NoiseSpec,
    config: FilterConfig,
    bias0=((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
    sigma_fix: float = 0.5,
    seed: int = 0,
    use_fixes: bool = True,
    perturb_initial: bool = True,
) -> Experiment:
    """Simulate, synthesize and filter in one call.

    The IMU, fix and initial-state draws use ``seed``, ``seed + 1`` and
    ``seed + 2``.
    """
    truth = generate_truth(spec)
    imu, a_b, w_b = synthesize_imu(truth, noise, bias0, seed, return_bias=True)
    fixes = synthesize_fixes(truth, sigma_fix, spec.fix_rate, seed + 1) if use_fixes else []
    x0 = initial_nominal(truth, config, seed + 2 if perturb_initial else None, bias0)
    report = run_filter(imu, fixes, x0, config, truth, (a_b, w_b))
    return Experiment(truth, imu, fixes, a_b, w_b, report)
