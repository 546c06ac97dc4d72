"""Self-check suite behind ``qkin validate``.

Each group is a list of named checks that compare the library against an
independent oracle or an algebraic identity. The checks look functions up
through their modules at call time, so patching a module attribute is enough
to make the owning group fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import discretize, eskf, oracles, quat, rate_int, sim, slerp, so3


@dataclass
class CheckResult:
    group: str
    name: str
    passed: bool
    detail: str = ""


def _rng(seed=1234):
    return np.random.default_rng(seed)


def _rand_quat(rng, n=None):
    return quat.unit(rng.normal(size=(4,) if n is None else (n, 4)))


def _rand_rotvec(rng, max_angle=3.0):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * rng.uniform(1e-3, max_angle)


# ------------------------------------------------------------------ groups


def _quat_checks():
    rng = _rng()
    q = _rand_quat(rng, 1000)
    x = rng.normal(size=(1000, 3))

    def rotation_action():
        a = quat.rotate(q, x)
        b = np.einsum("nij,nj->ni", so3.quat_to_matrix(q), x)
        return float(np.max(np.linalg.norm(a - b, axis=1) / np.linalg.norm(x, axis=1)))

    def exp_log():
        worst = 0.0
        for _ in range(200):
            phi = _rand_rotvec(rng)
            worst = max(worst, float(np.max(np.abs(quat.to_rotvec(quat.from_rotvec(phi)) - phi))))
        return worst

    def product_matrices():
        p, r = _rand_quat(rng), _rand_quat(rng)
        pq = quat.qprod(p, r)
        return max(
            float(np.max(np.abs(quat.left_matrix(p) @ r - pq))),
            float(np.max(np.abs(quat.right_matrix(r) @ p - pq))),
        )

    return [
        ("rotation action matches R{q}x", rotation_action, 1e-12),
        ("Exp/Log round trip", exp_log, 1e-9),
        ("left/right product matrices", product_matrices, 1e-14),
    ]


def _so3_checks():
    rng = _rng(7)

    def exp_log():
        worst = 0.0
        for _ in range(200):
            phi = _rand_rotvec(rng)
            worst = max(worst, float(np.max(np.abs(so3.log_so3(so3.exp_so3(phi)) - phi))))
        return worst

    def quat_matrix_round_trip():
        q = quat.canonicalize(_rand_quat(rng))
        return float(np.max(np.abs(so3.matrix_to_quat(so3.quat_to_matrix(q)) - q)))

    def jac(fn, f, x0):
        J = fn()
        N = oracles.numerical_jacobian(f, x0, 1e-6)
        return float(np.linalg.norm(J - N) / max(np.linalg.norm(N), 1e-12))

    def right_jacobian():
        th = _rand_rotvec(rng, 2.0)
        R = so3.exp_so3(th)
        return jac(
            lambda: so3.right_jacobian(th),
            lambda d: so3.log_so3(R.T @ so3.exp_so3(th + d)),
            np.zeros(3),
        )

    def rotate_wrt_rotvec():
        th, a = _rand_rotvec(rng, 2.0), rng.normal(size=3)
        return jac(lambda: so3.jac_rotate_wrt_rotvec(th, a), lambda t: so3.exp_so3(t) @ a, th)

    def rotate_wrt_quat():
        q, a = _rand_quat(rng), rng.normal(size=3)
        return jac(lambda: so3.jac_rotate_wrt_quat(q, a), lambda qq: quat.rotate(qq, a), q)

    return [
        ("Exp/Log round trip", exp_log, 1e-9),
        ("quaternion/matrix round trip", quat_matrix_round_trip, 1e-12),
        ("right Jacobian vs finite differences", right_jacobian, 1e-5),
        ("d(R a)/dθ vs finite differences", rotate_wrt_rotvec, 1e-5),
        ("d(q a q*)/dq vs finite differences", rotate_wrt_quat, 1e-5),
    ]


def _slerp_checks():
    rng = _rng(11)
    cases = [(_rand_quat(rng), _rand_quat(rng), rng.uniform()) for _ in range(200)]

    def agreement():
        worst = 0.0
        for q0, q1, t in cases:
            a = slerp.slerp_geodesic(q0, q1, t)
            b = slerp.slerp_trig(q0, q1, t)
            c = slerp.slerp_davis(q0, q1, t)
            worst = max(worst, float(np.max(np.abs(a - b))), float(np.max(np.abs(a - c))))
        return worst

    def endpoints():
        worst = 0.0
        for q0, q1, _ in cases[:50]:
            q0s, q1s = slerp.shortest_path(q0, q1)
            worst = max(
                worst,
                float(np.max(np.abs(slerp.slerp_geodesic(q0, q1, 0.0) - q0s))),
                float(np.max(np.abs(slerp.slerp_geodesic(q0, q1, 1.0) - q1s))),
            )
        return worst

    def constant_speed():
        q0, q1, _ = cases[0]
        ts = np.linspace(0, 1, 11)
        qs = [slerp.slerp_geodesic(q0, q1, t) for t in ts]
        steps = [oracles.rotation_angle_between(a, b) for a, b in zip(qs[:-1], qs[1:])]
        return float(np.ptp(steps))

    return [
        ("three methods agree", agreement, 1e-10),
        ("endpoints", endpoints, 1e-12),
        ("constant angular speed", constant_speed, 1e-10),
    ]


def _rate_int_checks():
    def omega(t):
        return np.array([math.sin(math.pi * t), 0.8 * math.cos(math.pi * t), 0.5 * math.sin(0.6 * math.pi * t)])

    def error(method, n, T=2.0):
        ts = np.linspace(0.0, T, n + 1)
        samples = [rate_int.RateSample(float(t), omega(t)) for t in ts]
        q = rate_int.integrate_stream(quat.identity(), samples, method)
        return oracles.rotation_angle_between(q, oracles.integrate_rate_fine(quat.identity(), omega, 0.0, T, 2000))

    def first_order_ratio():
        return error("first-order", 50) / error("first-order", 100)

    def constant_rate_exact():
        w = np.array([0.3, -0.2, 0.5])
        samples = [rate_int.RateSample(0.1 * k, w) for k in range(11)]
        q = rate_int.integrate_stream(quat.identity(), samples, "forward")
        return oracles.rotation_angle_between(q, quat.from_rotvec(w * 1.0))

    return [
        ("first-order convergence ratio", first_order_ratio, 3.5, "min"),
        ("constant rate integrates exactly", constant_rate_exact, 1e-12),
    ]


def _discretize_checks():
    rng = _rng(3)

    def sigma_series():
        worst = 0.0
        for phi in (1e-4, 1e-2, 0.3, 0.5):
            w = rng.normal(size=3)
            w *= phi / np.linalg.norm(w) / 0.01
            for n in range(4):
                ref = oracles.sigma_series_direct(w, 0.01, n)
                got = discretize.sigma_series(w, 0.01, n)
                worst = max(worst, float(np.linalg.norm(got - ref) / np.linalg.norm(ref)))
        return worst

    def closed_transition():
        x = eskf.NominalState(q=_rand_quat(rng))
        u = eskf.ImuSample(0.0, rng.normal(size=3) * 5, rng.normal(size=3))
        sys_ = eskf.build_error_dynamics(x, u, "local")
        ref = oracles.taylor_expm(sys_.A * 0.01, 30)
        return float(np.linalg.norm(discretize.transition_closed(sys_, 0.01).Phi - ref))

    def impulse_identity():
        x = eskf.NominalState(q=_rand_quat(rng))
        u = eskf.ImuSample(0.0, rng.normal(size=3), rng.normal(size=3))
        sys_ = eskf.build_error_dynamics(x, u, "local")
        spec = discretize.NoiseSpec(*rng.uniform(0.01, 1.0, size=4))
        Fi = discretize.impulse_jacobian()
        _, _, Q = discretize.discretize_noise(sys_, spec, 0.01)
        return float(np.max(np.abs(Fi @ discretize.impulse_covariance(spec, 0.01) @ Fi.T - Q)))

    return [
        ("Σₙ closed forms vs direct series", sigma_series, 1e-12),
        ("closed transition vs exponential", closed_transition, 1e-10),
        ("impulse covariance identity", impulse_identity, 1e-12),
    ]


def _eskf_checks():
    rng = _rng(5)

    def reset_jacobian():
        worst = 0.0
        for frame in ("local", "global"):
            dx = np.zeros(18)
            dx[6:9] = _rand_rotvec(rng) * 1e-3 / 3.0
            dq_hat = quat.from_rotvec(dx[6:9])

            def plus(dth):
                dq = quat.from_rotvec(dth)
                if frame == "local":
                    return quat.to_rotvec(quat.qprod(quat.conjugate(dq_hat), dq))
                return quat.to_rotvec(quat.qprod(dq, quat.conjugate(dq_hat)))

            N = oracles.numerical_jacobian(plus, dx[6:9], 1e-7)
            G = eskf.reset_jacobian(dx, frame)[6:9, 6:9]
            worst = max(worst, float(np.linalg.norm(G - N) / np.linalg.norm(N)))
        return worst

    def joseph_vs_simple():
        A = rng.normal(size=(18, 18))
        b = eskf.ErrorBelief(np.zeros(18), A @ A.T + np.eye(18))
        x = eskf.NominalState(q=_rand_quat(rng))
        m = eskf.position_fix(rng.normal(size=3), 0.3)
        a = eskf.correct(b, x, m, "local", joseph=True).P
        s = eskf.correct(b, x, m, "local", joseph=False).P
        return float(np.max(np.abs(a - s)) / np.max(np.abs(a)))

    def quat_error_jacobian():
        q = _rand_quat(rng)
        worst = 0.0
        for frame in ("local", "global"):
            def true_q(d):
                dq = quat.from_rotvec(d)
                return quat.qprod(q, dq) if frame == "local" else quat.qprod(dq, q)
            N = oracles.numerical_jacobian(true_q, np.zeros(3), 1e-6)
            worst = max(worst, float(np.max(np.abs(eskf.quat_error_jacobian(q, frame) - N))))
        return worst

    return [
        ("reset Jacobian vs finite differences", reset_jacobian, 1e-5),
        ("Joseph form equals simple form", joseph_vs_simple, 1e-9),
        ("Q_δθ vs finite differences", quat_error_jacobian, 1e-8),
    ]


def _sim_checks():
    def constant_rate_closure():
        spec = sim.TrajectorySpec(family="constant_rate", rate=(0, 0, 1.0), duration=2 * math.pi, imu_rate=100 / math.pi)
        truth = sim.generate_truth(spec)
        return oracles.rotation_angle_between(truth.q[0], truth.q[-1])

    def inversion():
        spec = sim.TrajectorySpec(family="sinusoid_varying_axis", duration=2.0)
        truth = sim.generate_truth(spec)
        b = ((0.1, -0.2, 0.3), (0.01, 0.02, -0.03))
        imu = sim.synthesize_imu(truth, discretize.NoiseSpec(), b, seed=0)
        worst = 0.0
        for i in range(0, len(truth), 20):
            a, w = sim.invert_imu(imu[i], truth.q[i], truth.g, np.array(b[0]), np.array(b[1]))
            worst = max(worst, float(np.max(np.abs(a - truth.a[i]))), float(np.max(np.abs(w - truth.w[i]))))
        return worst

    def determinism():
        truth = sim.generate_truth(sim.TrajectorySpec(duration=2.0))
        noise = discretize.NoiseSpec(0.1, 0.01, 0.01, 0.001)
        a = sim.synthesize_imu(truth, noise, seed=9)
        b = sim.synthesize_imu(truth, noise, seed=9)
        return float(max(np.max(np.abs(u.acc - v.acc)) + np.max(np.abs(u.gyro - v.gyro)) for u, v in zip(a, b)))

    return [
        ("constant-rate full turn closes", constant_rate_closure, 1e-9),
        ("noiseless IMU inversion", inversion, 1e-12),
        ("same seed gives identical stream", determinism, 0.0),
    ]


GROUPS: dict[str, Callable] = {
    "quat": _quat_checks,
    "so3": _so3_checks,
    "slerp": _slerp_checks,
    "rate_int": _rate_int_checks,
    "discretize": _discretize_checks,
    "eskf": _eskf_checks,
    "sim": _sim_checks,
}


def run_group(name: str) -> list[CheckResult]:
    if name not in GROUPS:
        raise KeyError(name)
    out = []
    for label, fn, tol, *kind in GROUPS[name]():
        at_least = kind == ["min"]
        try:
            value = fn()
            passed = bool(np.isfinite(value) and (value >= tol if at_least else value <= tol))
            detail = f"{value:.3g} ({'min' if at_least else 'max'} {tol:.3g})"
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, label, passed, detail))
    return out


def run(groups: list[str] | None = None) -> dict[str, list[CheckResult]]:
    names = list(GROUPS) if not groups else groups
    return {g: run_group(g) for g in names}
