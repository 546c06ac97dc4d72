"""Convergence of the quaternion rate integrators on a varying-axis sinusoid.

Prints the final attitude error against a fine RK4 reference for a sequence
of halved steps, and the ratio between consecutive errors (≈2 for a first
order method, ≈4 for a second order one).
"""

import argparse

import numpy as np

from qkin import oracles, quat, rate_int, sim


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=5.0)
    ap.add_argument("--dt", type=float, default=0.1, help="coarsest step, s")
    ap.add_argument("--levels", type=int, default=5)
    args = ap.parse_args()

    spec = sim.TrajectorySpec(family="sinusoid_varying_axis", duration=args.duration, imu_rate=1000.0)
    truth = sim.generate_truth(spec)
    A, k1 = spec.amplitude, 2 * np.pi * spec.frequency
    k2 = 0.6 * k1

    def omega(t):
        beta = A * (1 - np.cos(k2 * t)) / k2
        ad, bd = A * np.sin(k1 * t), A * np.sin(k2 * t)
        return np.array([bd, ad * np.sin(beta), ad * np.cos(beta)])

    # the analytic truth doubles as a check on the fine reference
    ref = oracles.integrate_rate_fine(quat.identity(), omega, 0.0, args.duration, 100_000)
    print(f"reference vs analytic truth: {oracles.rotation_angle_between(ref, truth.q[-1]):.2e} rad")

    methods = [m.value for m in rate_int.IntegratorMethod]
    print(f"{'dt':>10}" + "".join(f"{m:>24}" for m in methods))
    prev = None
    for level in range(args.levels):
        dt = args.dt / 2**level
        n = int(round(args.duration / dt))
        samples = [rate_int.RateSample(k * dt, omega(k * dt)) for k in range(n + 1)]
        errs = [oracles.rotation_angle_between(rate_int.integrate_stream(quat.identity(), samples, m), ref)
                for m in methods]
        cells = []
        for i, e in enumerate(errs):
            ratio = f"({prev[i] / e:4.2f})" if prev else " " * 6
            cells.append(f"{e:16.3e} {ratio}")
        print(f"{dt:10.5f}" + "".join(f"{c:>24}" for c in cells))
        prev = errs


if __name__ == "__main__":
    main()
