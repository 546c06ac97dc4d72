"""Accuracy of the error-state transition matrices against a Taylor oracle.

For a sweep of step sizes, prints the Frobenius error of every transition
method on a random IMU operating point in both angular-error frames.
"""

import argparse

import numpy as np

from qkin import discretize as D
from qkin import eskf, oracles, quat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rate", type=float, default=1.0, help="angular rate magnitude, rad/s")
    ap.add_argument("--acc", type=float, default=9.8, help="specific force magnitude, m/s²")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    w = rng.normal(size=3)
    w *= args.rate / np.linalg.norm(w)
    a = rng.normal(size=3)
    a *= args.acc / np.linalg.norm(a)
    x = eskf.NominalState(q=quat.unit(rng.normal(size=4)))
    methods = list(D.TransitionMethod)
    for frame in eskf.ErrorFrame:
        sys_ = eskf.build_error_dynamics(x, eskf.ImuSample(0.0, a, w), frame)
        print(f"\n{frame.value} frame")
        print(f"{'dt':>8}" + "".join(f"{m.value:>12}" for m in methods))
        for dt in (0.1, 0.03, 0.01, 0.003, 0.001):
            oracle = oracles.taylor_expm(sys_.A * dt)
            errs = [np.linalg.norm(D.transition_matrix(sys_, dt, m).Phi - oracle) for m in methods]
            print(f"{dt:8.3f}" + "".join(f"{e:12.2e}" for e in errs))


if __name__ == "__main__":
    main()
