"""Command-line front end: ``qkin simulate | filter | validate``.

Exit codes: 0 on success, 1 when validation fails or the filter diverges,
2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import csvio, sim, validate
from .config import ConfigError, RunConfig, load_config
from .discretize import TransitionMethod
from .eskf import ErrorFrame, NominalState
from .rate_int import IntegratorMethod

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _header(cfg: RunConfig, **extra) -> dict:
    h = {"generator": "qkin", "rng": sim.RNG_ID, "gauss": sim.GAUSS_ID}
    h.update(extra)
    h.update(cfg.as_header())
    return h


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from exc
    return out


def cmd_simulate(cfg: RunConfig) -> int:
    spec = cfg.trajectory()
    out = _out_dir(cfg)
    truth = sim.generate_truth(spec)
    imu = sim.synthesize_imu(truth, cfg.noise(), cfg.bias0(), cfg.seed)
    fixes = sim.synthesize_fixes(truth, cfg.sigma_fix, spec.fix_rate, cfg.seed + 1)
    try:
        csvio.write_truth(out / cfg.truth_file, truth, _header(cfg, kind="truth"))
        csvio.write_imu(out / cfg.imu_file, imu, _header(cfg, kind="imu"))
        csvio.write_fixes(out / cfg.fix_file, fixes, _header(cfg, kind="fixes"))
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from exc
    print(
        f"simulated {spec.duration:g} s of {spec.family.value}: "
        f"{len(imu)} IMU samples, {len(fixes)} fixes, seed {cfg.seed} -> {out}"
    )
    return EXIT_OK


def _resolve(path_arg, out: Path, default_name: str) -> Path:
    return Path(path_arg) if path_arg else out / default_name


def cmd_filter(cfg: RunConfig, imu_path=None, fix_path=None, truth_path=None) -> int:
    out = Path(cfg.out_dir)
    imu_file = _resolve(imu_path, out, cfg.imu_file)
    if not imu_file.is_file():
        raise UsageError(f"IMU file not found: {imu_file}")
    imu = csvio.read_imu(imu_file)

    fixes = []
    fix_file = _resolve(fix_path, out, cfg.fix_file)
    if fix_path is not None and not fix_file.is_file():
        raise UsageError(f"fix file not found: {fix_file}")
    if fix_file.is_file():
        fixes = csvio.read_fixes(fix_file, cfg.sigma_fix)

    truth = None
    truth_file = _resolve(truth_path, out, cfg.truth_file)
    if truth_path is not None and not truth_file.is_file():
        raise UsageError(f"truth file not found: {truth_file}")
    if truth_file.is_file():
        truth = csvio.read_truth(truth_file)
        if len(truth) != len(imu):
            raise UsageError(f"truth has {len(truth)} rows but IMU has {len(imu)}")

    fcfg = cfg.filter_config()
    if truth is not None:
        seed = cfg.seed + 2 if cfg.perturb_initial else None
        x0 = sim.initial_nominal(truth, fcfg, seed, cfg.bias0())
        # bias history is not stored in CSV; score against the initial biases
        n = len(imu)
        true_bias = (np.tile(cfg.acc_bias0, (n, 1)), np.tile(cfg.gyro_bias0, (n, 1)))
    else:
        x0 = NominalState(p=fixes[0].z if fixes else np.zeros(3))
        true_bias = None
    report = sim.run_filter(imu, fixes, x0, fcfg, truth, true_bias)

    trace = _out_dir(cfg) / cfg.trace_file
    csvio.write_trace(trace, report.t, report.states, report.stds, _header(cfg, kind="trace"))
    x = report.states[-1]
    print(f"filter: frame={fcfg.frame.value} transition={fcfg.transition.value} integrator={fcfg.integrator.value}")
    print(f"  steps:               {len(report.states)}  fixes used: {len(fixes)}")
    if truth is not None:
        print(f"  RMSE position:       {report.rmse_position:.6g} m")
        print(f"  RMSE velocity:       {report.rmse_velocity:.6g} m/s")
        print(f"  RMSE attitude:       {report.rmse_attitude_deg:.6g} deg")
        print(f"  NEES pass fraction:  {report.nees_pass_fraction:.4f}")
    print(f"  final acc bias:      {np.array2string(x.a_b, precision=6)}")
    print(f"  final gyro bias:     {np.array2string(x.w_b, precision=6)}")
    print(f"  trace:               {trace}")
    if not report.ok:
        print(f"error: {report.message}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_validate(groups=None) -> int:
    unknown = [g for g in groups or [] if g not in validate.GROUPS]
    if unknown:
        raise UsageError(f"unknown group(s) {unknown}; choose from {list(validate.GROUPS)}")
    results = validate.run(groups)
    all_ok = True
    for group, checks in results.items():
        ok = all(c.passed for c in checks)
        all_ok &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] {group}")
        for c in checks:
            print(f"    {'ok  ' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    return EXIT_OK if all_ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="key=value config file")
    common.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--seed", metavar="N", type=int, default=argparse.SUPPRESS, help="base random seed")

    parser = argparse.ArgumentParser(prog="qkin", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="write truth, IMU and fix CSVs")

    f = sub.add_parser("filter", parents=[common], help="run the filter over CSV inputs")
    f.add_argument("--imu", metavar="PATH")
    f.add_argument("--fixes", metavar="PATH")
    f.add_argument("--truth", metavar="PATH")
    f.add_argument("--frame", choices=[m.value for m in ErrorFrame])
    f.add_argument("--transition", choices=[m.value for m in TransitionMethod])
    f.add_argument("--integrator", choices=[m.value for m in IntegratorMethod])

    v = sub.add_parser("validate", parents=[common], help="run the self-check suite")
    v.add_argument("--group", action="append", metavar="NAME", help="run only this group (repeatable)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {}
        if getattr(args, "out", None) is not None:
            overrides["out_dir"] = args.out
        if getattr(args, "seed", None) is not None:
            overrides["seed"] = args.seed
        for key in ("frame", "transition", "integrator"):
            if getattr(args, key, None) is not None:
                overrides[key] = getattr(args, key)
        config_path = getattr(args, "config", None)
        if config_path is not None and not Path(config_path).is_file():
            raise UsageError(f"config file not found: {config_path}")
        cfg = load_config(config_path, overrides)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "filter":
            return cmd_filter(cfg, args.imu, args.fixes, args.truth)
        return cmd_validate(args.group)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except csvio.SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
