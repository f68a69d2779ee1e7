"""Command-line entry point.

    stirap-pmp {spectrum,simulate,optimize,gradcheck,scan1d,scan2d} --config run.json [options]

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 gradient check failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from .chain import basis
from .config import ConfigError, RunConfig, load_config
from .dynamics import DivergenceError, populations, propagate
from .export import trajectory_rows, write_csv, write_json
from .optimizer import PulseScaling, optimize_pulses
from .pmp import StepSizeError, gradient_descent, objective, parameter_gradient
from .pulses import PARAM_NAMES, GaussianParams
from .robustness import NOMINAL, protocol_duration, scan_1d, scan_2d
from .transmon import spectrum_coefficients

log = logging.getLogger("stirap_pmp")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3
BACKENDS = ("trust-region", "gradient-descent")


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out or cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _resolve_params(source, cfg: RunConfig) -> GaussianParams:
    if source in (None, "initial"):
        return cfg.initial_params()
    if source == "optimized":
        p = cfg.optimized_params()
        if p is None:
            raise ConfigError("config has no 'optimized_pulses' section")
        return p
    path = Path(source)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read pulse parameters from {path}: {exc}") from exc
    data = data.get("params", data)
    try:
        return GaussianParams(**{k: data[k] for k in PARAM_NAMES})
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad pulse parameters in {path}: {exc}") from exc


def _simulate(cfg: RunConfig, params: GaussianParams, grid, system):
    weights = cfg.cost_weights()
    traj = propagate(system, params, grid, basis(system.dimension, 0))
    record = populations(traj, target=weights.target)
    rep = objective(system, params, weights, grid)
    summary = {
        "fidelity": record.fidelity,
        "max_leakage": record.max_leakage,
        "duration_effective": protocol_duration(params, grid.duration),
        "objective": rep.total,
        "terminal_cost": rep.terminal,
        "running_cost": rep.running,
        "final_norm": float(np.linalg.norm(traj.final)),
        "params": params.as_dict(),
        "grid": {"duration": grid.duration, "steps": grid.steps},
    }
    return traj, record, summary


def cmd_spectrum(args, cfg: RunConfig) -> int:
    spec = cfg.transmon_spec()
    spectrum, frame = cfg.frame_spec()
    a, b, c = spectrum_coefficients(spec)
    w = spectrum.transitions
    rows = []
    for n in range(spectrum.level_count):
        rows.append({
            "n": n,
            "E_n": spectrum.energies[n],
            "omega_next": w[n] if n < len(w) else float("nan"),
            "anharmonicity": (w[n + 1] - w[n]) if n + 1 < len(w) else float("nan"),
            "omega_n0": spectrum.cumulative[n],
            "nu_n": frame.reference[n],
            "Delta_n": frame.detunings[n],
            "xi": spec.xi,
        })
    out = _out_dir(args, cfg)
    write_csv(out / "spectrum.csv", rows)
    write_json(out / "spectrum.json", {"coefficients": {"a": a, "b": b, "c": c}, "omega0": spec.omega0,
                                        "xi": spec.xi, "omega_p": frame.omega_p, "omega_s": frame.omega_s})
    print(f"{'n':>2} {'E_n':>14} {'w_n+1,n':>14} {'anharm':>12} {'Delta_n':>14}")
    for r in rows:
        print(f"{r['n']:>2} {r['E_n']:>14.8f} {r['omega_next']:>14.8f} {r['anharmonicity']:>12.8f} "
              f"{r['Delta_n']:>14.8f}")
    return EXIT_OK


def cmd_simulate(args, cfg: RunConfig) -> int:
    system = cfg.system()
    grid = cfg.time_grid(system)
    params = _resolve_params(args.params, cfg)
    traj, record, summary = _simulate(cfg, params, grid, system)
    out = _out_dir(args, cfg)
    header, rows = trajectory_rows(traj, record)
    write_csv(out / "trajectory.csv", rows, header)
    write_json(out / "summary.json", summary)
    print(f"fidelity {summary['fidelity']:.6f}  max leakage {summary['max_leakage']:.6f}  "
          f"T_eff {summary['duration_effective']:.2f} ns")
    return EXIT_OK


def cmd_optimize(args, cfg: RunConfig) -> int:
    system = cfg.system()
    grid = cfg.time_grid(system)
    weights = cfg.cost_weights()
    p0 = cfg.initial_params()
    backend = args.backend or "trust-region"
    out = _out_dir(args, cfg)
    start = time.perf_counter()
    if backend == "trust-region":
        params, history = optimize_pulses(system, p0, weights, grid, cfg.trust_region())
        rows = [rec.as_row() for rec in history]
    else:
        gd = dict(cfg.gradient_descent)
        if gd.get("max_iter", 100) == 0:
            params, rows = p0, []
        else:
            scale = PulseScaling(grid.duration).factors
            params, logbook = gradient_descent(system, p0, weights, grid, eta=gd.get("eta", 1e-3),
                                               tol=gd.get("tol", 1e-8), max_iter=gd.get("max_iter", 100),
                                               scale=scale)
            rows = list(logbook.rows())
    elapsed = time.perf_counter() - start
    if rows:
        write_csv(out / "convergence.csv", rows)
    else:
        write_csv(out / "convergence.csv", [], ["iter", "f"])
    _, rec0, sum0 = _simulate(cfg, p0, grid, system)
    _, rec1, sum1 = _simulate(cfg, params, grid, system)
    for name, params_i, rec in (("initial", p0, rec0), ("optimized", params, rec1)):
        traj = propagate(system, params_i, grid, basis(system.dimension, 0))
        header, trows = trajectory_rows(traj, rec)
        write_csv(out / f"simulate_{name}.csv", trows, header)
    write_json(out / "optimized_params.json", {"params": params.as_dict(), "backend": backend})
    write_json(out / "summary.json", {
        "backend": backend,
        "backends_available": list(BACKENDS),
        "elapsed_s": elapsed,
        "initial": sum0,
        "optimized": sum1,
    })
    print(f"[{backend}] fidelity {sum0['fidelity']:.6f} -> {sum1['fidelity']:.6f}  "
          f"max leakage {sum0['max_leakage']:.6f} -> {sum1['max_leakage']:.6f}")
    return EXIT_OK


def gradient_check(system, params, weights, grid, rel_tol=1e-5, abs_tol=1e-8, corrupt=False):
    """Rows comparing adjoint and central-difference gradients, plus overall pass flag."""
    analytic = parameter_gradient(system, params, weights, grid).gradient.copy()
    if corrupt:
        analytic *= 1.01
        analytic[0] += 1e-3
    x = params.as_array()
    rows, ok = [], True
    for i, name in enumerate(PARAM_NAMES):
        step = 1e-5 * max(abs(x[i]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[i] += step
        xm[i] -= step
        fd = (objective(system, GaussianParams.from_array(xp), weights, grid).total
              - objective(system, GaussianParams.from_array(xm), weights, grid).total) / (2 * step)
        abs_err = abs(analytic[i] - fd)
        rel_err = abs_err / abs(fd) if fd != 0 else float("inf")
        passed = abs_err <= abs_tol or rel_err <= rel_tol
        ok &= passed
        rows.append({"param": name, "analytic": analytic[i], "finite_difference": fd,
                     "abs_error": abs_err, "rel_error": rel_err, "pass": int(passed)})
    return rows, ok


def cmd_gradcheck(args, cfg: RunConfig) -> int:
    system = cfg.system()
    grid = cfg.time_grid(system)
    rows, ok = gradient_check(system, cfg.initial_params(), cfg.cost_weights(), grid,
                              rel_tol=args.tol, corrupt=args.corrupt_gradient)
    out = _out_dir(args, cfg)
    write_csv(out / "gradcheck.csv", rows)
    for r in rows:
        print(f"{r['param']:>8} {r['analytic']:>+.10e} {r['finite_difference']:>+.10e} "
              f"abs {r['abs_error']:.2e} rel {r['rel_error']:.2e} {'ok' if r['pass'] else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK


def _protocols(args, cfg):
    p_init = cfg.initial_params()
    if args.optimized:
        return p_init, _resolve_params(args.optimized, cfg)
    p_opt = cfg.optimized_params()
    if p_opt is None:
        raise ConfigError("scans need optimized pulses: set 'optimized_pulses' or pass --optimized")
    return p_init, p_opt


def _write_scan(out, result, stem):
    header = list(result.knobs) + ["F_init", "F_opt", "I", "capped", "error"]
    write_csv(out / f"{stem}.csv", result.rows(), header)
    write_json(out / f"{stem}.json", {"knobs": result.knobs, "axes": result.axes, "shape": result.shape,
                                       "metadata": result.metadata,
                                       "capped_points": int(np.sum(result.capped)),
                                       "failed_points": sum(1 for e in result.errors if e)})


def cmd_scan1d(args, cfg: RunConfig) -> int:
    scan = cfg.scan1d or {}
    if "knob" not in scan or "values" not in scan:
        raise ConfigError("scan1d needs 'knob' and 'values'")
    if scan["knob"] not in NOMINAL:
        raise ConfigError(f"unknown knob {scan['knob']!r}")
    p_init, p_opt = _protocols(args, cfg)
    result = scan_1d(cfg.setup(), p_init, p_opt, scan["knob"], scan["values"], workers=args.workers)
    _write_scan(_out_dir(args, cfg), result, "scan1d")
    print(f"scan1d {scan['knob']}: {len(result.points)} points, I > 1 at "
          f"{int(np.sum(result.improvement > 1))}")
    return EXIT_OK


def cmd_scan2d(args, cfg: RunConfig) -> int:
    scan = cfg.scan2d or {}
    if "knobs" not in scan or "values" not in scan:
        raise ConfigError("scan2d needs 'knobs' and 'values'")
    for k in scan["knobs"]:
        if k not in NOMINAL:
            raise ConfigError(f"unknown knob {k!r}")
    p_init, p_opt = _protocols(args, cfg)
    result = scan_2d(cfg.setup(), p_init, p_opt, tuple(scan["knobs"]), tuple(scan["values"]),
                     workers=args.workers)
    _write_scan(_out_dir(args, cfg), result, "scan2d")
    print(f"scan2d {tuple(scan['knobs'])}: {result.shape}")
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "gradcheck": cmd_gradcheck,
    "scan1d": cmd_scan1d,
    "scan2d": cmd_scan2d,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key by dotted path; repeatable")
    common.add_argument("--backend", choices=BACKENDS, help="optimisation backend")
    common.add_argument("--workers", type=int, default=None, help="worker processes for scans")

    parser = argparse.ArgumentParser(prog="stirap-pmp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="transmon levels and detunings")
    sim = sub.add_parser("simulate", parents=[common], help="propagate one protocol")
    sim.add_argument("--params", default="initial",
                     help="'initial', 'optimized' or a JSON file of pulse parameters")
    sub.add_parser("optimize", parents=[common], help="optimise the Gaussian pulse parameters")
    gc = sub.add_parser("gradcheck", parents=[common], help="adjoint vs finite-difference gradient")
    gc.add_argument("--tol", type=float, default=1e-5, help="relative tolerance")
    gc.add_argument("--corrupt-gradient", action="store_true", help=argparse.SUPPRESS)
    for name in ("scan1d", "scan2d"):
        sp = sub.add_parser(name, parents=[common], help=f"{name[-2:]} robustness scan")
        sp.add_argument("--optimized", help="optimized_params.json from the optimize command")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("STIRAP_PMP_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, FloatingPointError, StepSizeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
