"""Command-line entry point ``siqnet``.

Parameter precedence, lowest to highest: ``--preset``, ``--config`` file,
repeated ``--param key=value`` flags. Dedicated flags such as ``--seed`` and
``--backbone`` override same-named keys in the config file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import engine, harness, meanfield, netgen, spectral
from .errors import SiqnetError
from .estimator import EstimationConfig, estimate_threshold
from .params import (ModelParams, covid_params, fig1_params, fig3_params, params_from_mapping,
                     read_config, validate)
from .trajectory import mean_trajectory

PRESETS = {"covid": covid_params, "fig1": fig1_params, "fig3": fig3_params}
# non-model keys a config file may carry alongside the parameters
RUN_KEYS = ("seed", "backbone", "jobs", "horizon", "replicates", "initial_infected")


def _parse_assignments(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def resolve(args) -> tuple[ModelParams, dict[str, str]]:
    """Model parameters and run settings after applying the precedence chain."""
    base = PRESETS[args.preset]()
    file_values = read_config(args.config) if args.config else {}
    run = {k: file_values.pop(k) for k in RUN_KEYS if k in file_values}
    run.setdefault("seed", "0")
    values = dict(file_values)
    values.update(_parse_assignments(args.param))
    p = params_from_mapping(values, base)
    for key in RUN_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            run[key] = str(flag)
    return p, run


def _seed(run) -> int:
    return int(run.get("seed", 0))


def _backbone(run, p: ModelParams):
    spec = run.get("backbone", "complete")
    if spec in ("complete", ""):
        return spec, None
    return spec, netgen.parse_spec(spec, p.n, _seed(run))


def _emit(text: str, out: str | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).mkdir(parents=True, exist_ok=True)
    path = Path(out) / name
    path.write_text(text)
    print(path)


def _header(p: ModelParams, run: dict[str, str]) -> str:
    extra = " ".join(f"{k}={v}" for k, v in sorted(run.items()))
    return f"{p.describe()}\n{extra}".rstrip()


def _axis(text: str) -> tuple[str, np.ndarray]:
    """``name=lo:hi:count`` or ``name=a,b,c``."""
    name, _, spec = text.partition("=")
    if ":" in spec:
        lo, hi, count = spec.split(":")
        return name, np.round(np.linspace(float(lo), float(hi), int(count)), 12)
    return name, np.array([float(s) for s in spec.split(",")])


def cmd_simulate(args) -> int:
    p, run = resolve(args)
    label, bb = _backbone(run, p)
    seed = _seed(run)
    reps = int(run.get("replicates", 1))
    children = np.random.SeedSequence(seed).spawn(reps) if reps > 1 else [seed]
    trajs = [engine.simulate(p, bb, horizon=float(run.get("horizon", 200.0)),
                             sample_interval=args.interval,
                             initial_infected=int(run.get("initial_infected", 10)),
                             severe_fraction=args.severe_fraction, seed=s) for s in children]
    traj = trajs[0] if reps == 1 else mean_trajectory(trajs)
    _emit(traj.to_csv(comment=_header(p, run)), args.out, "simulate.csv")
    return 0


def cmd_meanfield(args) -> int:
    p, run = resolve(args)
    horizon = float(run.get("horizon", 200.0))
    frac = args.initial_fraction
    if args.system == "macro":
        init = meanfield.seeded_state(p, frac)
        traj = meanfield.integrate("macro", init, p.replace(n=None), horizon, args.dt, args.interval)
    else:
        from .params import population_split

        init = meanfield.MicroState.seeded(population_split(validate(p)), frac)
        traj = meanfield.integrate("micro", init, p, horizon, args.dt, args.interval)
    _emit(traj.to_csv(comment=_header(p, run) + f"\nsystem={args.system} dt={args.dt:g}"),
          args.out, f"meanfield_{args.system}.csv")
    return 0


def cmd_threshold(args) -> int:
    p, run = resolve(args)
    if args.x is None:
        _emit("\n".join(spectral.threshold_report(p).lines()) + "\n", args.out, "threshold.txt")
        return 0
    xn, xs = _axis(args.x)
    yn, ys = _axis(args.y) if args.y else (None, ())
    spec = harness.SweepSpec(p, xn, xs, "threshold_analytic", y_name=yn, y_values=ys,
                             master_seed=_seed(run))
    _emit(harness.run_sweep(spec).to_csv(), args.out, "threshold_grid.csv")
    return 0


def cmd_estimate(args) -> int:
    p, run = resolve(args)
    label, bb = _backbone(run, p)
    cfg = EstimationConfig(
        horizon=float(run.get("horizon", 200.0)),
        replicates=int(run.get("replicates", 10)),
        initial_infected=int(run.get("initial_infected", 10)),
        tau_lo=args.tau_lo, tau_hi=args.tau_hi, step=args.step, fine_step=args.fine_step,
        master_seed=_seed(run), jobs=int(run.get("jobs", 1)),
    )
    est = estimate_threshold(p, bb, cfg)
    _emit(est.to_csv(comment=_header(p, run)), args.out, "estimate.csv")
    return 0


def cmd_sweep(args) -> int:
    p, run = resolve(args)
    label = run.get("backbone", "complete")
    xn, xs = _axis(args.x)
    yn, ys = _axis(args.y) if args.y else (None, ())
    spec = harness.SweepSpec(
        p, xn, xs, args.metric, y_name=yn, y_values=ys, backbone=label,
        horizon=float(run.get("horizon", 200.0)), replicates=int(run.get("replicates", 10)),
        initial_infected=int(run.get("initial_infected", 10)), master_seed=_seed(run),
        jobs=int(run.get("jobs", 1)),
    )
    _emit(harness.run_sweep(spec).to_csv(), args.out, "sweep.csv")
    return 0


def cmd_reproduce(args) -> int:
    out = args.out or "results"
    bundle = harness.reproduce(args.figure, out, scale=args.scale, seed=args.seed or 0,
                               jobs=args.jobs or 1, svg=args.svg)
    for path in bundle.files.values():
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value parameter file")
    common.add_argument("--preset", choices=sorted(PRESETS), default="covid",
                        help="base parameter set (default: covid)")
    common.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="override one parameter; repeatable")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--out", help="output directory; stdout when omitted")
    common.add_argument("--jobs", type=int, help="worker threads")
    common.add_argument("--backbone", help="complete | er:<p> | ba:<m>")
    common.add_argument("--horizon", type=float)
    common.add_argument("--replicates", type=int)
    common.add_argument("--initial-infected", dest="initial_infected", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="siqnet", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run the stochastic engine")
    s.add_argument("--interval", type=float, default=1.0)
    s.add_argument("--severe-fraction", dest="severe_fraction", type=float, default=0.0)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("meanfield", parents=[common], help="integrate the mean-field ODEs")
    s.add_argument("--system", choices=("macro", "micro"), default="macro")
    s.add_argument("--dt", type=float, default=0.01)
    s.add_argument("--interval", type=float, default=1.0)
    s.add_argument("--initial-fraction", dest="initial_fraction", type=float, default=0.01)
    s.set_defaults(func=cmd_meanfield)

    s = sub.add_parser("threshold", parents=[common], help="closed-form threshold report or grid")
    s.add_argument("--x", help="grid axis name=lo:hi:count")
    s.add_argument("--y", help="second grid axis")
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("estimate", parents=[common], help="Monte Carlo threshold scan")
    s.add_argument("--tau-lo", dest="tau_lo", type=float, default=0.0)
    s.add_argument("--tau-hi", dest="tau_hi", type=float, default=0.2)
    s.add_argument("--step", type=float, default=0.02)
    s.add_argument("--fine-step", dest="fine_step", type=float, default=0.005)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("sweep", parents=[common], help="evaluate a metric on a 1-D or 2-D grid")
    s.add_argument("--x", required=True)
    s.add_argument("--y")
    s.add_argument("--metric", choices=harness.METRICS, default="threshold_analytic")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("reproduce", parents=[common], help="write a figure's CSV bundle")
    s.add_argument("figure", choices=harness.FIGURES)
    s.add_argument("--scale", type=float, default=1.0, help="shrink n, replicates and grids")
    s.add_argument("--svg", action="store_true", help="also render SVG plots")
    s.set_defaults(func=cmd_reproduce)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SiqnetError, ValueError, KeyError) as exc:
        print(f"siqnet: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
