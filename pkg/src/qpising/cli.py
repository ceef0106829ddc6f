"""Command-line interface.

Verbs: ``sweep`` (run a (W, t) grid and write CSV series), ``fit`` (power-law
and log fits over a series file), ``compare`` (sv vs mps cross-validation),
``lattice export`` and ``circuit export`` (JSON documents).  The default
output directory comes from $QPISING_OUTDIR (falling back to the working
directory).  Exit codes: 0 success, 2 configuration error, 3 capacity error,
4 numerical-invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .circuit import FloquetParams, build_floquet_cycle, repeat_cycles, transpile_to_clifford_set
from .errors import CapacityError, ConfigError, NumericalInvariantError
from .lattice import QpFieldParams, assign_qp_fields
from .sv import NoiseSpec
from .sweep import (
    OUTDIR_ENV,
    SweepConfig,
    SweepInterrupted,
    build_lattice,
    compare_backends,
    default_cycles,
    run_fits,
    run_sweep,
)


def _parse_noise(text: str, trajectories: int, seed: int) -> NoiseSpec:
    """none | depol:LAMBDA | pauli:P2[,P1]"""
    if text == "none":
        return NoiseSpec()
    kind, _, args = text.partition(":")
    try:
        if kind == "depol":
            return NoiseSpec(mode="depolarizing", lam=float(args), seed=seed)
        if kind == "pauli":
            parts = [float(x) for x in args.split(",")]
            p2 = parts[0]
            p1 = parts[1] if len(parts) > 1 else 0.0
            return NoiseSpec(mode="pauli", p1=p1, p2=p2, trajectories=trajectories, seed=seed)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"bad noise spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown noise kind {kind!r} (use none, depol:L, pauli:P2[,P1])")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("chain", "heavyhex", "coupling_map"), default=None)
    p.add_argument("--n", type=int, default=None, help="chain length")
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--coupling-map", default=None, help="lattice/coupling-map JSON file")


def _sweep_config(args) -> SweepConfig:
    overrides = {
        "model": args.model,
        "n": args.n,
        "rows": args.rows,
        "cols": args.cols,
        "coupling_map": args.coupling_map,
        "backend": args.backend,
        "chi": args.chi,
        "shots": args.shots,
        "seed": args.seed,
        "omega0": args.omega0,
        "beta": args.beta,
        "out_dir": args.out_dir,
        "run_id": args.run_id,
        "jobs": args.jobs,
    }
    if args.w is not None:
        overrides["w_list"] = tuple(args.w)
    if args.t_max is not None:
        overrides["cycles"] = tuple(default_cycles(args.t_max))
    if args.record is not None:
        overrides["cycles"] = tuple(args.record)
    if args.noise is not None:
        overrides["noise"] = _parse_noise(args.noise, args.trajectories, args.seed or 0)
    if args.hardware_faithful:
        overrides["hardware_faithful"] = True
    if args.allow_large:
        overrides["allow_large"] = True
    if args.checkpoint:
        overrides["checkpoint"] = True
    if args.config:
        return SweepConfig.from_file(args.config, **overrides)
    required = {k: overrides.get(k) for k in ("w_list", "cycles")}
    missing = [k for k, v in required.items() if not v]
    if missing:
        raise ConfigError(f"missing {missing}: give --config or --w with --t-max/--record")
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return SweepConfig.from_dict(overrides)


def _cmd_sweep(args) -> int:
    config = _sweep_config(args)
    result = run_sweep(config, interrupt_after_records=args.interrupt_after_records)
    print(f"run {result['run_id']}: {result['rows']} rows")
    print(f"  raw:       {result['raw']}")
    print(f"  aggregate: {result['aggregate']}")
    return 0


def _cmd_fit(args) -> int:
    models = tuple(args.models.split(","))
    w_window = tuple(args.w_window) if args.w_window else None
    t_window = tuple(args.t_window) if args.t_window else None
    out = args.out or (os.path.splitext(args.series)[0] + "_fits.json")
    report = run_fits(
        args.series,
        models=models,
        w_window=w_window,
        t_window=t_window,
        late_fraction=args.late_fraction,
        out_path=out,
    )
    for fit in report["fits"]:
        label = fit["observable"] + (f" W={fit['W']}" if "W" in fit else "")
        c0, c1 = fit["coeffs"]
        print(f"{label}: model={fit['model']} coeffs=({c0:.6g}, {c1:.6g}) r2={fit['r2']:.4f}")
    print(f"wrote {out}")
    return 0


def _cmd_compare(args) -> int:
    config = _sweep_config(args)
    out = args.out or os.path.join(config.resolved_out_dir(), config.canonical_id() + "_compare.json")
    report = compare_backends(config, out_path=out)
    for entry in report["per_w"]:
        conv = entry["convergence"]
        line = f"W={entry['W']}: horizon={conv['horizon']}/{conv['t_max']}"
        if "max_abs_dA" in entry:
            line += f" max|dA|={entry['max_abs_dA']:.3e} max|dZ|={entry['max_abs_dZ']:.3e}"
        else:
            line += " (sv skipped: budget)"
        print(line)
    print(f"wrote {out}")
    return 0


def _build_lattice_from_args(args):
    cfg_fields = {
        "model": args.model or "chain",
        "n": args.n,
        "rows": args.rows,
        "cols": args.cols,
        "coupling_map": args.coupling_map,
        "w_list": (1.0,),
        "cycles": (1,),
    }
    return build_lattice(SweepConfig.from_dict(cfg_fields))


def _cmd_lattice_export(args) -> int:
    lattice = _build_lattice_from_args(args)
    if args.w is not None:
        lattice = assign_qp_fields(
            lattice, QpFieldParams(args.w, beta=args.beta, omega0=args.omega0)
        )
    text = lattice.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def _cmd_circuit_export(args) -> int:
    lattice = _build_lattice_from_args(args)
    lattice = assign_qp_fields(lattice, QpFieldParams(args.w, beta=args.beta, omega0=args.omega0))
    circ = build_floquet_cycle(lattice, FloquetParams(args.w, hardware_faithful=args.hardware_faithful))
    if args.cycles > 1:
        circ = repeat_cycles(circ, args.cycles)
    if args.transpile:
        circ = transpile_to_clifford_set(circ)
    text = circ.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpising",
        description="Quasiperiodic kicked-Ising Floquet circuit simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common_sweep = argparse.ArgumentParser(add_help=False)
    _add_model_args(common_sweep)
    common_sweep.add_argument("--config", help="JSON config file (flags override)")
    common_sweep.add_argument("--w", type=float, nargs="+", help="potential strengths")
    common_sweep.add_argument("--t-max", type=int, help="use the default log schedule up to t")
    common_sweep.add_argument("--record", type=int, nargs="+", help="explicit record cycles")
    common_sweep.add_argument("--backend", choices=("sv", "mps"), default=None)
    common_sweep.add_argument("--chi", type=int, default=None, help="MPS bond cap")
    common_sweep.add_argument("--shots", type=int, default=None, help="0 = exact observables")
    common_sweep.add_argument("--noise", default=None, help="none | depol:L | pauli:P2[,P1]")
    common_sweep.add_argument("--trajectories", type=int, default=1)
    common_sweep.add_argument("--seed", type=int, default=None)
    common_sweep.add_argument("--beta", type=float, default=None)
    common_sweep.add_argument("--omega0", type=float, default=None)
    common_sweep.add_argument("--hardware-faithful", action="store_true")
    common_sweep.add_argument("--allow-large", action="store_true",
                              help="override the state-vector memory budget")
    common_sweep.add_argument("--out-dir", default=None, help=f"defaults to ${OUTDIR_ENV} or .")
    common_sweep.add_argument("--run-id", default=None)
    common_sweep.add_argument("--jobs", type=int, default=None, help="parallel sweep points")
    common_sweep.add_argument("--checkpoint", action="store_true",
                              help="checkpoint at every recorded cycle (resumable)")
    common_sweep.add_argument("--interrupt-after-records", type=int, default=None,
                              help=argparse.SUPPRESS)  # testing hook

    p_sweep = sub.add_parser("sweep", parents=[common_sweep], help="run a (W, t) grid")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_fit = sub.add_parser("fit", help="fit a recorded series file")
    p_fit.add_argument("series", help="CSV series (raw or aggregate)")
    p_fit.add_argument("--models", default="power,log", help="comma list: power,log")
    p_fit.add_argument("--w-window", type=float, nargs=2, default=None)
    p_fit.add_argument("--t-window", type=float, nargs=2, default=None)
    p_fit.add_argument("--late-fraction", type=float, default=0.2)
    p_fit.add_argument("--out", default=None)
    p_fit.set_defaults(func=_cmd_fit)

    p_cmp = sub.add_parser("compare", parents=[common_sweep],
                           help="cross-validate sv and mps backends")
    p_cmp.add_argument("--out", default=None)
    p_cmp.set_defaults(func=_cmd_compare)

    p_lat = sub.add_parser("lattice", help="lattice tools")
    lat_sub = p_lat.add_subparsers(dest="subcommand", required=True)
    p_lat_exp = lat_sub.add_parser("export", help="write a lattice JSON document")
    _add_model_args(p_lat_exp)
    p_lat_exp.add_argument("--w", type=float, default=None, help="assign fields at this W")
    p_lat_exp.add_argument("--beta", type=float, default=(math.sqrt(5) - 1) / 2)
    p_lat_exp.add_argument("--omega0", type=float, default=0.0)
    p_lat_exp.add_argument("--out", default=None)
    p_lat_exp.set_defaults(func=_cmd_lattice_export)

    p_circ = sub.add_parser("circuit", help="circuit tools")
    circ_sub = p_circ.add_subparsers(dest="subcommand", required=True)
    p_circ_exp = circ_sub.add_parser("export", help="write a circuit JSON document")
    _add_model_args(p_circ_exp)
    p_circ_exp.add_argument("--w", type=float, required=True)
    p_circ_exp.add_argument("--beta", type=float, default=(math.sqrt(5) - 1) / 2)
    p_circ_exp.add_argument("--omega0", type=float, default=0.0)
    p_circ_exp.add_argument("--cycles", type=int, default=1)
    p_circ_exp.add_argument("--transpile", action="store_true")
    p_circ_exp.add_argument("--hardware-faithful", action="store_true")
    p_circ_exp.add_argument("--out", default=None)
    p_circ_exp.set_defaults(func=_cmd_circuit_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except NumericalInvariantError as exc:
        print(f"numerical invariant violated: {exc}", file=sys.stderr)
        return 4
    except SweepInterrupted as exc:
        print(f"sweep interrupted: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
