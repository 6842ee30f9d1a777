"""Command-line interface: ``qthermo <subcommand> [flags]``.

Exit codes: 0 success, 1 numerical flag raised, 2 invalid input.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import re
import sys
from pathlib import Path

import mpmath
import numpy as np

from . import __version__
from .dataset import DatasetFile, DatasetFormatError, serialize, sweep_to_dataset, write
from .estimation import ExperimentSpec, IdentifiabilityError, run_experiment
from .figures import RECIPES, build_figure, check_figure
from .metrics import (NumericalInconsistencyError, PreconditionError, fisher_report)
from .optimize import (AXES, Objective, OptimizeRequest, _map, maximize_over_time, sweep,
                       sweep_metadata)
from .probe import DomainError, ModelParams, TruncationPolicy, bloch, probe_state

OUTPUT_DIR_ENV = "QTHERMO_OUTPUT_DIR"
EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2

_ANGLE = re.compile(
    r"^\s*(?P<coef>[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)?\s*(?P<star>\*)?\s*(?P<pi>[+-]?pi)"
    r"(\s*/\s*(?P<den>\d+(\.\d*)?([eE][+-]?\d+)?))?\s*$")


class UsageError(ValueError):
    pass


class NumericalFlag(ArithmeticError):
    pass


def parse_angle(text: str) -> float:
    """Real number or symbolic multiple of pi: ``pi``, ``pi/2``, ``0.95*pi``, ``3*pi/4``.

    Symbolic values are evaluated in extended precision and rounded once.
    """
    s = str(text).strip()
    m = _ANGLE.match(s)
    if m is None:
        try:
            return float(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number or multiple of pi: {text!r}") from None
    if m["coef"] is not None and m["star"] is None:
        raise argparse.ArgumentTypeError(f"write {text!r} as <real>*pi")
    with mpmath.workprec(200):
        v = mpmath.pi
        if m["pi"].startswith("-"):
            v = -v
        if m["coef"] is not None:
            v = mpmath.mpf(m["coef"]) * v
        if m["den"] is not None:
            den = mpmath.mpf(m["den"])
            if den == 0:
                raise argparse.ArgumentTypeError("division by zero")
            v = v / den
        return float(v)


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:n`` for n evenly spaced points, or a comma separated list."""
    s = str(text).strip()
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be lo:hi:n, got {text!r}")
        lo, hi = parse_angle(parts[0]), parse_angle(parts[1])
        try:
            n = int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"grid size must be an integer, got {parts[2]!r}") from None
        if n < 1:
            raise argparse.ArgumentTypeError("grid size must be >= 1")
        return np.linspace(lo, hi, n)
    return np.array([parse_angle(x) for x in s.split(",") if x.strip()])


def parse_interval(text: str):
    parts = str(text).split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"interval must be lo:hi, got {text!r}")
    return (parse_angle(parts[0]), parse_angle(parts[1]))


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


class _GridAction(argparse.Action):
    """Collects ``--<axis>-grid`` flags in command-line order."""

    def __call__(self, parser, namespace, values, option_string=None):
        grids = list(getattr(namespace, "grids", None) or [])
        grids = [(n, g) for n, g in grids if n != self.metavar]
        grids.append((self.metavar, values))
        namespace.grids = grids


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _model_flags(p, tau_default="0"):
    g = p.add_argument_group("model")
    g.add_argument("--beta", type=float, default=None,
                   help="inverse temperature (dimensionless)")
    g.add_argument("--theta", type=parse_angle, default="pi", help="preparation polar angle, [0, pi]")
    g.add_argument("--phi", type=parse_angle, default="0", help="preparation phase, [0, 2pi)")
    g.add_argument("--tau", type=parse_angle, default=tau_default, help="interaction time")
    g.add_argument("--gamma", type=float, default=0.0, help="detuning")
    g.add_argument("--a", dest="dec_a", type=float, default=0.0, help="decoherence exponent, [0, 1]")
    g.add_argument("--b", dest="dec_b", type=float, default=0.0, help="decoherence rate, >= 0")
    g.add_argument("--tail-eps", type=float, default=1e-14, help="Fock truncation tail bound")
    g.add_argument("--n-cap", type=int, default=4096, help="hard Fock cutoff")


def _output_flags(p):
    p.add_argument("--out", "-o", default=None,
                   help=f"output file ('-' for stdout); default ${OUTPUT_DIR_ENV}/<name>.<format> or stdout")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="dataset format (default from --out suffix, else csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="qthermo", description="Qubit thermometry of a thermal resonator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None,
                        help="INI file; keys from [common] and [<subcommand>] become flag defaults")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_ArgumentParser)
    sub.required = True

    p = sub.add_parser("probe", help="probe state, derivative and Bloch vector")
    _model_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")

    for name, what in (("fi", "population-measurement Fisher information"),
                       ("qfi", "quantum Fisher information")):
        p = sub.add_parser(name, help=what)
        _model_flags(p)
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("sweep", help="objective on a parameter grid")
    _model_flags(p)
    p.add_argument("--objective", choices=[o.value for o in Objective], default="fi")
    for axis in AXES:
        p.add_argument(f"--{axis}-grid", action=_GridAction, type=parse_grid, metavar=axis, dest="grids",
                       help=f"{axis} values, lo:hi:n or a,b,c")
    p.add_argument("--workers", type=_positive_int, default=1)
    _output_flags(p)

    p = sub.add_parser("optimize", help="maximise the objective over interaction time")
    _model_flags(p)
    p.add_argument("--objective", choices=[o.value for o in Objective], default="fi")
    p.add_argument("--interval", type=parse_interval, default=None,
                   help="tau search interval lo:hi (default [0, 2pi], [0, 4pi] with decoherence)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--grid-points", type=int, default=2001)
    p.add_argument("--beta-grid", type=parse_grid, default=None, help="optimise at each of these beta")
    p.add_argument("--workers", type=_positive_int, default=1)
    _output_flags(p)

    p = sub.add_parser("figure", help="reproduce a figure dataset")
    p.add_argument("name", choices=sorted(RECIPES))
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a recipe default, e.g. --set beta=12 or --set tau_range=0:pi")
    p.add_argument("--check", action="store_true", help="also run the shape checks (exit 1 on failure)")
    _output_flags(p)

    p = sub.add_parser("estimate", help="Monte Carlo maximum-likelihood estimation of beta")
    _model_flags(p, tau_default="pi/2")
    p.add_argument("--shots", type=_positive_int, default=10_000)
    p.add_argument("--reps", type=_positive_int, default=300)
    p.add_argument("--seed", type=_seed, default=42)
    p.add_argument("--window", type=parse_interval, default=None,
                   help="beta search window lo:hi (default [beta/4, 4 beta])")
    p.add_argument("--workers", type=_positive_int, default=1)
    _output_flags(p)
    return parser


# -- config -----------------------------------------------------------------

def _apply_config(parser, path, command):
    cfg = configparser.ConfigParser()
    if not cfg.read(path):
        raise UsageError(f"cannot read config file {path}")
    sub = _subparser(parser, command)
    dests = {a.dest: a for a in sub._actions}
    values = {}
    for section in ("common", command):
        if cfg.has_section(section):
            values.update(cfg.items(section))
    own = set(dict(cfg.items(command))) if cfg.has_section(command) else set()
    defaults, grids = {}, []
    for key, raw in values.items():
        dest = key.replace("-", "_")
        dest = {"a": "dec_a", "b": "dec_b"}.get(dest, dest)
        axis = dest[:-5] if dest.endswith("_grid") else None
        if axis in AXES and any(isinstance(a, _GridAction) for a in sub._actions):
            grids.append((axis, parse_grid(raw)))
        elif dest in dests and dest not in ("help", "grids"):
            defaults[dest] = raw
        elif key in own:
            raise UsageError(f"unknown option {key!r} in [{command}]")
        # unknown [common] keys may belong to other subcommands
    if grids:
        defaults["grids"] = grids
    sub.set_defaults(**defaults)


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise AssertionError("no subcommands")


# -- helpers -----------------------------------------------------------------

def _params(args) -> ModelParams:
    if args.beta is None:
        raise UsageError("--beta is required")
    trunc = TruncationPolicy(tail_eps=args.tail_eps, n_cap=args.n_cap)
    return ModelParams(beta=args.beta, theta=args.theta, phi=args.phi, tau=args.tau,
                       gamma=args.gamma, dec_a=args.dec_a, dec_b=args.dec_b, trunc=trunc)


def _num(x) -> str:
    x = float(x)
    if x == 0.0:
        return "0"
    return "%.17g" % x


def _emit(ds: DatasetFile, args, name: str):
    out = args.out
    fmt = args.format
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = str(Path(os.environ[OUTPUT_DIR_ENV]) / f"{name}.{fmt or 'csv'}")
    if out is None or out == "-":
        sys.stdout.write(serialize(ds, fmt or "csv"))
        return
    path = write(ds, out, fmt)
    print(f"wrote {path}", file=sys.stderr)


def _state_report(params):
    ps = probe_state(params)
    bv = bloch(ps)
    rep = fisher_report(ps)
    return ps, bv, rep


def _model_echo(params: ModelParams):
    return {"beta": params.beta, "theta": params.theta, "phi": params.phi, "tau": params.tau,
            "gamma": params.gamma, "dec_a": params.dec_a, "dec_b": params.dec_b,
            "tail_eps": params.trunc.tail_eps, "n_cap": params.trunc.n_cap}


# -- subcommands ---------------------------------------------------------------

def cmd_probe(args):
    params = _params(args)
    ps, bv, rep = _state_report(params)
    fields = {
        "rho_ee": ps.rho_ee, "rho_gg": ps.rho_gg,
        "rho_eg_re": ps.rho_eg.real, "rho_eg_im": ps.rho_eg.imag,
        "d_rho_ee": ps.d_rho_ee, "d_rho_eg_re": ps.d_rho_eg.real, "d_rho_eg_im": ps.d_rho_eg.imag,
        "r_x": bv.r[0], "r_y": bv.r[1], "r_z": bv.r[2],
        "dr_x": bv.dr[0], "dr_y": bv.dr[1], "dr_z": bv.dr[2],
        "mixedness": ps.mixedness,
    }
    _print_fields(args, params, fields, ps)
    return EXIT_NUMERICAL if ps.truncated else EXIT_OK


def _print_fields(args, params, fields, ps):
    if args.format == "json":
        doc = {k: v if isinstance(v, bool) else float(v) + 0.0 for k, v in fields.items()}
        doc.update(n_used=int(ps.n_used), truncated=bool(ps.truncated), params=_model_echo(params),
                   tool_version=__version__)
        print(json.dumps(doc, sort_keys=True))
        return
    for k, v in fields.items():
        print(f"{k} = {str(v).lower() if isinstance(v, bool) else _num(v)}")
    print(f"n_used = {ps.n_used}")
    print(f"truncated = {str(bool(ps.truncated)).lower()}")


def cmd_info(args):
    params = _params(args)
    ps, bv, rep = _state_report(params)
    if args.command == "fi":
        fields = {"fi": rep.fi, "crb": rep.crb}
    else:
        fields = {"qfi": rep.qfi, "qcrb": rep.qcrb, "degenerate": rep.degenerate, "pure": rep.pure}
    _print_fields(args, params, fields, ps)
    value = rep.fi if args.command == "fi" else rep.qfi
    return EXIT_NUMERICAL if (ps.truncated or not math.isfinite(value)) else EXIT_OK


def cmd_sweep(args):
    grids = getattr(args, "grids", None) or []
    if not grids:
        raise UsageError("sweep needs at least one --<axis>-grid")
    base = _params(args) if args.beta is not None else None
    if base is None:
        if "beta" not in dict(grids):
            raise UsageError("--beta is required unless --beta-grid is given")
        args.beta = float(dict(grids)["beta"][0])
        base = _params(args)
    table = sweep(grids, args.objective, base, workers=args.workers)
    ds = sweep_to_dataset(table)
    _emit(ds, args, f"sweep_{args.objective}")
    return EXIT_OK


def cmd_optimize(args):
    if args.beta_grid is not None:
        betas = args.beta_grid
        if args.beta is None:
            args.beta = float(betas[0])
    else:
        betas = None
    base = _params(args)
    betas = [base.beta] if betas is None else betas
    requests = [OptimizeRequest(args.objective, base.with_(beta=float(b), tau=0.0), args.interval,
                                tol=args.tol, grid_points=args.grid_points) for b in betas]
    results = _map(maximize_over_time, requests, args.workers)
    rows = [(float(b), r.arg, r.value, float(r.degenerate), r.evaluations) for b, r in zip(betas, results)]
    req = requests[0]
    meta = sweep_metadata(args.objective, base)
    meta["search_interval"] = list(req.search_interval)
    meta["tol"] = args.tol
    meta["grid_points"] = args.grid_points
    ds = DatasetFile(["beta", "tau_max", "value", "degenerate", "evaluations"], np.array(rows), meta)
    _emit(ds, args, f"optimize_{args.objective}")
    return EXIT_OK


def _override_value(text):
    if ":" in text:
        return tuple(parse_interval(text))
    try:
        return int(text)
    except ValueError:
        return parse_angle(text)


def cmd_figure(args):
    overrides = {}
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            overrides[key.strip().replace("-", "_")] = _override_value(value.strip())
        except argparse.ArgumentTypeError as exc:
            raise UsageError(str(exc)) from None
    ds = build_figure(args.name, **overrides)
    _emit(ds, args, args.name)
    if args.check:
        failed = 0
        for desc, ok in check_figure(args.name, ds):
            print(f"{'PASS' if ok else 'FAIL'} {args.name}: {desc}", file=sys.stderr)
            failed += not ok
        if failed:
            return EXIT_NUMERICAL
    return EXIT_OK


def cmd_estimate(args):
    params = _params(args)
    spec = ExperimentSpec(params, shots=args.shots, reps=args.reps, seed=args.seed,
                          beta_window=args.window)
    rep = run_experiment(spec, workers=args.workers)
    meta = dict(rep.metadata)
    meta.update(params=_model_echo(params), tool_version=__version__, summary={
        "mean": rep.mean, "variance": rep.variance, "fisher": rep.fisher,
        "cr_ratio": rep.cr_ratio, "boundary_hits": rep.boundary_hits,
        "standard_error": rep.standard_error,
    })
    rows = np.column_stack([np.arange(spec.reps), rep.counts, rep.estimates, rep.boundary.astype(float)])
    ds = DatasetFile(["rep", "k", "beta_hat", "boundary"], rows, meta)
    _emit(ds, args, "estimate")
    print(f"mean = {_num(rep.mean)}  variance = {_num(rep.variance)}  cr_ratio = {_num(rep.cr_ratio)}  "
          f"boundary_hits = {rep.boundary_hits}/{spec.reps}", file=sys.stderr)
    return EXIT_OK if math.isfinite(rep.cr_ratio) and rep.boundary_hits == 0 else EXIT_NUMERICAL


COMMANDS = {
    "probe": cmd_probe, "fi": cmd_info, "qfi": cmd_info, "sweep": cmd_sweep,
    "optimize": cmd_optimize, "figure": cmd_figure, "estimate": cmd_estimate,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            _apply_config(parser, args.config, args.command)
            args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, DomainError, PreconditionError, IdentifiabilityError,
            DatasetFormatError, argparse.ArgumentTypeError, configparser.Error) as exc:
        print(f"qthermo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalInconsistencyError, NumericalFlag, ArithmeticError) as exc:
        print(f"qthermo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"qthermo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
