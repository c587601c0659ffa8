"""Command-line front end: ``photonadd {sweep,state,wigner,herald}``.

All output is CSV with 17 significant digits. Exit codes: 0 success,
2 bad arguments, 3 physically degenerate request (annihilated state or a
detector that never clicks), 4 truncation overflow.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import entanglement as ent
from .errors import TruncationOverflow, ZeroClickProbability, ZeroNorm
from .experiment import HeraldConfig, heralded_addition, ideal_addition
from .fock import CutoffConfig, auto_cutoff, reduced_density, state_fidelity, tail_mass
from .phasespace import wigner_grid
from .states import OpPipeline, check_mu, coherent_add, coherent_subtract, run_pipeline, tmsv

log = logging.getLogger("photonadd")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_TRUNCATION = 4

SWEEP_OPS = ("tmsv", "cpa", "cps", "cpa_then_cps", "cps_then_cpa")
SWEEP_HEADER = [
    "lambda", "mu_re", "mu_im", "neg_tmsv", "logneg_tmsv", "neg_cpa", "neg_cps",
    "neg_cpa_cps", "neg_cps_cpa", "weight_cpa", "weight_cps",
]
# two-step pipelines carry an n^2 amplitude envelope
SWEEP_HEADROOM = 6

HERALD_HEADER = ["lambda", "phi", "gain", "eta", "click_prob", "negativity", "fidelity_vs_ideal"]


class UsageError(Exception):
    pass


def fmt(v) -> str:
    return "" if v is None else f"{v:.17g}"


def _lambda(text: str) -> float:
    v = float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError(f"lambda must lie in [0, 1), got {text}")
    return v


def _cutoff_arg(text: str) -> int | str:
    if text == "auto":
        return text
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cutoff must be an integer or 'auto', got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("cutoff must be >= 1")
    return n


def make_cutoff(args, lam: float, headroom: int = 0) -> CutoffConfig:
    if args.cutoff == "auto":
        n = auto_cutoff(lam, args.tail_tol, headroom)
    else:
        n = args.cutoff
    try:
        return CutoffConfig(n, tail_tol=args.tail_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _mu(args) -> complex:
    try:
        return check_mu(complex(args.mu_re, args.mu_im))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


@contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write(args, text: str):
    with _open_out(args.out) as fh:
        fh.write(text)


def _csv_text(header, rows, footer: str = "") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue() + footer


def _sweep_row(lam: float, mu: complex, ops: set[str], args) -> list[str]:
    cutoff = make_cutoff(args, lam, headroom=SWEEP_HEADROOM)
    base = tmsv(lam, cutoff)
    vals: dict[str, float | None] = dict.fromkeys(SWEEP_HEADER[3:])

    def guarded(name, fn):
        try:
            return fn()
        except ZeroNorm:
            log.warning("lambda=%s: %s annihilates the state; field left empty", fmt(lam), name)
            return None

    if "tmsv" in ops:
        vals["neg_tmsv"] = ent.negativity_pure(base)
        vals["logneg_tmsv"] = ent.log_negativity(vals["neg_tmsv"])
    if "cpa" in ops:
        out = guarded("cpa", lambda: coherent_add(base, mu))
        if out:
            vals["neg_cpa"] = ent.negativity_pure(out[0])
            vals["weight_cpa"] = out[1]
    if "cps" in ops:
        out = guarded("cps", lambda: coherent_subtract(base, mu))
        if out:
            vals["neg_cps"] = ent.negativity_pure(out[0])
            vals["weight_cps"] = out[1]
    for op, col, steps in (
        ("cpa_then_cps", "neg_cpa_cps", (("add", mu), ("subtract", mu))),
        ("cps_then_cpa", "neg_cps_cpa", (("subtract", mu), ("add", mu))),
    ):
        if op in ops:
            out = guarded(op, lambda: run_pipeline(base, OpPipeline.of(*steps)))
            if out:
                vals[col] = ent.negativity_pure(out[0])
    return [fmt(lam), fmt(mu.real), fmt(mu.imag)] + [fmt(vals[k]) for k in SWEEP_HEADER[3:]]


def cmd_sweep(args) -> int:
    if args.steps < 2:
        raise UsageError("--lambda-steps must be >= 2")
    if args.lambda_min > args.lambda_max:
        raise UsageError("--lambda-min must not exceed --lambda-max")
    ops = set(args.ops.split(","))
    unknown = ops - set(SWEEP_OPS)
    if unknown:
        raise UsageError(f"unknown ops: {', '.join(sorted(unknown))}")
    mu = _mu(args)
    grid = np.linspace(args.lambda_min, args.lambda_max, args.steps)
    rows = [_sweep_row(float(lam), mu, ops, args) for lam in grid]
    _write(args, _csv_text(SWEEP_HEADER, rows))
    return EXIT_OK


def _build_state(kind: str, lam: float, mu: complex, args):
    cutoff = make_cutoff(args, lam, headroom=0 if kind == "tmsv" else 1)
    state = tmsv(lam, cutoff)
    if kind == "cpa":
        state, _ = coherent_add(state, mu)
    elif kind == "cps":
        state, _ = coherent_subtract(state, mu)
    return state


def cmd_state(args) -> int:
    state = _build_state(args.kind, args.lam, _mu(args), args)
    amps = state.amplitudes
    rows = [
        [m, n, fmt(amps[m, n].real), fmt(amps[m, n].imag)]
        for m, n in zip(*np.nonzero(np.abs(amps) > 1e-14))
    ]
    norm = math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    footer = (
        f"# norm={fmt(norm)} tail_mass={fmt(tail_mass(state))} "
        f"negativity={fmt(ent.negativity_pure(state))}\n"
    )
    _write(args, _csv_text(["m", "n", "re", "im"], rows, footer))
    return EXIT_OK


def cmd_wigner(args) -> int:
    state = _build_state(args.kind, args.lam, _mu(args), args)
    try:
        grid = wigner_grid(
            reduced_density(state, args.mode),
            args.x_min, args.x_max, args.p_min, args.p_max, args.nx, args.np,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write(args, grid.to_csv())
    return EXIT_OK


def cmd_herald(args) -> int:
    try:
        cfg = HeraldConfig(args.gain, args.eta, args.phi, (args.loss1, args.loss2))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    # photon addition plus the second-order term need two levels of headroom
    cutoff = make_cutoff(args, args.lam, headroom=2)
    source = tmsv(args.lam, cutoff)
    outcome = heralded_addition(source, cfg)
    ideal = ideal_addition(source, args.phi)
    row = [
        fmt(args.lam), fmt(args.phi), fmt(args.gain), fmt(args.eta),
        fmt(outcome.click_probability),
        fmt(ent.negativity_density(outcome.state)),
        fmt(state_fidelity(outcome.state, ideal)),
    ]
    _write(args, _csv_text(HERALD_HEADER, [row]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cutoff", type=_cutoff_arg, default="auto",
                        help="photon-number cutoff per mode, or 'auto' (default)")
    common.add_argument("--tail-tol", type=float, default=1e-8,
                        help="largest probability allowed on the top Fock level (default 1e-8)")
    common.add_argument("--out", default="-", help="output CSV path, '-' for stdout (default)")
    common.add_argument("--seed", type=int, default=0,
                        help="random seed; outputs of the current commands are deterministic regardless")
    common.add_argument("--mu-re", type=float, default=1.0, help="real part of mu (default 1)")
    common.add_argument("--mu-im", type=float, default=0.0, help="imaginary part of mu (default 0)")

    parser = argparse.ArgumentParser(
        prog="photonadd",
        description="Coherent photon addition/subtraction on two-mode squeezed vacuum.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="negativity versus lambda")
    p.add_argument("--lambda-min", type=_lambda, default=0.0)
    p.add_argument("--lambda-max", type=_lambda, default=0.6)
    p.add_argument("--lambda-steps", dest="steps", type=int, default=13)
    p.add_argument("--ops", default="tmsv,cpa,cps",
                   help=f"comma-separated subset of {','.join(SWEEP_OPS)}")
    p.set_defaults(func=cmd_sweep)

    for name, func, helptext in (
        ("state", cmd_state, "dump Fock amplitudes"),
        ("wigner", cmd_wigner, "reduced single-mode Wigner function on a grid"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--kind", choices=("tmsv", "cpa", "cps"), default="cpa")
        p.add_argument("--lambda", dest="lam", type=_lambda, required=True)
        p.set_defaults(func=func)
    p.add_argument("--mode", type=int, choices=(1, 2), default=1)
    p.add_argument("--x-min", type=float, default=-5.0)
    p.add_argument("--x-max", type=float, default=5.0)
    p.add_argument("--p-min", type=float, default=-5.0)
    p.add_argument("--p-max", type=float, default=5.0)
    p.add_argument("--nx", type=int, default=101)
    p.add_argument("--np", type=int, default=101)

    p = sub.add_parser("herald", parents=[common], help="heralded photon addition with imperfections")
    p.add_argument("--lambda", dest="lam", type=_lambda, required=True)
    p.add_argument("--phi", type=float, default=math.pi / 4, help="twin-photon polarization angle (rad)")
    p.add_argument("--gain", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=1.0, help="herald detector efficiency")
    p.add_argument("--loss1", type=float, default=1.0, help="mode-1 transmission after addition")
    p.add_argument("--loss2", type=float, default=1.0, help="mode-2 transmission after addition")
    p.set_defaults(func=cmd_herald)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (ZeroNorm, ZeroClickProbability) as exc:
        log.error("%s", exc)
        return EXIT_DEGENERATE
    except TruncationOverflow as exc:
        log.error("%s", exc)
        return EXIT_TRUNCATION


if __name__ == "__main__":
    sys.exit(main())
