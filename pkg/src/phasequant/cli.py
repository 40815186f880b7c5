"""Command-line entry point: ``phasequant <subcommand> ...``.

Exit codes: 0 success, 2 invalid input (parse errors, bad config, domain),
3 polynomial degree cap exceeded, 4 oracle tolerance failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from .csvio import fmt, to_csv
from .phasepoly import DegreeCapError, ParseError, StarContext, moyal_bracket, parse_polynomial, star_product
from .potentials import DomainError, PotentialSpec

EXIT_OK, EXIT_INPUT, EXIT_DEGREE, EXIT_ORACLE = 0, 2, 3, 4


class InputError(ValueError):
    pass


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from exc
    return a, b


def parse_potential(text: str) -> PotentialSpec:
    """``harmonic``, ``quartic``, ``poly:c0,c1,...``, ``coulomb[:z]``, ``yukawa:z,mu``; alpha = 1/2."""
    name, _, arg = text.partition(":")
    if name == "harmonic":
        return PotentialSpec.harmonic()
    if name == "quartic":
        return PotentialSpec.polynomial([0, 0, 0, 0, 1])
    if name == "poly":
        return PotentialSpec.polynomial([Fraction(c) for c in arg.split(",")])
    if name == "coulomb":
        return PotentialSpec.coulomb(float(arg) if arg else 1.0)
    if name == "yukawa":
        z, mu = (float(x) for x in arg.split(","))
        return PotentialSpec.yukawa(z, mu)
    raise InputError(f"unknown potential {text!r}")


# -- subcommands --------------------------------------------------------------

def cmd_star(args) -> str:
    ctx = StarContext(hbar_truncation=args.hbar_order)
    f, g = parse_polynomial(args.f), parse_polynomial(args.g)
    fg = star_product(f, g, ctx)
    gf = star_product(g, f, ctx)
    br = moyal_bracket(f, g, ctx)
    return (f"{args.f}*{args.g} = {fg.to_text()}\n"
            f"{args.g}*{args.f} = {gf.to_text()}\n"
            f"[{args.f},{args.g}] = {br.to_text()}\n")


def cmd_figures(args) -> str:
    from .figures import FIGURES, figure_rows

    spec = FIGURES[args.figure]
    rows = figure_rows(args.figure, args.q_range, args.p_range, args.n, args.n, args.hbar)
    return to_csv(["q", "p", "order", "value"], rows, comment=f"figure {args.figure}: Exp(f), {spec.label}, hbar={fmt(args.hbar)}")


def cmd_sdw(args) -> str:
    from .sdw import sdw_coefficients

    v = parse_potential(args.potential)
    e = sdw_coefficients(v, args.n_max, 2, args.normalization, args.hbar)
    rows = e.table(args.q0)
    if args.format == "json":
        return json.dumps({"q0": args.q0, "normalization": args.normalization,
                           "rows": [{"n": n, "a_n": a, "delta2_a_n": d} for n, a, d in rows]}, indent=2) + "\n"
    return to_csv(["n", "a_n", "delta2_a_n"], rows,
                  comment=f"potential={args.potential} q0={fmt(args.q0)} normalization={args.normalization}")


def _zeta(args):
    from .sdw import normalization_factor, phase_space_trace_asymptotics, zeta_mellin
    from .spectral import GridSpec, heat_trace, solve

    hb = args.hbar
    v = parse_potential(args.potential)
    scale = 2 * math.pi * hb * normalization_factor(args.normalization, hb)
    if args.potential == "harmonic":
        trace = lambda s: scale / (2 * math.sinh(hb * s / 2))  # noqa: E731
        asy = [(b * scale, e) for b, e in phase_space_trace_asymptotics(v, 4, hb)]
        ev = zeta_mellin(trace, args.s, args.split, asy, lambda_min=hb / 2)
        note = "analytic trace"
    else:
        # zeta of the retained grid spectrum
        spec = solve(v, GridSpec(-args.box, args.box, args.n_points), args.modes, hb, kinetic="sinc")
        trace = lambda s: scale * heat_trace(spec, s)  # noqa: E731
        ev = zeta_mellin(trace, args.s, args.split, (), lambda_min=float(spec.eigenvalues[0]))
        note = f"retained spectrum of {args.modes} modes"
    return ev, note


def cmd_zeta(args) -> str:
    ev, note = _zeta(args)
    if args.format == "json":
        return json.dumps({"s": ev.s, "value": ev.value, "error_estimate": ev.error_estimate,
                           "split_point": ev.split_point, "small_sigma_order": ev.small_sigma_order,
                           "normalization": args.normalization, "note": note}, indent=2) + "\n"
    return to_csv(["s", "value", "error_estimate"], [(ev.s, ev.value, ev.error_estimate)],
                  comment=f"potential={args.potential} normalization={args.normalization} {note}")


def cmd_wigner(args) -> str:
    from .oscillator import OscillatorParams, wigner_mode

    params = OscillatorParams(args.m, args.omega, args.hbar)
    q, p = args.at
    w = wigner_mode(args.n, q, p, params, with_factorial=args.paper_variant)
    if args.convention == "weyl_symbol":
        w *= 2 * math.pi * args.hbar
    if args.format == "json":
        return json.dumps({"n": args.n, "q": q, "p": p, args.convention: w}) + "\n"
    return to_csv(["n", "q", "p", args.convention], [(args.n, q, p, w)])


def cmd_green(args) -> str:
    from .oscillator import OscillatorParams, green_mode_sum, green_quadrature, heat_symbol_closed
    from .sdw import green_from_sigma_integral

    params = OscillatorParams(args.m, args.omega, args.hbar)
    q, p = args.at
    x = float(params.x(q, p))
    quad = green_quadrature(x, params)
    sig, _ = green_from_sigma_integral(lambda s: heat_symbol_closed(q, p, s, params),
                                       lambda_min=params.quantum / 2)
    ms = green_mode_sum(q, p, params, args.modes, paper_variant=args.paper_variant).value
    return to_csv(["q", "p", "x", "quadrature", "sigma_integral", "mode_sum"], [(q, p, x, quad, sig, ms)])


def cmd_oracle_compare(args) -> tuple[str, int]:
    from .ledger import ledger_json
    from .oracle import run_oracle_suite

    checks = run_oracle_suite(quick=args.quick)
    report = "".join(c.line() + "\n" for c in checks)
    text = ledger_json()
    if args.ledger:
        with open(args.ledger, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        report += text + "\n"
    ok = all(c.passed for c in checks)
    return report, EXIT_OK if ok else EXIT_ORACLE


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="RunDescriptor JSON; keys are the long option names")
    common.add_argument("--output", help="write to this path instead of stdout")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--normalization", choices=["standard", "paper"], default="standard")
    common.add_argument("--hbar", type=float, default=1.0)

    ap = argparse.ArgumentParser(prog="phasequant", description="Phase-space star exponentials and heat kernels.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    s = sub.add_parser("star", parents=[common], help="star product, reverse product and Moyal bracket")
    s.add_argument("f")
    s.add_argument("g")
    s.add_argument("--hbar-order", type=int, default=None)

    s = sub.add_parser("figures", parents=[common], help="Exp(f) through hbar^4 on a grid")
    s.add_argument("figure", type=int, choices=[1, 2])
    s.add_argument("--q-range", type=_pair, default=None)
    s.add_argument("--p-range", type=_pair, default=None)
    s.add_argument("--n", type=int, default=41)

    s = sub.add_parser("sdw", parents=[common], help="Schwinger-DeWitt coefficients at a point")
    s.add_argument("--potential", default="harmonic")
    s.add_argument("--q0", type=float, default=0.0)
    s.add_argument("--n-max", type=int, default=4)

    s = sub.add_parser("zeta", parents=[common], help="zeta function by Mellin splitting")
    s.add_argument("--potential", default="harmonic")
    s.add_argument("--s", type=float, default=2.0)
    s.add_argument("--split", type=float, default=1.0)
    s.add_argument("--box", type=float, default=8.0)
    s.add_argument("--n-points", type=int, default=801)
    s.add_argument("--modes", type=int, default=120)

    s = sub.add_parser("wigner", parents=[common], help="oscillator number-state Wigner function")
    s.add_argument("--n", type=int, default=0)
    s.add_argument("--at", type=_pair, default=(0.0, 0.0))
    s.add_argument("--m", type=float, default=1.0)
    s.add_argument("--omega", type=float, default=1.0)
    s.add_argument("--convention", choices=["wigner_density", "weyl_symbol"], default="wigner_density")
    s.add_argument("--paper-variant", action="store_true")

    s = sub.add_parser("green", parents=[common], help="oscillator phase-space Green's function")
    s.add_argument("--at", type=_pair, default=(0.0, 0.0))
    s.add_argument("--m", type=float, default=1.0)
    s.add_argument("--omega", type=float, default=1.0)
    s.add_argument("--modes", type=int, default=400)
    s.add_argument("--paper-variant", action="store_true")

    s = sub.add_parser("oracle-compare", parents=[common], help="run the oracle suite and write the ledger")
    s.add_argument("--quick", action="store_true")
    s.add_argument("--ledger", default=None, help="ledger JSON path (stdout if omitted)")
    return ap


def _apply_config(ap: argparse.ArgumentParser, args: argparse.Namespace, argv) -> argparse.Namespace:
    """Overlay a RunDescriptor JSON; unknown keys and a mismatched subcommand are rejected."""
    with open(args.config, encoding="utf-8") as fh:
        desc = json.load(fh)
    if not isinstance(desc, dict):
        raise InputError("config must be a JSON object")
    sub = desc.pop("subcommand", args.subcommand)
    if sub != args.subcommand:
        raise InputError(f"config subcommand {sub!r} does not match {args.subcommand!r}")
    known = set(vars(args)) - {"config", "subcommand"}
    unknown = sorted(k.replace("-", "_") for k in desc if k.replace("-", "_") not in known)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(unknown)}")
    for key, val in desc.items():
        key = key.replace("-", "_")
        if key in ("at", "q_range", "p_range") and val is not None:
            val = tuple(float(x) for x in val)
        setattr(args, key, val)
    return args


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    code = EXIT_OK
    try:
        if args.config:
            args = _apply_config(ap, args, argv)
        handler = {
            "star": cmd_star,
            "figures": cmd_figures,
            "sdw": cmd_sdw,
            "zeta": cmd_zeta,
            "wigner": cmd_wigner,
            "green": cmd_green,
            "oracle-compare": cmd_oracle_compare,
        }[args.subcommand]
        out = handler(args)
        if isinstance(out, tuple):
            out, code = out
    except (ParseError, InputError, DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegreeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGREE
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
