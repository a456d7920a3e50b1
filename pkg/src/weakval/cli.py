"""``weakval`` command line: run | extract | series | ensemble | profile.

Primary outputs (JSON on stdout, CSV files) are deterministic for a given set
of flags and seed.  Exit codes: 0 success, 1 error, 2 routes disagree.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings

from .ensemble import (
    WeaknessWarning,
    grid_mean,
    sample_pointer,
    sample_stats,
    sqrtn_study,
    stderr_ratios,
)
from .errors import ValidationError, WeakvalError
from .extraction import extract_from_expression, extract_weak_value
from .pointer import (
    av_series_wavefunction,
    default_grid,
    grid_evaluate,
    normalized_distance,
    write_text_atomic,
)
from .quantum import weak_value_direct
from .scenarios import (
    load_preset,
    load_scenario,
    optical_expression,
    optical_weak_value_closed_form,
    preset_names,
)

AGREEMENT_TOL = 1e-8
EXIT_OK, EXIT_ERROR, EXIT_DISAGREE = 0, 1, 2


def _cplx(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def _scenario(args):
    if args.preset:
        return load_preset(args.preset)
    return load_scenario(args.scenario)


def _default_seed(scenario) -> int:
    env = os.environ.get("WEAKVAL_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"WEAKVAL_SEED must be an integer, got {env!r}") from None
    return scenario.seed


def _parse_params(pairs, degree_pairs) -> dict:
    params = {}
    for raw, deg in [(p, False) for p in pairs or []] + [(p, True) for p in degree_pairs or []]:
        name, sep, value = raw.partition("=")
        if not sep or not name:
            raise ValidationError(f"parameter {raw!r} must look like name=value")
        try:
            value = value.strip()
            if value.endswith("i"):
                value = value[:-1] + "j"
            v = complex(value)
        except ValueError:
            raise ValidationError(f"parameter {name!r}: cannot parse {value!r} as a number") from None
        params[name.strip()] = math.radians(v.real) if deg else v
    return params


def _number_list(text: str, kind=float) -> list:
    try:
        return [kind(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse number list {text!r}") from None


def _orders(text: str) -> list[int]:
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise ValidationError(f"cannot parse order range {text!r}") from None
    return _number_list(text, int)


# --- commands ---------------------------------------------------------------

def _ensemble_block(scenario, wave, n, seed, reference):
    samples = sample_pointer(wave, n, seed, scenario.grid_tuple())
    stats = sample_stats(samples)
    return samples, {
        "seed": seed,
        "stats": stats.to_dict(),
        "grid_mean": grid_mean(wave, scenario.grid_tuple()),
        "reference_re_weak_value": reference.real,
        "within_3_std_error": abs(stats.mean - reference.real) <= 3 * stats.std_error,
    }


def cmd_run(args) -> int:
    start = time.perf_counter()
    s = _scenario(args)
    wave = s.wave()
    extraction = extract_weak_value(wave, cross_check=True)
    report = {
        "scenario": s.name,
        "kind": s.kind,
        "beta": s.beta,
        "weakness": s.weakness(),
        "extracted": _cplx(extraction.weak_value),
        "finite_difference": _cplx(extraction.cross_check),
        "fd_delta": extraction.cross_check_delta,
    }
    routes = [extraction.weak_value]
    if s.kind != "expression":
        direct = weak_value_direct(*s.system())
        report["direct"] = _cplx(direct.value)
        report["overlap"] = _cplx(direct.overlap)
        routes.append(direct.value)
    if s.kind == "optical":
        closed = optical_weak_value_closed_form(s.optical)
        expr, pointer, width, params = optical_expression(s.optical)
        text_route = extract_from_expression(expr, pointer, width, params).weak_value
        report["closed_form"] = _cplx(closed)
        report["expression_route"] = _cplx(text_route)
        routes += [closed, text_route]
    if len(routes) > 1:
        delta = max(abs(x - y) for x in routes for y in routes)
        report["max_route_delta"] = delta
        agree = delta <= AGREEMENT_TOL and extraction.consistent
    else:
        agree = extraction.consistent
    report["agreement"] = agree
    if args.ensemble:
        n = args.n or s.ensemble_n
        _, block = _ensemble_block(s, wave, n, _default_seed(s), extraction.weak_value)
        report["ensemble"] = block
    if args.timing:
        report["timing_s"] = time.perf_counter() - start
    _emit(report)
    return EXIT_OK if agree else EXIT_DISAGREE


def cmd_extract(args) -> int:
    params = _parse_params(args.param, args.param_deg)
    method = "finite-difference" if args.method == "fd" else "dual"
    result = extract_from_expression(args.expr, args.pointer, args.width, params,
                                     method=method, cross_check=args.check_fd and method == "dual")
    report = {"expression": args.expr, "method": result.method,
              "weak_value": _cplx(result.weak_value)}
    if result.cross_check is not None:
        report["finite_difference"] = _cplx(result.cross_check)
        report["fd_delta"] = result.cross_check_delta
        report["consistent"] = result.consistent
    _emit(report)
    return EXIT_OK


def cmd_series(args) -> int:
    s = _scenario(args)
    if s.kind == "expression":
        raise ValidationError("series needs spectral data: use a matrix or optical scenario")
    pre, post, obs = s.system()
    shift = obs.spectral_radius
    if args.weakness is not None:
        if shift == 0:
            raise ValidationError("weakness is undefined for a zero observable")
        betas = [w / shift ** 2 for w in _number_list(args.weakness)]
    elif args.beta is not None:
        betas = _number_list(args.beta)
    else:
        betas = [s.beta]
    orders = _orders(args.orders)
    if not orders or min(orders) < 1 or max(orders) > 20:
        raise ValidationError("orders must lie in 1..20")
    lines = ["beta,weakness,order,distance,monotone"]
    for beta in betas:
        if beta < 0:
            raise ValidationError("beta must be non-negative")
        q_min, q_max, points = s.grid.as_tuple() if s.grid else default_grid(beta, shift)
        if args.points:
            points = args.points
        exact = grid_evaluate(s.wave(beta), q_min, q_max, points)
        dists = [normalized_distance(av_series_wavefunction(pre, post, obs, beta, exact.q, k),
                                     exact.values, exact.q) for k in orders]
        tail = [d for k, d in zip(orders, dists) if k >= 2]
        monotone = all(b <= a + 1e-12 for a, b in zip(tail, tail[1:]))
        for k, d in zip(orders, dists):
            lines.append(f"{beta:.17g},{beta * shift ** 2:.17g},{k},{d:.17g},{str(monotone).lower()}")
    text = "\n".join(lines) + "\n"
    if args.out:
        write_text_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_ensemble(args) -> int:
    s = _scenario(args)
    seed = args.seed if args.seed is not None else _default_seed(s)
    wave = s.wave()
    reference = extract_weak_value(wave).weak_value
    report = {"scenario": s.name, "beta": s.beta, "weakness": s.weakness(),
              "weak_value": _cplx(reference)}
    if args.study:
        sizes = _number_list(args.study, int)
        stats = sqrtn_study(wave, sizes, seed, s.grid_tuple())
        report["seed"] = seed
        report["study"] = [st.to_dict() for st in stats]
        report["std_error_ratios"] = {str(n): r for n, r in stderr_ratios(stats).items()}
    else:
        n = args.n or s.ensemble_n
        samples, block = _ensemble_block(s, wave, n, seed, reference)
        report.update(block)
        if args.samples_out:
            body = "".join(f"{x:.17g}\n" for x in samples)
            write_text_atomic(args.samples_out, "Q\n" + body)
    _emit(report)
    return EXIT_OK


def cmd_profile(args) -> int:
    s = _scenario(args)
    beta = s.beta if args.beta is None else args.beta
    q_min, q_max, points = s.grid_tuple(beta)
    if args.q_min is not None:
        q_min = args.q_min
    if args.q_max is not None:
        q_max = args.q_max
    if args.points is not None:
        points = args.points
    table = grid_evaluate(s.wave(beta), q_min, q_max, points)
    text = table.to_csv()
    if args.out:
        write_text_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- argument parsing -------------------------------------------------------

def _add_source(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", help=f"bundled scenario ({', '.join(preset_names())})")
    g.add_argument("--scenario", metavar="PATH", help="scenario JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakval", description="Weak values from postselected Gaussian pointer states"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="direct vs extracted weak value for a scenario")
    _add_source(p)
    p.add_argument("--ensemble", action="store_true", help="also sample the pointer")
    p.add_argument("--n", type=int, help="ensemble size (default: scenario)")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("extract", help="extract the weak value from an expression")
    p.add_argument("--expr", required=True, help="wavefunction text, e.g. 'exp(-beta*(Q-3)^2/2)'")
    p.add_argument("--pointer", default="Q", help="pointer variable name (default Q)")
    p.add_argument("--width", default="beta", help="width variable name (default beta)")
    p.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="bind a parameter; complex values like 1+2j are accepted")
    p.add_argument("--param-deg", action="append", metavar="NAME=DEGREES",
                   help="bind an angle given in degrees")
    p.add_argument("--method", choices=["dual", "fd"], default="dual")
    p.add_argument("--check-fd", action="store_true", help="add the finite-difference value")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("series", help="truncation study of the Aharonov-Vaidman expansion")
    _add_source(p)
    p.add_argument("--orders", default="1..8", help="range 'lo..hi' or list '1,2,8'")
    b = p.add_mutually_exclusive_group()
    b.add_argument("--beta", help="comma-separated beta values")
    b.add_argument("--weakness", help="comma-separated beta*max|c|^2 values")
    p.add_argument("--points", type=int, help="grid points")
    p.add_argument("--out", help="CSV destination (default stdout)")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("ensemble", help="Monte Carlo pointer readout")
    _add_source(p)
    p.add_argument("--n", type=int, help="ensemble size (default: scenario)")
    p.add_argument("--seed", type=int, help="RNG seed (default: $WEAKVAL_SEED, then scenario)")
    p.add_argument("--study", help="comma-separated ensemble sizes, e.g. 1e3,4e3")
    p.add_argument("--samples-out", help="write raw samples as single-column CSV")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("profile", help="detector wavefunction on a grid as CSV")
    _add_source(p)
    p.add_argument("--out", help="CSV destination (default stdout)")
    p.add_argument("--beta", type=float)
    p.add_argument("--q-min", type=float)
    p.add_argument("--q-max", type=float)
    p.add_argument("--points", type=int)
    p.set_defaults(func=cmd_profile)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", WeaknessWarning)
            code = args.func(args)
        for w in caught:
            print(f"weakval: warning: {w.message}", file=sys.stderr)
        return code
    except (WeakvalError, ValueError, OSError) as exc:
        print(f"weakval: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
