"""Command-line entry point: exact curves, moments, samplers and comparisons.

Every output file starts with ``#`` lines echoing the full run
configuration, followed by a CSV header and rows at 17 significant digits.
Exit status is 0 on success, 1 on invalid input and 2 when a numerical
quality check (cancellation bound, unitarity, eigen-residual) fails.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import core, rotor, sampler, stats

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

CURVES = ("max", "pdf", "gumbel", "min", "minpdf", "weibull")

log = logging.getLogger("evstates")


class InputError(ValueError):
    pass


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def run_config(args):
    """``key=value`` lines describing the run, in a fixed order."""
    lines = [f"evstates {__version__}", f"command={args.command}"]
    for key in sorted(vars(args)):
        if key in ("command", "func", "verbose"):
            continue
        val = getattr(args, key)
        if isinstance(val, (list, tuple)):
            val = ",".join(repr(v) if isinstance(v, float) else str(v) for v in val)
        elif isinstance(val, float):
            val = repr(val)
        lines.append(f"{key}={val}")
    return lines


def _open_out(path):
    if path in (None, "-"):
        return _Stdout()
    return open(path, "w", newline="")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        return False


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def exact_grid(n, points, which):
    """Uniform grid over the support, with every knot (and a_N for gumbel) added."""
    if points < 2:
        raise InputError("grid needs at least 2 points")
    if which in ("min", "minpdf", "weibull"):
        return np.linspace(0.0, 1.0 / n, points)
    grid = np.linspace(1.0 / n, 1.0, points)
    extra = [1.0 / k for k in range(1, n + 1)]
    if which == "gumbel" and n >= 2:
        extra.append(math.log(n) / n)
    return np.unique(np.concatenate([grid, extra]))


def cmd_exact(args):
    n, which = args.n, args.which
    if n < 1 or (which in ("pdf", "minpdf", "gumbel") and n < 2):
        raise InputError(f"--which {which} needs a larger --n")
    t = exact_grid(n, args.points, which)
    if which == "max":
        col, vals = "F", core.max_cdf(t, n)
    elif which == "pdf":
        col, vals = "rho", core.max_pdf(t, n)
    elif which == "gumbel":
        col, vals = "F", core.gumbel_limit_cdf(t, n)
    elif which == "min":
        col, vals = "F", core.min_cdf(t, n)
    elif which == "minpdf":
        col, vals = "rho", core.min_pdf(t, n)
    else:
        col, vals = "F", core.weibull_limit_cdf(t, n)
    with _open_out(args.out) as fh:
        stats.write_curve_csv(fh, {"t": t, col: vals}, run_config(args))


def cmd_moments(args):
    ns = args.n
    if not ns or min(ns) < 1:
        raise InputError("--n needs positive dimensions")
    cols = {
        "n": ns,
        "mean_max": [core.mean_max(n) for n in ns],
        "second_moment_max": [core.second_moment_max(n) for n in ns],
        "std_max": [core.std_max(n) for n in ns],
        "mean_min": [core.mean_min(n) for n in ns],
    }
    with _open_out(args.out) as fh:
        stats.write_curve_csv(fh, cols, run_config(args))


def cmd_sample(args):
    if args.n < 1 or args.count < 1 or args.workers < 1:
        raise InputError("--n, --count and --workers must be positive")
    seed = sampler.SeedSpec(args.seed, args.stream)
    rec = sampler.monte_carlo_ensemble(args.n, args.count, seed, workers=args.workers)
    with _open_out(args.out) as fh:
        sampler.write_records_csv(fh, rec, run_config(args))


def cmd_rotor(args):
    spec = rotor.EnsembleSpec(
        n=args.n,
        k_min=args.k_min,
        k_max=args.k_max,
        k_count=args.k_count,
        alphas=tuple(args.alpha),
        betas=tuple(args.beta),
        alpha_jitter=args.alpha_jitter,
        beta_jitter=args.beta_jitter,
        seed=args.seed,
        break_time_reversal=not args.allow_symmetric,
    )
    rec = rotor.ensemble_extremes(spec, workers=args.workers, on_error=args.on_error)
    with _open_out(args.out) as fh:
        rotor.write_rotor_csv(fh, rec, run_config(args))


def read_records(path):
    """``(max, min)`` columns of a sampler or rotor CSV, skipping ``#`` lines."""
    with open(path, newline="") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        try:
            header = next(rows)
        except StopIteration:
            raise InputError(f"{path}: no header row")
        if "max" not in header or "min" not in header:
            raise InputError(f"{path}: needs 'max' and 'min' columns")
        i, j = header.index("max"), header.index("min")
        hi, lo = [], []
        for r in rows:
            hi.append(float(r[i]))
            lo.append(float(r[j]))
    return np.array(hi), np.array(lo)


def _target(n, target, quantity):
    if target == "exact" and quantity == "max":
        return (lambda x: core.max_cdf(x, n, atol=1e-10)), (lambda x: core.max_pdf(x, n, atol=1e-10))
    if target == "exact":
        return (lambda x: core.min_cdf(x, n)), (lambda x: core.min_pdf(x, n))
    if target == "gumbel":
        if quantity != "max":
            raise InputError("the Gumbel limit applies to the maximum")
        return (lambda x: core.gumbel_limit_cdf(x, n)), (lambda x: core.gumbel_limit_pdf(x, n))
    if quantity != "min":
        raise InputError("the Weibull limit applies to the minimum")
    return (lambda x: core.weibull_limit_cdf(x, n)), (lambda x: core.weibull_limit_pdf(x, n))


def cmd_compare(args):
    n = args.n
    if n < 2:
        raise InputError("--n must be >= 2")
    quantity = args.quantity or ("min" if args.target == "weibull" else "max")
    cdf, pdf = _target(n, args.target, quantity)
    hi, lo = read_records(args.records)
    emp = stats.EmpiricalDistribution(hi if quantity == "max" else lo)
    ks = stats.ks_distance(emp, cdf)
    chi2, dof = stats.chi_square(emp, cdf, bins=args.bins)
    hist = stats.histogram(emp, args.bins)
    header = run_config(args)

    overlay = args.overlay
    if overlay is None and args.out not in (None, "-"):
        out = Path(args.out)
        overlay = str(out.with_name(out.stem + ".overlay.csv"))
    if overlay is not None:
        stats.write_curve_csv(
            overlay,
            {"x": hist.centers, "empirical": hist.density, "target": pdf(hist.centers)},
            header,
        )

    report = {
        "metric": ["count", "ks_distance", "critical_1pct", "pass", "chi_square", "chi_square_dof"],
        "value": [ks.count, ks.distance, ks.critical_1pct, int(ks.passed), chi2, dof],
    }
    with _open_out(args.out) as fh:
        stats.write_curve_csv(fh, report, header)
    if args.out not in (None, "-"):
        verdict = "PASS" if ks.passed else "FAIL"
        print(f"{verdict} ks={ks.distance:.6g} critical_1pct={ks.critical_1pct:.6g} count={ks.count}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="evstates",
        description="Extreme intensity statistics of complex random and kicked-rotor states.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("exact", help="tabulate an exact or limiting curve")
    s.add_argument("--n", type=int, default=32)
    s.add_argument("--points", type=int, default=201)
    s.add_argument("--which", choices=CURVES, default="max")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_exact)

    s = sub.add_parser("moments", help="exact moments of the extremes")
    s.add_argument("--n", type=_int_list, default=[2, 3, 8, 32, 128])
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_moments)

    s = sub.add_parser("sample", help="Monte Carlo extremes of random states")
    s.add_argument("--n", type=int, default=32)
    s.add_argument("--count", type=int, default=1_000_000)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--stream", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("rotor", help="eigenvector extremes of the kicked rotor")
    s.add_argument("--n", type=int, default=32)
    s.add_argument("--k-min", type=float, default=13.8)
    s.add_argument("--k-max", type=float, default=14.8)
    s.add_argument("--k-count", type=int, default=940)
    s.add_argument("--alpha", type=_float_list, default=[0.35])
    s.add_argument("--beta", type=_float_list, default=[0.17])
    s.add_argument("--alpha-jitter", type=float, default=0.0)
    s.add_argument("--beta-jitter", type=float, default=0.0)
    s.add_argument("--allow-symmetric", action="store_true",
                   help="accept beta near 0 or 1/2 (time-reversal symmetric)")
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--on-error", choices=("raise", "skip"), default="raise")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_rotor)

    s = sub.add_parser("compare", help="KS comparison of records against a law")
    s.add_argument("--records", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--target", choices=("exact", "gumbel", "weibull"), default="exact")
    s.add_argument("--quantity", choices=("max", "min"), default=None)
    s.add_argument("--bins", type=int, default=50)
    s.add_argument("--overlay", default=None, help="density overlay CSV (x,empirical,target)")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (core.PrecisionLossError, rotor.UnitarityError, rotor.DiagonalizationError) as exc:
        print(f"evstates: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, OSError) as exc:
        print(f"evstates: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
