"""Command-line front end: ``ratsphere <command> [options]``.

Every command writes JSON lines (a config header, then records) to ``--out`` or
stdout.  Outputs carry no timestamps, so reruns with the same flags are
byte-identical.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from . import equidist_covering as ec
from .lattice_points import omega_n_count_exact, omega_n_count_mobius, omega_T
from .quaternion_hecke import hecke_eigenbasis
from .reports import (
    JsonLinesWriter,
    RadiusRule,
    cache_dir,
    cached_omega_n,
    write_csv,
    write_points_csv,
    write_svg,
)
from .sphere_harmonics import orthogonal_harmonic_basis
from .theta_modular import (
    VanishingFirstCoefficient,
    eichler_verify,
    hecke_lambda,
    kohnen_lift_A,
    theta_series,
)
from .polynomials import HomogeneousPoly


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _config(args) -> dict:
    skip = {"func", "out", "workers", "cache_dir"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _points(args):
    if (args.n is None) == (args.T is None):
        raise SystemExit("give exactly one of --n and --T")
    if args.n is not None:
        return cached_omega_n(args.n, args.d, cache_dir(args.cache_dir))
    return omega_T(args.T, args.d, workers=args.workers)


# --- commands ---------------------------------------------------------------

def cmd_enumerate(args) -> int:
    pts = _points(args)
    pts.check_invariants()
    summary = {"record": "summary", "count": len(pts), "d": args.d}
    status = 0
    if args.n is not None:
        mob = omega_n_count_mobius(args.n, args.d)
        summary["mobius_formula"] = mob
        ok = mob == len(pts)
        if args.d == 2:
            summary["exact_formula"] = omega_n_count_exact(args.n)
            ok = ok and summary["exact_formula"] == len(pts)
        summary["cross_check"] = "ok" if ok else "mismatch"
        status = 0 if ok else 1
    else:
        expected = sum(omega_n_count_mobius(n, args.d) for n in range(1, args.T + 1))
        summary["formula_sum"] = expected
        summary["cross_check"] = "ok" if expected == len(pts) else "mismatch"
        status = 0 if expected == len(pts) else 1
    if args.csv:
        write_points_csv(args.csv, pts)
    if args.svg:
        write_svg(args.svg, pts)
    with _output(args.out) as fh:
        w = JsonLinesWriter(fh, "enumerate", _config(args))
        w.write(summary)
    return status


def cmd_capstats(args) -> int:
    rule = RadiusRule.parse(args.R_rule)
    pts = cached_omega_n(args.n, 2, cache_dir(args.cache_dir))
    R = rule(args.n)
    rng = ec.make_rng(args.seed)
    centers = ec.uniform_sphere(rng, args.caps)
    counts = ec.cap_counts(pts, centers, R)
    expected = len(pts) * ec.cap_measure(R, 2)
    ratios = counts / expected
    q1, med, q3 = np.percentile(ratios, [25, 50, 75])
    with _output(args.out) as fh:
        w = JsonLinesWriter(fh, "capstats", _config(args))
        if args.per_cap:
            for a, c, r in zip(centers.tolist(), counts.tolist(), ratios.tolist()):
                w.write({"record": "cap", "alpha": a, "count": c, "expected": expected, "ratio": r})
        w.write(
            {
                "record": "summary",
                "n": args.n,
                "R": R,
                "size": len(pts),
                "expected": expected,
                "median_ratio": float(med),
                "iqr": float(q3 - q1),
                "mean_ratio": float(ratios.mean()),
            }
        )
    return 0


def cmd_variance(args) -> int:
    rule = RadiusRule.parse(args.R_rule)
    est = ec.variance_mc(args.n, rule(args.n), args.samples, args.seed)
    rec = {"record": "variance", **est.as_dict()}
    rec["within_bound_3se"] = est.variance <= est.bound + 3 * est.std_error
    with _output(args.out) as fh:
        JsonLinesWriter(fh, "variance", _config(args)).write(rec)
    return 0


def cmd_covering(args) -> int:
    with _output(args.out) as fh:
        w = JsonLinesWriter(fh, "covering", _config(args))
        if args.T_list:
            reports = []
            for T in _int_list(args.T_list):
                rep = ec.covering_radius(omega_T(T, 2, workers=args.workers), args.grid)
                reports.append(rep)
                w.write({"record": "covering", "T": T, **rep.as_dict()})
            if len(reports) >= 3:
                slope, resid = ec.covering_exponent_estimate(reports)
                w.write({"record": "exponent", "estimate": slope, "residual": resid})
            return 0
        pts = _points(args)
        rep = ec.covering_radius(pts, args.grid)
        w.write({"record": "covering", **rep.as_dict()})
        if args.epsilon is not None:
            g = ec.generic_covering_radius(pts, args.epsilon, args.grid)
            w.write({"record": "generic_covering", "epsilon": args.epsilon, "radius": g})
    return 0


def cmd_linnik(args) -> int:
    rows = ec.linnik_exponent_scan(args.lmax)
    status = 0 if all(r["z_min"] is not None for r in rows) else 1
    with _output(args.out) as fh:
        w = JsonLinesWriter(fh, "linnik", _config(args))
        for r in rows:
            w.write({"record": "linnik", **r})
        slope, pts = ec.dyadic_max_exponent(rows)
        w.write({"record": "dyadic_fit", "slope": slope, "ranges": [list(p) for p in pts]})
    if args.csv:
        write_csv(
            args.csv,
            ["ell", "n", "z_min", "exponent", "trivial"],
            ([r["ell"], r["n"], r["z_min"], r["exponent"], int(r["trivial"])] for r in rows),
        )
    return status


def _verification_polys(nu: int) -> list[HomogeneousPoly]:
    if nu == 0:
        return [HomogeneousPoly({(0, 0, 0): Fraction(1)})]
    return orthogonal_harmonic_basis(nu)[0]


def cmd_hecke_verify(args) -> int:
    failures = 0
    with _output(args.out) as fh:
        w = JsonLinesWriter(fh, "hecke-verify", _config(args))
        for i, P in enumerate(_verification_polys(args.nu)):
            rep = eichler_verify(args.p, P, args.nmax)
            failures += len(rep.failures)
            w.write(
                {
                    "record": "eichler",
                    "basis_index": i,
                    "checked": len(rep.rows),
                    "failures": [{"n": r.n, "lhs": str(r.lhs), "rhs": str(r.rhs)} for r in rep.failures],
                }
            )
        w.write({"record": "summary", "total_failures": failures})
    return 1 if failures else 0


def cmd_eigenbasis(args) -> int:
    primes = _int_list(args.primes)
    basis = hecke_eigenbasis(args.nu, primes, seed=args.seed)
    with _output(args.out) as fh:
        w = JsonLinesWriter(fh, "eigenbasis", _config(args))
        w.write({"record": "basis", **basis.metadata()})
        for i, f in enumerate(basis):
            rec = {
                "record": "eigenfunction",
                "index": i,
                "block": f.block,
                "eigenvalues": {str(p): v for p, v in f.eigenvalues.items()},
                "max_residual": max(f.residuals.values()),
                "coefficients": [round(float(c), 12) for c in f.coeffs],
            }
            try:
                rec["A1"] = float(kohnen_lift_A(f.poly, 1))
                rec["lambda"] = {str(p): hecke_lambda(f.poly, p) for p in primes}
            except VanishingFirstCoefficient:
                rec["A1"] = 0.0
            w.write(rec)
    return 0


def cmd_theta(args) -> int:
    polys = _verification_polys(args.nu)
    if not 0 <= args.index < len(polys):
        raise SystemExit(f"--index must lie in [0, {len(polys) - 1}]")
    series = theta_series(polys[args.index], args.nmax, args.lattice)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(series.to_csv())
    with _output(args.out) as fh:
        w = JsonLinesWriter(fh, "theta", _config(args))
        w.write({"record": "polynomial", "poly": polys[args.index].to_json()})
        for n, v in sorted(series.values.items()):
            v = Fraction(v)
            w.write({"record": "coefficient", "n": n, "numerator": v.numerator, "denominator": v.denominator})
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ratsphere", description="Rational points on spheres: experiments")
    parser.add_argument("--out", default=None, help="JSON-lines output path (default stdout)")
    parser.add_argument("--cache-dir", default=None, help="point cache directory (default env RSL_CACHE)")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    def heights(p):
        p.add_argument("--n", type=int, default=None, help="fixed height n")
        p.add_argument("--T", type=int, default=None, help="all heights up to T")
        p.add_argument("--d", type=int, default=2, help="sphere dimension")

    p = sub.add_parser("enumerate", help="list Omega_n or Omega_T")
    heights(p)
    p.add_argument("--csv", default=None, help="write the points as CSV")
    p.add_argument("--svg", default=None, help="write an orthographic SVG scatter")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("capstats", help="count/expected over random caps")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--R-rule", required=True, help='radius rule, e.g. "n^-0.25"')
    p.add_argument("--caps", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--per-cap", action="store_true", help="also emit one record per cap")
    p.set_defaults(func=cmd_capstats)

    p = sub.add_parser("variance", help="Monte-Carlo variance of cap counts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--R-rule", required=True)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("covering", help="grid covering radius")
    heights(p)
    p.add_argument("--T-list", default=None, help="comma-separated T values for a trend and exponent fit")
    p.add_argument("--grid", type=int, default=200_000)
    p.add_argument("--epsilon", type=float, default=None, help="also report the generic covering radius")
    p.set_defaults(func=cmd_covering)

    p = sub.add_parser("linnik", help="minimal |z| for x^2+y^2+z^2 = l^2")
    p.add_argument("--lmax", type=int, required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_linnik)

    p = sub.add_parser("hecke-verify", help="exact Eichler commutation check on a basis of H_nu")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--nmax", type=int, default=300)
    p.set_defaults(func=cmd_hecke_verify)

    p = sub.add_parser("eigenbasis", help="joint Hecke eigenbasis of H_nu")
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--primes", default="3,5,7")
    p.add_argument("--seed", type=int, default=20240601)
    p.set_defaults(func=cmd_eigenbasis)

    p = sub.add_parser("theta", help="theta coefficients r_P(n) for a basis polynomial")
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--index", type=int, default=0, help="index into the orthogonal basis of H_nu")
    p.add_argument("--nmax", type=int, default=100)
    p.add_argument("--lattice", choices=["Z3", "Lambda"], default="Z3")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_theta)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
