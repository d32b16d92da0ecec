"""Command line front end: ``dop compute | verify | table | weight``.

Exit codes: 0 success, 1 a verification failed, 2 bad configuration,
3 numerical breakdown.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mp

from .errors import DomainError, HypothesisViolated, NumericBreakdown, WindowTooSmall
from .moments import moments
from .precision import default_prec, digits, to_fraction
from .report import overall_status, render_report
from .structure import laguerre_freud
from .suites import IDENTITIES, run_suites
from .transforms import family
from .weights import PearsonWeight, eval_weight, make_weight, pearson_residual

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BREAKDOWN = 0, 1, 2, 3


@dataclass
class RunConfig:
    """Validated command line settings."""

    a: tuple[Fraction, ...]
    b: tuple[Fraction, ...]
    eta: Fraction
    K: int = 16
    prec: int = 256
    nmax: int | None = None
    z: tuple[str, ...] | None = None
    identities: tuple[str, ...] = IDENTITIES
    fmt: str = "json"
    timings: bool = False
    weight: PearsonWeight = field(init=False, repr=False)

    def __post_init__(self):
        if self.prec < 53:
            raise DomainError(f"precision {self.prec} below 53 bits")
        if self.K < 4:
            raise DomainError(f"K = {self.K} too small (need K >= 4)")
        if self.nmax is not None and self.nmax < 0:
            raise DomainError("nmax must be non-negative")
        self.weight = make_weight(self.a, self.b, self.eta)


def _param_list(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(to_fraction(x) for x in text.split(",") if x.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"bad parameter list {text!r}: {exc}") from None


def _config(args) -> RunConfig:
    try:
        eta = to_fraction(args.eta)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"bad eta {args.eta!r}") from None
    idents = IDENTITIES
    if getattr(args, "identities", None):
        idents = tuple(x.strip() for x in args.identities.split(",") if x.strip())
        unknown = [x for x in idents if x not in IDENTITIES]
        if unknown:
            raise DomainError(f"unknown identities: {', '.join(unknown)} "
                              f"(choose from {', '.join(IDENTITIES)})")
    z = tuple(x.strip() for x in args.z.split(",")) if getattr(args, "z", None) else None
    return RunConfig(_param_list(args.a), _param_list(args.b), eta, K=args.K,
                     prec=args.prec, nmax=args.nmax, z=z, identities=idents,
                     fmt=args.format, timings=getattr(args, "timings", False))


def _fmt(x, prec) -> str:
    return mp.nstr(x, digits(prec)) if x != 0 else "0"


def _emit_table(header, rows, fmt, prec) -> str:
    """A table of strings as CSV, a JSON object list or aligned text."""
    if fmt == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)
        return buf.getvalue()
    if fmt == "json":
        return json.dumps({"prec": prec, "rows": [dict(zip(header, r)) for r in rows]},
                          indent=2, sort_keys=True) + "\n"
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    return "\n".join("  ".join(str(c).rjust(wd) for c, wd in zip(r, widths))
                     for r in [header, *rows]) + "\n"


def cmd_compute(cfg: RunConfig, args) -> int:
    nmax = 10 if cfg.nmax is None else cfg.nmax
    fam = family(cfg.weight, max(cfg.K, nmax + 2), cfg.prec)
    with mp.workprec(cfg.prec):
        rows = []
        for n in range(nmax + 1):
            row = [str(n), _fmt(+fam.jc.beta[n], cfg.prec), _fmt(+fam.jc.gamma[n], cfg.prec),
                   _fmt(+fam.H[n], cfg.prec)]
            if args.coeffs:
                row.append(" ".join(_fmt(+c, cfg.prec) for c in fam.coeffs(n)))
            rows.append(row)
    header = ["n", "beta", "gamma", "H"] + (["coeffs"] if args.coeffs else [])
    sys.stdout.write(_emit_table(header, rows, cfg.fmt, cfg.prec))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    reports = run_suites(cfg.weight, cfg.identities, cfg.K, cfg.prec, cfg.nmax, cfg.z)
    sys.stdout.write(render_report(reports, cfg.fmt, cfg.timings))
    return EXIT_OK if overall_status(reports) == "pass" else EXIT_FAIL


def cmd_table(cfg: RunConfig, args) -> int:
    nmax = 10 if cfg.nmax is None else cfg.nmax
    prec = cfg.prec
    if args.what == "moments":
        with mp.workprec(prec):
            rho = moments(cfg.weight, nmax + 1, prec)
            rows = [[str(n), _fmt(r, prec)] for n, r in enumerate(rho)]
        header = ["n", "rho"]
    elif args.what == "coeffs":
        fam = family(cfg.weight, max(cfg.K, nmax + 2), prec)
        with mp.workprec(prec):
            rows = [[str(n)] + [_fmt(+c, prec) for c in fam.coeffs(n)] + [""] * (nmax - n)
                    for n in range(nmax + 1)]
        header = ["n"] + [f"z^{k}" for k in range(nmax + 1)]
    else:
        fam = family(cfg.weight, cfg.K + cfg.weight.band, prec)
        Psi = laguerre_freud(cfg.weight, fam.cp, fam.jc)
        with mp.workprec(prec):
            rows = [[str(i)] + [_fmt(Psi[i, j], prec) for j in range(Psi.K)]
                    for i in range(Psi.K)]
        header = ["row"] + [str(j) for j in range(Psi.K)]
    sys.stdout.write(_emit_table(header, rows, cfg.fmt, prec))
    return EXIT_OK


def cmd_weight(cfg: RunConfig, args) -> int:
    w, prec = cfg.weight, cfg.prec
    if args.action == "eval":
        ks = [args.k] if args.k is not None else range((10 if cfg.nmax is None else cfg.nmax) + 1)
        with mp.workprec(prec):
            rows = [[str(k), _fmt(eval_weight(w, k, prec), prec)] for k in ks]
        sys.stdout.write(_emit_table(["k", "w"], rows, cfg.fmt, prec))
        return EXIT_OK
    kmax = args.k if args.k is not None else 200
    with mp.workprec(prec):
        rows = []
        for k in range(kmax + 1):
            wk = eval_weight(w, k, prec)
            rows.append([str(k), _fmt(wk, prec), _fmt(pearson_residual(w, k, prec), prec)])
    sys.stdout.write(_emit_table(["k", "w", "pearson_residual"], rows, cfg.fmt, prec))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", default="", help="comma-separated a parameters ('' for none)")
    common.add_argument("--b", default="", help="comma-separated b parameters ('' for none)")
    common.add_argument("--eta", default="1", help="eta > 0 (decimal or p/q)")
    common.add_argument("--K", type=int, default=16, help="truncation window size")
    common.add_argument("--prec", type=int, default=None,
                        help="working precision in bits (default $DOP_PREC or 256)")
    common.add_argument("--nmax", type=int, default=None, help="largest degree reported")
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)

    parser = argparse.ArgumentParser(
        prog="dop", description="Semiclassical discrete orthogonal polynomials on the "
                                "nonnegative integers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="recurrence coefficients and norms")
    p.add_argument("--coeffs", action="store_true", help="add monic coefficient lists")
    p.set_defaults(func=cmd_compute, default_format="csv")

    p = sub.add_parser("verify", parents=[common], help="run identity suites")
    p.add_argument("--identities", default="",
                   help=f"comma-separated subset of: {', '.join(IDENTITIES)}")
    p.add_argument("--z", default="", help="comma-separated sample points")
    p.add_argument("--timings", action="store_true", help="include wall times")
    p.set_defaults(func=cmd_verify, default_format="json")

    p = sub.add_parser("table", parents=[common], help="emit a table")
    p.add_argument("what", choices=("moments", "coeffs", "psi"))
    p.set_defaults(func=cmd_table, default_format="csv")

    p = sub.add_parser("weight", parents=[common], help="pointwise weight diagnostics")
    p.add_argument("action", choices=("eval", "pearson"))
    p.add_argument("--k", type=int, default=None, help="lattice point (eval) or last k")
    p.set_defaults(func=cmd_weight, default_format="text")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.prec is None:
        try:
            args.prec = default_prec()
        except ValueError as exc:
            print(f"dop: error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    if args.format is None:
        args.format = args.default_format
    try:
        cfg = _config(args)
        return args.func(cfg, args)
    except (DomainError, HypothesisViolated, WindowTooSmall) as exc:
        print(f"dop: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericBreakdown as exc:
        print(f"dop: numeric breakdown: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN


if __name__ == "__main__":
    sys.exit(main())
