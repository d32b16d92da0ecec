"""Identity verification suites.

Each suite takes a weight and returns :class:`VerificationReport` objects
whose residuals are maximal relative errors.  Transformed families are
always checked against a from-scratch Cholesky factorization of the
shifted weight's moments.
"""
from __future__ import annotations

import time
from dataclasses import replace
from functools import cached_property
from typing import Callable, Sequence

from mpmath import mp, mpf

from . import _linalg as la
from .errors import DomainError
from .moments import verify_moment_symmetries
from .orthopoly import OrthoFamily
from .precision import to_mpf
from .report import VerificationReport, make_report
from .structure import (BandedMatrix, dressed_pascal, laguerre_freud, psi_constructions,
                        psi_extreme_diagonals, psi_window, verify_p_shift)
from .transforms import (christoffel_coeffs, christoffel_poly, christoffel_rows,
                         connection_matrices,
                         connection_residuals, factorization_residual, family,
                         geronimus_coeffs, geronimus_norms, geronimus_second_kind_residual,
                         shifted_norms_cf, shifted_poly_determinantal,
                         uvarov_resolvents, uvarov_second_kind_check)
from .weights import (PearsonWeight, ShiftSpec, all_shifts, christoffel_constant,
                      christoffel_root, eval_theta_sigma, eval_weight, make_weight,
                      shift_params)

IDENTITIES = ("pearson", "moments-hyper", "psi", "p-shift", "christoffel", "geronimus",
              "lu", "ul", "uvarov", "quasidet")

SUITE_WEIGHTS = {
    "charlier-0.5": ((), (), "1/2"),
    "charlier-1": ((), (), 1),
    "gen-charlier": ((), ("3/2",), "7/10"),
    "meixner": ((2,), (), "2/5"),
    "gen-meixner": (("17/10",), ("23/10",), "2/5"),
}

DEFAULT_Z = {
    "p-shift": (2, 5, 11),
    "christoffel": ("2.5", "-1.75", "4.3", "7.1", "0.6"),
    "geronimus": ("2.5", "-1.75", "4.3", "7.1", "0.6"),
    "uvarov": ("4.3", "9.7"),
    "quasidet": ("2.5", "6.5", "-3.25"),
}

PEARSON_KMAX = 200
MOMENT_K = 8
FACTOR_WINDOW = 8


def suite_weights() -> dict[str, PearsonWeight]:
    return {name: make_weight(*spec) for name, spec in SUITE_WEIGHTS.items()}


class SuiteContext:
    """Lazily built families shared by the suites of one weight."""

    def __init__(self, w: PearsonWeight, K: int = 16, prec: int = 256,
                 nmax: int | None = None, z: Sequence | None = None):
        self.w = w
        self.K = K
        self.prec = prec
        self.tol_bits = prec // 2
        self.nmax = nmax
        self.z = None if z is None else tuple(z)
        self.size = K + w.band

    @cached_property
    def fam(self) -> OrthoFamily:
        return family(self.w, self.size, self.prec)

    def shifted(self, s: ShiftSpec) -> OrthoFamily:
        return family(shift_params(self.w, s), self.size, self.prec)

    @cached_property
    def psi(self) -> BandedMatrix:
        return laguerre_freud(self.w, self.fam.cp, self.fam.jc, self.pascal)

    @cached_property
    def pascal(self):
        return dressed_pascal(self.fam.cp)

    def samples(self, suite: str) -> list[mpf]:
        with mp.workprec(self.fam.wp):
            return [mpf(z) for z in (self.z or DEFAULT_Z[suite])]

    def degree(self, default: int) -> int:
        return default if self.nmax is None else self.nmax

    def report(self, identity, residual, seconds, detail="") -> VerificationReport:
        return make_report(identity, self.w.params, self.K, self.prec, residual,
                           self.tol_bits, seconds=seconds, detail=detail)


def _zlabel(zs) -> str:
    return ",".join(mp.nstr(z, 8) for z in zs)


def _coeff_residual(rows, fam: OrthoFamily, nmax: int) -> mpf:
    worst = mp.zero
    for n in range(nmax + 1):
        ref = fam.coeffs(n)
        worst = max(worst, la.max_abs_diff([rows[n]], [ref]) / la.max_abs([ref]))
    return worst


def _rel(x, y) -> mpf:
    scale = max(abs(x), abs(y))
    return abs(x - y) / scale if scale else mp.zero


# -- suites -----------------------------------------------------------------

def suite_pearson(ctx: SuiteContext) -> list[VerificationReport]:
    start = time.perf_counter()
    w, prec = ctx.w, ctx.prec + 32
    worst = mp.zero
    with mp.workprec(prec):
        values = [eval_weight(w, k, prec) for k in range(PEARSON_KMAX + 2)]
        for k in range(PEARSON_KMAX + 1):
            theta1, _ = eval_theta_sigma(w, k + 1)
            _, sigma0 = eval_theta_sigma(w, k)
            lhs, rhs = theta1 * values[k + 1], sigma0 * values[k]
            worst = max(worst, _rel(lhs, rhs))
    return [ctx.report("theta(k+1)w(k+1) = sigma(k)w(k)", worst,
                       time.perf_counter() - start, f"k<={PEARSON_KMAX}")]


def suite_moments(ctx: SuiteContext) -> list[VerificationReport]:
    return verify_moment_symmetries(ctx.w, MOMENT_K, ctx.prec, ctx.tol_bits)


def suite_psi(ctx: SuiteContext) -> list[VerificationReport]:
    start = time.perf_counter()
    w, fam = ctx.w, ctx.fam
    W = psi_window(w, fam.cp)
    forms = psi_constructions(w, fam.cp, fam.jc, ctx.pascal)
    with mp.workprec(fam.wp):
        names = list(forms)
        base = la.window(forms[names[0]], W)
        agree = max(la.rel_diff(base, la.window(forms[n], W)) for n in names[1:])
        scale = la.max_abs(base)
        outside = max((abs(base[i][j]) for i in range(W) for j in range(W)
                       if j - i > w.N + 1 or i - j > w.M), default=mp.zero) / scale
        # the outermost diagonals must be genuinely nonzero
        inner = min(min(abs(base[i + w.M][i]) for i in range(W - w.M)),
                    min(abs(base[i][i + w.N + 1]) for i in range(W - w.N - 1))) / scale
        band = outside if inner > mpf(2) ** (-ctx.tol_bits) else mp.one
        low, high = psi_extreme_diagonals(w, fam.cp, fam.jc, W)
        diag = max(max(_rel(base[n + w.M][n], low[n]) for n in range(len(low))),
                   max(_rel(base[n][n + w.N + 1], high[n]) for n in range(len(high))))
    el = time.perf_counter() - start
    return [
        ctx.report("Psi closed forms agree", agree, el, f"{len(names)} forms, window {W}"),
        ctx.report("Psi band (M, N+1)", band, el, f"lower={w.M} upper={w.N + 1}"),
        ctx.report("Psi extreme diagonals", diag, el),
    ]


def suite_p_shift(ctx: SuiteContext) -> list[VerificationReport]:
    return verify_p_shift(ctx.w, ctx.fam.cp, ctx.psi, ctx.samples("p-shift"),
                          ctx.degree(10), ctx.tol_bits, ctx.K, ctx.prec)


def suite_christoffel(ctx: SuiteContext) -> list[VerificationReport]:
    w, fam = ctx.w, ctx.fam
    nmax = ctx.degree(8)
    zs = ctx.samples("christoffel")
    reports = []
    for s in all_shifts(w):
        start = time.perf_counter()
        sf = ctx.shifted(s)
        with mp.workprec(fam.wp):
            coeff = _coeff_residual(christoffel_coeffs(w, fam.cp, s, nmax), sf, nmax)
            point = mp.zero
            for z in zs:
                ref = sf.P(z - 1 if s.kind == "total" else z, nmax)
                for n in range(nmax + 1):
                    point = max(point, _rel(christoffel_poly(w, fam.cp, s, n, z), ref[n]))
            conn = mp.zero
            for z in zs:
                conn = max(conn, *connection_residuals(w, fam, sf, s, z, nmax))
            pair = connection_matrices(w, fam.cp, s, shifted=sf.cp)
            c = to_mpf(christoffel_constant(w.params, s))
            r = to_mpf(christoffel_root(w.params, s))
            P = fam.P(r, nmax + 1)
            diag = max(_rel(pair.omega[n, n], -P[n + 1] / P[n]) for n in range(nmax + 1))
            eq = mp.zero
            for n in range(nmax):
                # omega H = c TH Omega^T: diagonal and superdiagonal
                eq = max(eq, _rel(pair.omega[n, n] * fam.H[n], c * sf.H[n]),
                         _rel(fam.H[n + 1], c * sf.H[n] * pair.Omega[n + 1, n]))
        el = time.perf_counter() - start
        lab = s.label()
        reports += [
            ctx.report(f"Christoffel coefficients = shifted Cholesky [{lab}]", coeff, el,
                       f"n<={nmax}"),
            ctx.report(f"Christoffel kernel values [{lab}]", point, el,
                       f"n<={nmax} z={_zlabel(zs)}"),
            ctx.report(f"connection omega P = (z-r) TP, Omega TP = P [{lab}]", conn, el,
                       f"n<={nmax} z={_zlabel(zs)}"),
            ctx.report(f"omega diagonal = -P_n+1(r)/P_n(r) [{lab}]", diag, el),
            ctx.report(f"omega H = c TH Omega^T [{lab}]", eq, el),
        ]
    return reports


def suite_geronimus(ctx: SuiteContext) -> list[VerificationReport]:
    """Inverse shifts applied to ``T w`` must give back the family of w."""
    w, fam = ctx.w, ctx.fam
    nmax = ctx.degree(8)
    zs = ctx.samples("geronimus")
    reports = []
    for s in all_shifts(w):
        start = time.perf_counter()
        inv = s.inverted()
        up = shift_params(w, s)
        uf = ctx.shifted(s)
        with mp.workprec(fam.wp):
            rows = geronimus_coeffs(up, uf, inv, nmax + 1)
            coeff = _coeff_residual(rows, fam, nmax + 1)
            back = christoffel_rows(rows, w.params, s, nmax)
            trip = _coeff_residual(back, uf, nmax)
            gn = geronimus_norms(up, uf, inv, nmax)
            norms = max(_rel(gn[n], fam.H[n]) for n in range(nmax + 1))
            second = conn = mp.zero
            for z in zs:
                second = max(second, geronimus_second_kind_residual(up, uf, fam, inv, z, nmax))
                conn = max(conn, *connection_residuals(up, uf, fam, inv, z, nmax))
        el = time.perf_counter() - start
        lab = inv.label()
        reports += [
            ctx.report(f"Geronimus coefficients = Cholesky of w [{lab} on T w]", coeff, el,
                       f"n<={nmax + 1}"),
            ctx.report(f"Christoffel o Geronimus = identity [{lab}]", trip, el, f"n<={nmax}"),
            ctx.report(f"Geronimus norms, T^-1 H_0 from Q [{lab}]", norms, el, f"n<={nmax}"),
            ctx.report(f"Geronimus second kind relations [{lab}]", second, el,
                       f"n<={nmax} z={_zlabel(zs)}"),
            ctx.report(f"Geronimus connection identities [{lab}]", conn, el,
                       f"n<={nmax} z={_zlabel(zs)}"),
        ]
    return reports


def _factor_reports(ctx: SuiteContext, mode: str) -> list[VerificationReport]:
    w, fam = ctx.w, ctx.fam
    size = min(FACTOR_WINDOW, fam.cp.K - 3)
    reports = []
    for s in all_shifts(w):
        start = time.perf_counter()
        sf = ctx.shifted(s)
        res = factorization_residual(w, fam.cp, s, mode, size, sf.jc)
        el = time.perf_counter() - start
        lab = s.label()
        what = {"a": "J + a_i I", "b": "J + (b_j-1) I", "total": "J"}[s.kind] if mode == "LU" \
            else {"a": "IT J + a_i I", "b": "TJ J + (b_j-1) I", "total": "TJ + I"}[s.kind]
        reports.append(ctx.report(f"{mode}: {what} [{lab}]", res, el, f"window {size}"))
        if mode == "LU":
            start = time.perf_counter()
            with mp.workprec(fam.wp):
                cf = shifted_norms_cf(w, fam.cp, s, size)
                res = max(_rel(cf[n], sf.H[n]) for n in range(size + 1))
            reports.append(ctx.report(f"continued fraction LDL^T norms = Cholesky TH [{lab}]",
                                      res, time.perf_counter() - start, f"n<={size}"))
        else:
            # Geronimus side: U L of the inverse factors rebuilds w's Jacobi matrix
            start = time.perf_counter()
            up = shift_params(w, s)
            uf = ctx.shifted(s)
            res = factorization_residual(up, uf.cp, s.inverted(), "UL", size, fam.jc)
            reports.append(ctx.report(f"UL: J + d I from T^-1 factors [{s.inverted().label()}]",
                                      res, time.perf_counter() - start, f"window {size}"))
    return reports


def suite_lu(ctx):
    return _factor_reports(ctx, "LU")


def suite_ul(ctx):
    return _factor_reports(ctx, "UL")


def suite_uvarov(ctx: SuiteContext) -> list[VerificationReport]:
    w, fam = ctx.w, ctx.fam
    start = time.perf_counter()
    res = uvarov_resolvents(w, fam.cp, ctx.psi, fam.jc)
    el = time.perf_counter() - start
    reports = [ctx.report("Psi^T H^-1 = Pi sigma(J)", res.residual_plus, el),
               ctx.report("Psi H^-1 = Pi^-1 theta(J)", res.residual_minus, el)]
    for r in uvarov_second_kind_check(w, fam, ctx.psi, ctx.samples("uvarov"), ctx.prec,
                                      ctx.tol_bits):
        reports.append(replace(r, K=ctx.K))
    return reports


def suite_quasidet(ctx: SuiteContext) -> list[VerificationReport]:
    w, fam = ctx.w, ctx.fam
    nmax = ctx.degree(8)
    zs = ctx.samples("quasidet")
    Psi, H = ctx.psi, fam.H
    lo = max(w.M, w.N + 1)
    reports = []
    for direction, name in ((-1, "theta(z)P_n(z-1)"), (1, "sigma(z)/eta P_n(z+1)")):
        start = time.perf_counter()
        direct = via_psi = mp.zero
        with mp.workprec(fam.wp):
            eta = to_mpf(w.params.eta)
            for z in zs:
                theta, sigma = eval_theta_sigma(w, z)
                P = fam.P(z, Psi.K - 1)
                Ps = fam.P(z + direction, nmax)
                for n in range(lo, nmax + 1):
                    qd = shifted_poly_determinantal(w, fam, n, z, direction)
                    if direction < 0:
                        ref = theta * Ps[n]
                        band = mp.fsum(Psi[n, m] * P[m] / H[m]
                                       for m in range(max(0, n - w.M), n + w.N + 2))
                    else:
                        ref = sigma / eta * Ps[n]
                        band = mp.fsum(Psi[m, n] * P[m] / H[m]
                                       for m in range(max(0, n - w.N - 1), n + w.M + 1)) / eta
                    direct = max(direct, _rel(qd, ref))
                    via_psi = max(via_psi, _rel(qd, band))
        el = time.perf_counter() - start
        detail = f"n={lo}..{nmax} z={_zlabel(zs)}"
        reports += [ctx.report(f"quasi-determinant {name} = direct", direct, el, detail),
                    ctx.report(f"quasi-determinant {name} = Psi shift", via_psi, el, detail)]
    return reports


SUITES: dict[str, Callable[[SuiteContext], list[VerificationReport]]] = {
    "pearson": suite_pearson,
    "moments-hyper": suite_moments,
    "psi": suite_psi,
    "p-shift": suite_p_shift,
    "christoffel": suite_christoffel,
    "geronimus": suite_geronimus,
    "lu": suite_lu,
    "ul": suite_ul,
    "uvarov": suite_uvarov,
    "quasidet": suite_quasidet,
}


def run_suites(w: PearsonWeight, identities: Sequence[str] = IDENTITIES, K: int = 16,
               prec: int = 256, nmax: int | None = None,
               z: Sequence | None = None) -> list[VerificationReport]:
    """Run the selected suites in the canonical order."""
    unknown = [name for name in identities if name not in SUITES]
    if unknown:
        raise DomainError(f"unknown identity suite(s): {', '.join(unknown)}")
    ctx = SuiteContext(w, K, prec, nmax, z)
    reports = []
    for name in IDENTITIES:
        if name in identities:
            reports += SUITES[name](ctx)
    return reports
