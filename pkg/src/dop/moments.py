"""Moment series, Hankel windows and the moment-level hypergeometric identities."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

from mpmath import mp, mpf

from . import _linalg as la
from .errors import DomainError, NumericBreakdown, SlowConvergence
from .precision import rounded, to_mpf
from .report import VerificationReport, make_report
from .weights import PearsonWeight, ShiftSpec, iter_weight, shift_params

#: Guard bits used while summing a moment series.
SERIES_GUARD = 64
DEFAULT_K_MAX = 10**6
#: Number of consecutive negligible terms required by the stopping rule.
TAIL_RUN = 4


def lattice_sums(w: PearsonWeight, terms: Callable[[int, mpf], Sequence[mpf]],
                 count: int, prec: int, k_max: int = DEFAULT_K_MAX) -> list[mpf]:
    """Sum ``sum_k terms(k, w(k))`` componentwise over the lattice.

    Runs at the ambient precision.  A component is negligible at ``k`` when
    its term is below ``2**-(prec+32)`` times the running sum of absolute
    values (which equals the partial sum for positive series) and does not
    exceed the previous term in modulus.  Summation stops after
    ``TAIL_RUN`` consecutive indices at which every component is negligible.
    """
    eps = mpf(2) ** (-(prec + 32))
    sums = [mp.zero] * count
    abs_sums = [mp.zero] * count
    prev = [None] * count
    run = 0
    for k, wk in enumerate(iter_weight(w)):
        if k > k_max:
            raise SlowConvergence(f"series not converged after k_max = {k_max} terms")
        vals = terms(k, wk)
        small = True
        for i, t in enumerate(vals):
            sums[i] += t
            at = abs(t)
            abs_sums[i] += at
            if small and (not abs_sums[i] or at > eps * abs_sums[i]
                          or (prev[i] is not None and at > prev[i])):
                small = False
            prev[i] = at
        run = run + 1 if small else 0
        if run >= TAIL_RUN:
            return sums


def _moment_terms(count):
    def terms(k, wk):
        out = [wk]
        kk = mpf(k)
        for _ in range(count - 1):
            out.append(out[-1] * kk)
        return out
    return terms


def moments(w: PearsonWeight, count: int, prec: int,
            k_max: int = DEFAULT_K_MAX) -> list[mpf]:
    """``rho_0 .. rho_{count-1}`` from one sweep over the lattice.

    Summation runs with ``SERIES_GUARD`` extra bits; results are rounded to
    ``prec``.
    """
    if count < 1:
        raise ValueError("count must be positive")
    with mp.workprec(prec + SERIES_GUARD):
        raw = lattice_sums(w, _moment_terms(count), count, prec + SERIES_GUARD, k_max)
    return [rounded(x, prec) for x in raw]


def moment(w: PearsonWeight, n: int, prec: int, k_max: int = DEFAULT_K_MAX) -> mpf:
    """``rho_n = sum_k k**n w(k)``."""
    if n < 0:
        raise DomainError("moment order must be non-negative")
    with mp.workprec(prec + SERIES_GUARD):
        kpow = lambda k, wk: [wk * mpf(k) ** n if n else wk]  # noqa: E731
        raw = lattice_sums(w, kpow, 1, prec + SERIES_GUARD, k_max)[0]
    return rounded(raw, prec)


@dataclass(frozen=True)
class HankelTruncation:
    """The K x K Hankel window ``G[n][m] = rho[n + m]`` backed by one array."""

    K: int
    rho: tuple
    prec: int

    def __post_init__(self):
        if len(self.rho) < 2 * self.K - 1:
            raise ValueError("need 2K - 1 moments for a K x K window")

    def __getitem__(self, nm):
        n, m = nm
        if not (0 <= n < self.K and 0 <= m < self.K):
            raise IndexError(nm)
        return self.rho[n + m]

    def to_dense(self) -> list[list[mpf]]:
        return [[self.rho[n + m] for m in range(self.K)] for n in range(self.K)]

    def window(self, k: int) -> "HankelTruncation":
        return HankelTruncation(k, self.rho[:2 * k - 1], self.prec)


def moment_matrix(w: PearsonWeight, K: int, prec: int,
                  k_max: int = DEFAULT_K_MAX) -> HankelTruncation:
    if K < 1:
        raise ValueError("K must be at least 1")
    return HankelTruncation(K, tuple(moments(w, 2 * K - 1, prec, k_max)), prec)


def hankel_dets(G: HankelTruncation) -> list[mpf]:
    """Leading principal minors ``Delta_1 .. Delta_K`` from the LDL^T pivots."""
    with mp.workprec(G.prec):
        _, d = la.ldl(G.to_dense(), pivot_floor=mpf(2) ** (-G.prec) * abs(G.rho[0]))
        out, acc = [], mp.one
        for pivot in d:
            acc *= pivot
            out.append(+acc)
    return out


# -- hypergeometric symmetries of the moment matrix ------------------------

def _lam(G):
    """``Lambda @ G`` for a (square) matrix: drop the first row."""
    n = len(G)
    return [list(G[i + 1]) if i + 1 < n else [mp.zero] * len(G[0]) for i in range(n)]


def _pascal_dense(n, inverse=False):
    from math import comb
    sgn = -1 if inverse else 1
    return [[mpf(sgn ** (i - j) * comb(i, j)) if i >= j else mp.zero for j in range(n)]
            for i in range(n)]


def moment_identity_residuals(w: PearsonWeight, K: int, rho: Sequence,
                              shifted: dict, prec: int) -> dict[str, mpf]:
    """Residuals of the four moment identities on the leading K x K window.

    ``rho`` are moments of ``w`` (at least ``2L - 1`` of them, with
    ``L = K + N + M + 2``); ``shifted`` maps each forward ShiftSpec to the
    moments of the shifted weight.  Exposed separately so tampered moment
    tables can be checked.
    """
    L = K + w.band
    p = w.params
    with mp.workprec(prec):
        G = [[rho[n + m] for m in range(L)] for n in range(L)]
        lamG = _lam(G)
        out = {}
        for s, srho in shifted.items():
            TG = [[srho[n + m] for m in range(L)] for n in range(L)]
            if s.kind == "a":
                c = to_mpf(p.a[s.index - 1])
                name = f"(Lambda+a_{s.index})G = a_{s.index} IT{s.index}G"
            elif s.kind == "b":
                c = to_mpf(p.b[s.index - 1] - 1)
                name = f"(Lambda+b_{s.index}-1)G = (b_{s.index}-1) TJ{s.index}G"
            else:
                continue
            lhs = la.add(lamG, la.scale_rows([c] * L, G))
            rhs = [[c * x for x in row] for row in TG]
            out[name] = la.rel_diff(la.window(lhs, K), la.window(rhs, K))
        total = [v for s, v in shifted.items() if s.kind == "total"]
        B = _pascal_dense(L)
        if total:
            TG = [[total[0][n + m] for m in range(L)] for n in range(L)]
            c = to_mpf(p.eta * p.kappa)
            rhs = la.matmul(la.matmul(B, TG), la.transpose(B))
            rhs = [[c * x for x in row] for row in rhs]
            out["Lambda G = eta kappa B (TG) B^T"] = la.rel_diff(
                la.window(lamG, K), la.window(rhs, K))
        lam_powers = [G]
        for _ in range(max(len(w.theta_coeffs), len(w.sigma_coeffs))):
            lam_powers.append(_lam(lam_powers[-1]))

        def poly_of_lambda(coeffs):
            acc = la.zeros(L)
            for d, cf in enumerate(coeffs):
                if cf:
                    acc = la.add(acc, lam_powers[d], to_mpf(cf))
            return acc

        lhs = poly_of_lambda(w.theta_coeffs)
        rhs = la.matmul(la.matmul(B, poly_of_lambda(w.sigma_coeffs)), la.transpose(B))
        out["theta(Lambda) G = B sigma(Lambda) G B^T"] = la.rel_diff(
            la.window(lhs, K), la.window(rhs, K))
    return out


def verify_moment_symmetries(w: PearsonWeight, K: int, prec: int,
                             tol_bits: int | None = None,
                             rho_override: Sequence | None = None
                             ) -> list[VerificationReport]:
    """Check the contiguous and Pearson symmetries of the moment matrix.

    Operands are built at size ``K + N + M + 2`` so that the K x K window is
    exact.  A b-shift whose target leaves the domain (``b_j <= 1``) is
    checked in the equivalent form on ``TJ_j^-1 w``.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    tol_bits = prec // 2 if tol_bits is None else tol_bits
    start = time.perf_counter()
    L = K + w.band
    count = 2 * L - 1
    wp = prec + SERIES_GUARD
    base = w
    shifts = [ShiftSpec.it(i) for i in range(1, w.M + 1)]
    shifts += [ShiftSpec.tj(j) for j in range(1, w.N + 1)]
    shifts.append(ShiftSpec.total())
    reports = []
    rho = list(rho_override) if rho_override is not None else moments(w, count, wp)
    shifted = {}
    extra = []
    for s in shifts:
        try:
            shifted[s] = moments(shift_params(w, s), count, wp)
        except DomainError:
            # equivalent statement one step up: base T_j^-1 w, target w
            up = shift_params(w, s.inverted())
            extra.append((up, {s: rho}))
    residuals = moment_identity_residuals(w, K, rho, shifted, wp)
    for up, sh in extra:
        r = moment_identity_residuals(up, K, moments(up, count, wp), sh, wp)
        residuals.update({k + " [on TJ^-1 w]": v for k, v in r.items() if "TJ" in k})
    elapsed = time.perf_counter() - start
    for name, res in residuals.items():
        reports.append(make_report(name, w.params, K, prec, res, tol_bits,
                                   seconds=elapsed))
    return reports
