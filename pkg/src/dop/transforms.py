"""Christoffel, Geronimus and Geronimus-Uvarov transformations of the family.

Forward contiguous shifts multiply the weight by a linear factor
(Christoffel); inverse shifts divide by one, without added mass except for
the total shift, whose lattice translation carries the point mass
``delta(z + 1)`` (Geronimus).  Shifts of the variable ``z -> z +- 1`` are
Geronimus-Uvarov perturbations and give the quasi-determinant formulas.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from mpmath import mp, mpf

from . import _linalg as la
from .errors import (HypothesisViolated, NumericBreakdown, PointOnDivisor, SingularBlock,
                     ZeroDenominator)
from .orthopoly import (CholeskyPair, JacobiCoeffs, OrthoFamily, build_family,
                        eval_poly_all, recurrence_coeffs, second_kind_vector, tridiag_ldl_cf)
from .precision import default_prec, to_mpf
from .report import VerificationReport, make_report
from .structure import BandedMatrix, banded_poly, dressed_pascal, jacobi_banded, pascal_matrix
from .weights import (PearsonWeight, ShiftSpec, christoffel_constant, christoffel_root,
                      eval_theta_sigma, geronimus_constant, geronimus_point, shift_params)


@lru_cache(maxsize=64)
def family(w: PearsonWeight, K: int, prec: int) -> OrthoFamily:
    """Memoized :func:`build_family`."""
    return build_family(w, K, prec)


def _family_of(w: PearsonWeight, cp: CholeskyPair) -> OrthoFamily:
    """Wrap an existing Cholesky pair so Q evaluations can be cached."""
    jc = recurrence_coeffs(cp, check=False)
    return OrthoFamily(w, cp.K, cp.prec, cp.prec, None, cp, jc)


def _as_family(w, cp_or_fam) -> OrthoFamily:
    return cp_or_fam if isinstance(cp_or_fam, OrthoFamily) else _family_of(w, cp_or_fam)


def _shifted_family(w: PearsonWeight, cp: CholeskyPair, s: ShiftSpec) -> OrthoFamily:
    return family(shift_params(w, s), cp.K, cp.prec)


# -- connection matrices ----------------------------------------------------

@dataclass(frozen=True)
class ConnectionPair:
    """Upper bidiagonal ``omega`` and unit lower bidiagonal ``Omega`` of a shift.

    For a forward shift with constant c (``a_i``, ``b_j - 1`` or
    ``eta kappa``): ``omega`` has diagonal ``c TH_n / H_n`` and unit
    superdiagonal, ``Omega`` has subdiagonal ``H_{n+1} / (c TH_n)``, and
    ``omega H = c (TH) Omega^T``.  For an inverse shift the same layout holds
    for ``T^-1 omega`` and ``T^-1 Omega`` with the Geronimus constant.
    """

    omega: BandedMatrix
    Omega: BandedMatrix
    shift: ShiftSpec
    constant: mpf


def _bidiagonals(diag, sub):
    K = len(diag)
    omega = BandedMatrix(K, 0, 1, {0: list(diag), 1: [mp.one] * (K - 1)})
    Omega = BandedMatrix(K, 1, 0, {0: [mp.one] * K, -1: list(sub)})
    return omega, Omega


def connection_matrices(w: PearsonWeight, cp: CholeskyPair, s: ShiftSpec,
                        prec: int | None = None,
                        shifted: CholeskyPair | None = None) -> ConnectionPair:
    """Connection pair of a forward shift from the norms of both weights."""
    if s.inverse:
        raise ValueError("connection_matrices takes forward shifts; see geronimus_connection")
    if shifted is None:
        shifted = _shifted_family(w, cp, s).cp
    with mp.workprec(cp.prec if prec is None else max(prec, cp.prec)):
        c = to_mpf(christoffel_constant(w.params, s))
        H, TH = cp.H, shifted.H
        K = min(cp.K, shifted.K)
        if any(not h for h in H[:K]) or any(not h for h in TH[:K]):
            raise ZeroDenominator("a norm vanished")
        diag = [c * TH[n] / H[n] for n in range(K)]
        sub = [H[n + 1] / (c * TH[n]) for n in range(K - 1)]
    omega, Omega = _bidiagonals(diag, sub)
    return ConnectionPair(omega, Omega, s, c)


def geronimus_norms(w: PearsonWeight, fam: OrthoFamily, s: ShiftSpec, nmax: int) -> list:
    """Norms ``T^-1 H_0 .. T^-1 H_nmax`` of the Geronimus transformed weight.

    ``T^-1 H_0 = -c Q_0(p)`` (``1 - upsilon Q_0(-1)`` for the total shift)
    and ``T^-1 H_{n+1} = c H_n (T^-1 Omega)_{n+1,n}``.
    """
    ratios, v = geronimus_ratios(w, fam, s, nmax)
    with mp.workprec(fam.wp):
        c = to_mpf(geronimus_constant(w.params, s))
        out = [-c * v[0] if s.kind != "total" else -v[0]]
        for n in range(nmax):
            out.append(-c * fam.H[n] * ratios[n + 1])
    return out


def geronimus_ratios(w: PearsonWeight, fam: OrthoFamily, s: ShiftSpec, nmax: int):
    """Ratios ``r_n`` of ``T^-1 P_n = P_n - r_n P_{n-1}`` for ``1 <= n <= nmax``.

    ``r_n = Q_n(p) / Q_{n-1}(p)`` at the Geronimus point p; for the total
    shift ``r_n = v_n / v_{n-1}`` with ``v = upsilon Q(-1) - P(-1)``.
    Returns ``(r, v)`` with ``r[0] = 0`` and v the denominators' sequence.
    """
    if not s.inverse:
        raise ValueError("Geronimus data needs an inverse shift")
    with mp.workprec(fam.wp):
        p = to_mpf(geronimus_point(w.params, s))
        Q = fam.Q(p, nmax)
        if s.kind == "total":
            ups = to_mpf(w.params.upsilon)
            P = fam.P(p, nmax)
            v = [ups * q - pp for q, pp in zip(Q, P)]
        else:
            v = list(Q)
        tol = mpf(2) ** (-(fam.prec // 2))
        r = [mp.zero]
        for n in range(1, nmax + 1):
            if abs(v[n - 1]) <= tol * max(abs(x) for x in v[: n + 1]):
                raise HypothesisViolated(f"Geronimus denominator vanishes at n = {n - 1}")
            r.append(v[n] / v[n - 1])
    return r, v


def geronimus_connection(w: PearsonWeight, cp_or_fam, s: ShiftSpec,
                         nmax: int | None = None) -> ConnectionPair:
    """``(T^-1 omega, T^-1 Omega)`` from second kind functions of w alone."""
    fam = _as_family(w, cp_or_fam)
    nmax = fam.K - 2 if nmax is None else nmax
    ratios, _ = geronimus_ratios(w, fam, s, nmax)
    norms = geronimus_norms(w, fam, s, nmax)
    with mp.workprec(fam.wp):
        c = to_mpf(geronimus_constant(w.params, s))
        diag = [c * fam.H[n] / norms[n] for n in range(nmax + 1)]
        sub = [-ratios[n + 1] for n in range(nmax)]
    omega, Omega = _bidiagonals(diag, sub)
    return ConnectionPair(omega, Omega, s, c)


# -- Christoffel formulas ---------------------------------------------------

def _kernel_rows(rows, root, n, tol):
    """``(P_{n+1} - P_{n+1}(r)/P_n(r) P_n) / (z - r)`` on coefficient lists."""
    pn = la.horner(rows[n], root)
    pn1 = la.horner(rows[n + 1], root)
    scale = max(abs(x) for x in rows[n]) * max(abs(root), mp.one) ** n
    if abs(pn) <= tol * scale:
        raise HypothesisViolated(f"P_{n} vanishes at the Christoffel root")
    ratio = pn1 / pn
    num = list(rows[n + 1])
    for k, cf in enumerate(rows[n]):
        num[k] -= ratio * cf
    # synthetic division by (z - root)
    quot = [mp.zero] * (n + 1)
    acc = num[n + 1]
    for k in range(n, -1, -1):
        quot[k] = acc
        acc = num[k] + root * acc
    return quot


def _shift_argument(coeffs, step):
    """Coefficients of ``f(z + step)`` for ``step`` in {+1, -1}."""
    B = pascal_matrix(len(coeffs), inverse=step < 0).to_dense()
    return [mp.fsum(B[k][j] * coeffs[k] for k in range(j, len(coeffs)))
            for j in range(len(coeffs))]


def christoffel_rows(rows: Sequence[Sequence], params, s: ShiftSpec, nmax: int,
                     tol=None) -> list[list]:
    """Coefficients of ``T P_0 .. T P_nmax`` from those of ``P_0 .. P_{nmax+1}``.

    For the total shift the kernel has its root at 0 and produces
    ``T P_n(z - 1)``, which is then translated back.
    """
    root = to_mpf(christoffel_root(params, s))
    tol = mpf(2) ** (-(mp.prec // 2)) if tol is None else tol
    out = []
    for n in range(nmax + 1):
        q = _kernel_rows(rows, root, n, tol)
        out.append(_shift_argument(q, +1) if s.kind == "total" else q)
    return out


def christoffel_coeffs(w: PearsonWeight, cp: CholeskyPair, s: ShiftSpec, nmax: int):
    """Christoffel-formula coefficients of the forward-shifted family."""
    if s.inverse:
        raise ValueError("christoffel formulas take forward shifts")
    if nmax + 1 >= cp.K:
        raise ValueError(f"need nmax + 1 < K = {cp.K}")
    with mp.workprec(cp.prec):
        return christoffel_rows([cp.coeffs(n) for n in range(nmax + 2)], w.params, s, nmax)


def christoffel_poly(w: PearsonWeight, cp: CholeskyPair, s: ShiftSpec, n: int, z):
    """Pointwise ``(T P_n)(z)`` by the Christoffel kernel formula.

    IT_i:  ``(P_{n+1}(z) - P_{n+1}(-a_i)/P_n(-a_i) P_n(z)) / (z + a_i)``;
    TJ_j:  same with the root ``1 - b_j``;
    total: the translated value ``T P_n(z - 1) = (P_{n+1}(z) - P_{n+1}(0)/P_n(0) P_n(z)) / z``.
    """
    if s.inverse:
        raise ValueError("christoffel formulas take forward shifts")
    if n + 1 >= cp.K:
        raise ValueError(f"need n + 1 < K = {cp.K}")
    jc = recurrence_coeffs(cp, check=False)
    with mp.workprec(cp.prec):
        tol = mpf(2) ** (-(cp.prec // 2))
        root = to_mpf(christoffel_root(w.params, s))
        x = mpf(z)
        if abs(x - root) < tol:
            raise PointOnDivisor("evaluation point is the zero of the Christoffel factor")
        Pr = eval_poly_all(jc, root, n + 1)
        if abs(Pr[n]) <= tol * mp.fsum(abs(v) for v in Pr):
            raise HypothesisViolated(f"P_{n} vanishes at the Christoffel root")
        Px = eval_poly_all(jc, x, n + 1)
        return (Px[n + 1] - Pr[n + 1] / Pr[n] * Px[n]) / (x - root)


# -- Geronimus formulas -----------------------------------------------------

def geronimus_rows(rows: Sequence[Sequence], ratios: Sequence, s: ShiftSpec,
                   nmax: int) -> list[list]:
    """Coefficients of ``T^-1 P_0 .. T^-1 P_nmax``.

    ``P_n - r_n P_{n-1}``; for the total shift the combination is taken at
    ``z - 1``.
    """
    out = [[mp.one]]
    for n in range(1, nmax + 1):
        c = list(rows[n][: n + 1])
        for k, cf in enumerate(rows[n - 1][:n]):
            c[k] -= ratios[n] * cf
        out.append(_shift_argument(c, -1) if s.kind == "total" else c)
    return out


def geronimus_coeffs(w: PearsonWeight, cp_or_fam, s: ShiftSpec, nmax: int):
    fam = _as_family(w, cp_or_fam)
    ratios, _ = geronimus_ratios(w, fam, s, nmax)
    with mp.workprec(fam.wp):
        return geronimus_rows([fam.coeffs(n) for n in range(nmax + 1)], ratios, s, nmax)


def geronimus_poly(w: PearsonWeight, cp: CholeskyPair, s: ShiftSpec, n: int, z,
                   prec: int | None = None):
    """Pointwise ``(T^-1 P_n)(z)`` by the Christoffel-Geronimus formulas.

    IT_i^-1: ``P_n(z) - Q_n(1-a_i)/Q_{n-1}(1-a_i) P_{n-1}(z)``;
    TJ_j^-1: same at ``-b_j``;
    total:   ``P_n(z-1) - v_n/v_{n-1} P_{n-1}(z-1)``,
    ``v = upsilon Q(-1) - P(-1)``.  ``n = 0`` gives 1.
    """
    if not s.inverse:
        raise ValueError("geronimus formulas take inverse shifts")
    if n == 0:
        return mpf(1)
    fam = _as_family(w, cp)
    ratios, _ = geronimus_ratios(w, fam, s, n)
    with mp.workprec(fam.wp):
        x = mpf(z) - 1 if s.kind == "total" else mpf(z)
        P = fam.P(x, n)
        value = P[n] - ratios[n] * P[n - 1]
    if prec is None:
        return value
    with mp.workprec(prec):
        return +value


# -- Jacobi LU / UL ---------------------------------------------------------

def factorization_shift(params, s: ShiftSpec, mode: str) -> Fraction:
    """Diagonal shift d in ``L U = X + d I`` / ``U L = X + d I``.

    Forward s: ``LU = J + c I`` with c = a_i, b_j - 1, 0 and
    ``UL = TJ + c' I`` with c' = a_i, b_j - 1, 1.
    Inverse s: ``UL = J + d I`` with d = a_i - 1, b_j, 1 and
    ``LU = T^-1 J + d' I`` with d' = a_i - 1, b_j, 0.
    """
    if s.kind == "a":
        v = params.a[s.index - 1]
        return v - 1 if s.inverse else v
    if s.kind == "b":
        v = params.b[s.index - 1]
        return v if s.inverse else v - 1
    if s.inverse:
        return Fraction(1 if mode == "UL" else 0)
    return Fraction(0 if mode == "LU" else 1)


def jacobi_factorize(w: PearsonWeight, cp: CholeskyPair, s: ShiftSpec, mode: str = "LU",
                     shifted: CholeskyPair | None = None):
    """Bidiagonal factors ``(L, U)`` as dense matrices.

    Forward shift: ``L = Omega``, ``U = omega = c (TH) Omega^T H^-1``, with
    ``L U = J + c I`` (LU mode) and ``U L = TJ + c' I`` (UL mode).  Inverse
    shift: ``L = T^-1 Omega`` and ``U = T^-1 omega``, with ``U L = J + d I``
    and ``L U = T^-1 J + d' I``.  The factors do not depend on the mode; it
    only fixes which product is meaningful (see :func:`factorization_target`).
    """
    if mode not in ("LU", "UL"):
        raise ValueError("mode is 'LU' or 'UL'")
    if cp.K < 4:
        raise ValueError("need a window K >= 4")
    if s.inverse:
        pair = geronimus_connection(w, cp, s)
    else:
        pair = connection_matrices(w, cp, s, shifted=shifted)
    return pair.Omega.to_dense(), pair.omega.to_dense()


def factorization_target(w: PearsonWeight, cp: CholeskyPair, s: ShiftSpec, mode: str,
                         size: int, shifted_jc: JacobiCoeffs | None = None):
    """The matrix the product of :func:`jacobi_factorize` must reproduce."""
    original = (mode == "LU") != s.inverse
    if original:
        jc = recurrence_coeffs(cp, check=False)
    else:
        jc = shifted_jc if shifted_jc is not None else _shifted_family(w, cp, s).jc
    with mp.workprec(cp.prec):
        J = jc.matrix(size)
        d = to_mpf(factorization_shift(w.params, s, mode))
        for i in range(size):
            J[i][i] += d
    return J


def factorization_residual(w, cp, s, mode, size, shifted_jc=None) -> mpf:
    L, U = jacobi_factorize(w, cp, s, mode)
    with mp.workprec(cp.prec):
        L, U = la.window(L, size + 1), la.window(U, size + 1)
        prod = la.matmul(L, U) if mode == "LU" else la.matmul(U, L)
        target = factorization_target(w, cp, s, mode, size, shifted_jc)
        return la.rel_diff(la.window(prod, size), target)


def shifted_norms_cf(w: PearsonWeight, cp: CholeskyPair, s: ShiftSpec,
                     nmax: int | None = None) -> list:
    """Norms of the forward-shifted weight without its moments.

    ``(J + d I) H`` is symmetric tridiagonal; its continued-fraction
    ``LDL^T`` has ``L = Omega`` and pivots ``c TH_n``.
    """
    if s.inverse:
        raise ValueError("continued-fraction norms take forward shifts")
    jc = recurrence_coeffs(cp, check=False)
    nmax = jc.size - 1 if nmax is None else nmax
    with mp.workprec(cp.prec):
        d = to_mpf(factorization_shift(w.params, s, "LU"))
        c = to_mpf(christoffel_constant(w.params, s))
        H = cp.H
        r = [(jc.beta[n] + d) * H[n] for n in range(nmax + 1)]
        _, delta = tridiag_ldl_cf(r, H[1:nmax + 1])
        return [x / c for x in delta]


def connection_residuals(w: PearsonWeight, fam: OrthoFamily, shifted: OrthoFamily,
                         s: ShiftSpec, z, nmax: int) -> tuple[mpf, mpf]:
    """Residuals of ``Omega TP = P`` and ``omega P = (z - r) TP``.

    For the total shift the Christoffel side is translated:
    ``Omega TP(z-1) = P(z)`` and ``omega P(z) = z TP(z-1)``.  For inverse
    shifts the same relations hold with w playing the Christoffel side and
    ``T^-1 w`` the other.
    """
    with mp.workprec(fam.wp):
        z = mpf(z)
        if s.inverse:
            pair = geronimus_connection(w, fam, s, nmax + 1)
            point = to_mpf(geronimus_point(w.params, s))
            big, small = shifted, fam
        else:
            pair = connection_matrices(w, fam.cp, s, shifted=shifted.cp)
            point = to_mpf(christoffel_root(w.params, s))
            big, small = fam, shifted
        if s.kind == "total":
            zs, zb, factor = z - 1, z, z
        else:
            zs = zb = z
            factor = z - point
        Pb = big.P(zb, nmax + 1)
        Ps = small.P(zs, nmax + 1)
        r1 = r2 = mp.zero
        for n in range(nmax + 1):
            lo = pair.Omega[n, n - 1] * Ps[n - 1] if n else mp.zero
            r1 = max(r1, abs(Ps[n] + lo - Pb[n]) / max(abs(Pb[n]), abs(Ps[n]) + abs(lo)))
            lhs = pair.omega[n, n] * Pb[n] + Pb[n + 1]
            rhs = factor * Ps[n]
            r2 = max(r2, abs(lhs - rhs) / max(abs(pair.omega[n, n] * Pb[n]) + abs(Pb[n + 1]),
                                                 abs(rhs)))
    return r1, r2


def geronimus_second_kind_residual(w: PearsonWeight, fam: OrthoFamily, shifted: OrthoFamily,
                                   s: ShiftSpec, z, nmax: int) -> mpf:
    """Residual of the second kind relations of an inverse shift.

    IT_i^-1, TJ_j^-1: ``c (T^-1 Omega) Q(z) = (z - p) T^-1 Q(z) - e_0 T^-1 H_0``;
    total: ``(T^-1 Omega)(upsilon Q(z-1) - P(z-1)) = z T^-1 Q(z) - T^-1 P(z) - e_0 T^-1 H_0``.
    """
    pair = geronimus_connection(w, fam, s, nmax)
    with mp.workprec(fam.wp):
        z = mpf(z)
        c = to_mpf(geronimus_constant(w.params, s))
        p = to_mpf(geronimus_point(w.params, s))
        Qt, H0 = shifted.Q(z, nmax), shifted.H[0]
        if s.kind == "total":
            ups = to_mpf(w.params.upsilon)
            x = [ups * q - pp for q, pp in zip(fam.Q(z - 1, nmax), fam.P(z - 1, nmax))]
            Pt = shifted.P(z, nmax)
            rhs = [z * q - pp for q, pp in zip(Qt, Pt)]
            mult = mp.one
        else:
            x = fam.Q(z, nmax)
            rhs = [(z - p) * q for q in Qt]
            mult = c
        rhs[0] -= H0
        worst = mp.zero
        for n in range(nmax + 1):
            lhs = mult * (x[n] + (pair.Omega[n, n - 1] * x[n - 1] if n else 0))
            scale = max(abs(mult * x[n]) + (abs(mult * pair.Omega[n, n - 1] * x[n - 1]) if n else 0),
                        abs(rhs[n]))
            worst = max(worst, abs(lhs - rhs[n]) / scale)
    return worst


# -- quasi-determinants -----------------------------------------------------

@dataclass(frozen=True)
class QuasiDetInput:
    """Blocks of ``[[A, B], [C, D]]`` with B a column, C a row, D a scalar."""

    A: tuple
    B: tuple
    C: tuple
    D: object

    @classmethod
    def from_array(cls, rows) -> "QuasiDetInput":
        """Split a square array into its last quasi-determinant blocks."""
        k = len(rows) - 1
        return cls(tuple(tuple(r[:k]) for r in rows[:k]), tuple(r[k] for r in rows[:k]),
                   tuple(rows[k][:k]), rows[k][k])


def quasidet_theta_star(q: QuasiDetInput, prec: int | None = None) -> mpf:
    """Last quasi-determinant ``D - C A^-1 B`` (A solved, never inverted).

    Partial-pivot elimination with pivot floor ``2**-(prec/2) max|A|``;
    raises SingularBlock below it.
    """
    prec = default_prec() if prec is None else prec
    with mp.workprec(prec):
        if not q.A:
            return mpf(q.D)
        A = [[mpf(x) for x in row] for row in q.A]
        x = la.solve(A, [mpf(v) for v in q.B], pivot_rel=mpf(2) ** (-(prec // 2)))
        return mpf(q.D) - mp.fsum(mpf(c) * v for c, v in zip(q.C, x))


def _check_simple_roots(w: PearsonWeight):
    if len(set(w.params.a)) != w.M or len(set(w.params.b)) != w.N:
        raise HypothesisViolated("zeros of theta and sigma must be simple")
    if any(b == 1 for b in w.params.b):
        raise HypothesisViolated("b_j = 1 merges a zero of theta with z = 0")


def determinantal_array(w: PearsonWeight, cp_or_fam, n: int, z, direction: int):
    """The (N+M+2)-square array whose last quasi-determinant is the shifted P_n.

    Backward (``direction = -1``), rows ``n-M .. n+N+1``, columns
    ``P(0), P(1-b_k), Q(1-a_k), P(z)``.  Forward (``+1``), rows
    ``n-N-1 .. n+M``, columns ``P(-a_k), upsilon Q(-1) - P(-1), Q(-b_k), P(z)``.
    """
    fam = _as_family(w, cp_or_fam)
    _check_simple_roots(w)
    p = w.params
    if direction == -1:
        lo, hi = n - w.M, n + w.N + 1
    elif direction == 1:
        lo, hi = n - w.N - 1, n + w.M
        if any(a == 1 for a in p.a):
            raise HypothesisViolated("a_i = 1 makes upsilon vanish")
    else:
        raise ValueError("direction is -1 or +1")
    if lo < 0:
        raise HypothesisViolated(f"n = {n} too small for the {'backward' if direction < 0 else 'forward'} formula")
    if hi > fam.jc.size:
        raise ValueError(f"degree {hi} exceeds the available window")
    with mp.workprec(fam.wp):
        cols = []
        if direction == -1:
            cols.append(fam.P(0, hi))
            cols += [fam.P(1 - to_mpf(b), hi) for b in p.b]
            cols += [fam.Q(1 - to_mpf(a), hi) for a in p.a]
        else:
            cols += [fam.P(-to_mpf(a), hi) for a in p.a]
            ups = to_mpf(p.upsilon)
            cols.append([ups * q - pp for q, pp in zip(fam.Q(-1, hi), fam.P(-1, hi))])
            cols += [fam.Q(-to_mpf(b), hi) for b in p.b]
        cols.append(fam.P(mpf(z), hi))
        return [[col[m] for col in cols] for m in range(lo, hi + 1)]


def shifted_poly_determinantal(w: PearsonWeight, cp_or_fam, n: int, z, direction: int,
                               prec: int | None = None) -> mpf:
    """``theta(z) P_n(z-1)`` (direction -1) or ``sigma(z)/eta P_n(z+1)`` (+1)
    as a last quasi-determinant of polynomial and second kind values."""
    fam = _as_family(w, cp_or_fam)
    rows = determinantal_array(w, fam, n, z, direction)
    try:
        value = quasidet_theta_star(QuasiDetInput.from_array(rows), fam.wp)
    except SingularBlock as exc:
        raise HypothesisViolated(f"singular leading block: {exc}") from None
    if prec is None:
        return value
    with mp.workprec(prec):
        return +value


# -- Geronimus-Uvarov: resolvents and second kind functions -----------------

def m_theta(w: PearsonWeight) -> list[list[Fraction]]:
    """``(theta(z) - theta(k))/(z - k) = chi(k)^T M_theta chi(z)``: entries theta_{i+j+1}."""
    th = w.theta_coeffs
    n = len(th) - 1
    return [[th[i + j + 1] if i + j + 1 <= n else Fraction(0) for j in range(n)]
            for i in range(n)]


def m_sigma(w: PearsonWeight) -> list[list[Fraction]]:
    """Same for sigma: ``M x M`` with entries sigma_{i+j+1}."""
    sg = w.sigma_coeffs
    n = len(sg) - 1
    return [[sg[i + j + 1] if i + j + 1 <= n else Fraction(0) for j in range(n)]
            for i in range(n)]


@dataclass(frozen=True)
class UvarovResolvents:
    """``omega_plus = Psi^T H^-1 = Pi sigma(J)`` and ``omega_minus = Psi H^-1 = Pi^-1 theta(J)``."""

    omega_plus: list
    omega_minus: list
    residual_plus: mpf
    residual_minus: mpf


def uvarov_resolvents(w: PearsonWeight, cp: CholeskyPair, Psi: BandedMatrix,
                      jc: JacobiCoeffs | None = None) -> UvarovResolvents:
    jc = recurrence_coeffs(cp, check=False) if jc is None else jc
    W = Psi.K
    with mp.workprec(cp.prec):
        Hinv = [1 / h for h in cp.H[:W]]
        P = Psi.to_dense()
        plus = la.scale_cols(la.transpose(P), Hinv)
        minus = la.scale_cols(P, Hinv)
        Pi, Pinv = dressed_pascal(cp)
        L = jc.size
        J = jacobi_banded(jc, L)
        pis = la.matmul(la.window(Pi.to_dense(), L), banded_poly(w.sigma_coeffs, J).to_dense())
        pit = la.matmul(la.window(Pinv.to_dense(), L), banded_poly(w.theta_coeffs, J).to_dense())
        rp = la.rel_diff(plus, la.window(pis, W))
        rm = la.rel_diff(minus, la.window(pit, W))
    return UvarovResolvents(plus, minus, rp, rm)


def theta_correction(w: PearsonWeight, cp: CholeskyPair, z) -> list:
    """``H^[N+1] (S^[N+1])^-T M_theta chi^[N+1](z)``: the nonzero head of
    ``theta(z) Q(z) - Psi^T H^-1 Q(z-1)``."""
    return _correction(cp, m_theta(w), z)


def sigma_correction(w: PearsonWeight, cp: CholeskyPair, z) -> list:
    """``H^[M] (S^[M])^-T M_sigma chi^[M](z)`` (empty when M = 0)."""
    return _correction(cp, m_sigma(w), z)


def _correction(cp, Mx, z):
    n = len(Mx)
    if n == 0:
        return []
    with mp.workprec(cp.prec):
        z = mpf(z)
        chi = [z ** j for j in range(n)]
        v = [mp.fsum(to_mpf(Mx[i][j]) * chi[j] for j in range(n)) for i in range(n)]
        S = [list(r[:n]) for r in cp.S[:n]]
        SinvT = la.transpose(la.inv_unit_lower(S))
        return [cp.H[i] * x for i, x in enumerate(la.matvec(SinvT, v))]


def uvarov_residuals(w: PearsonWeight, fam: OrthoFamily, Psi: BandedMatrix, z) -> dict:
    """Residuals of the second kind shift identities at one ``z``.

    ``theta(z) Q(z) - Psi^T H^-1 Q(z-1)`` against the theta correction
    (zero for ``n >= N+1``) and ``sigma(z) Q(z) - Psi H^-1 Q(z+1)`` against
    the sigma correction (zero for ``n >= M``).  Each residual is relative
    to the moduli of the terms involved.
    """
    W = Psi.K
    with mp.workprec(fam.wp):
        z = mpf(z)
        theta, sigma = eval_theta_sigma(w, z)
        Q0, Qm, Qp = fam.Q(z, W - 1), fam.Q(z - 1, W - 1), fam.Q(z + 1, W - 1)
        H = fam.H
        tc = theta_correction(w, fam.cp, z)
        sc = sigma_correction(w, fam.cp, z)
        out = {"band_theta": mp.zero, "band_sigma": mp.zero,
               "corr_theta": mp.zero, "corr_sigma": mp.zero}
        for n in range(W - w.M):
            terms = [Psi[m, n] * Qm[m] / H[m] for m in range(max(0, n - w.N - 1), n + w.M + 1)]
            corr = tc[n] if n < len(tc) else mp.zero
            diff = theta * Q0[n] - mp.fsum(terms) - corr
            scale = max(abs(theta * Q0[n]), mp.fsum(abs(t) for t in terms), abs(corr))
            key = "band_theta" if n >= w.N + 1 else "corr_theta"
            out[key] = max(out[key], abs(diff) / scale)
        for n in range(W - w.N - 1):
            terms = [Psi[n, m] * Qp[m] / H[m] for m in range(max(0, n - w.M), n + w.N + 2)]
            corr = sc[n] if n < len(sc) else mp.zero
            diff = sigma * Q0[n] - mp.fsum(terms) - corr
            scale = max(abs(sigma * Q0[n]), mp.fsum(abs(t) for t in terms), abs(corr))
            key = "band_sigma" if n >= w.M else "corr_sigma"
            out[key] = max(out[key], abs(diff) / scale)
    return out


def uvarov_second_kind_check(w: PearsonWeight, cp_or_fam, Psi: BandedMatrix,
                             z_samples: Sequence, prec: int | None = None,
                             tol_bits: int | None = None) -> list[VerificationReport]:
    """Banded second kind identities and their low-degree corrections."""
    fam = _as_family(w, cp_or_fam)
    prec = fam.prec if prec is None else prec
    tol_bits = prec // 2 if tol_bits is None else tol_bits
    start = time.perf_counter()
    agg: dict[str, mpf] = {}
    for z in z_samples:
        for k, v in uvarov_residuals(w, fam, Psi, z).items():
            agg[k] = max(agg.get(k, mp.zero), v)
    el = time.perf_counter() - start
    zs = ",".join(str(z) for z in z_samples)
    names = {
        "band_theta": "theta(z)Q_n(z) = sum Q_m(z-1) Psi_mn/H_m, n>=N+1",
        "band_sigma": "sigma(z)Q_n(z) = sum Psi_nm Q_m(z+1)/H_m, n>=M",
        "corr_theta": "theta Q - Psi^T H^-1 Q(z-1) = H S^-T M_theta chi",
        "corr_sigma": "sigma Q - Psi H^-1 Q(z+1) = H S^-T M_sigma chi",
    }
    reports = []
    for key, name in names.items():
        if key == "corr_sigma" and w.M == 0:
            continue
        reports.append(make_report(name, w.params, Psi.K, prec, agg[key], tol_bits,
                                   seconds=el, detail=f"z={zs}"))
    return reports
