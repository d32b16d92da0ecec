"""Monic orthogonal polynomials from the Cholesky factorization of the Hankel window."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from mpmath import mp, mpf

from . import _linalg as la
from .errors import NumericBreakdown, PoleError
from .moments import DEFAULT_K_MAX, HankelTruncation, lattice_sums, moment_matrix
from .precision import rounded
from .weights import PearsonWeight


@dataclass(frozen=True)
class CholeskyPair:
    """``S G S^T = diag(H)`` with S lower unitriangular.

    Row n of ``S`` holds the ascending coefficients of the monic P_n
    (``S[n][n] == 1``).
    """

    S: tuple
    H: tuple
    prec: int

    @property
    def K(self) -> int:
        return len(self.H)

    def coeffs(self, n: int) -> list[mpf]:
        return list(self.S[n][: n + 1])

    def window(self, k: int) -> "CholeskyPair":
        return CholeskyPair(tuple(tuple(r[:k]) for r in self.S[:k]), self.H[:k], self.prec)

    def dense_S(self) -> list[list[mpf]]:
        return [list(r) for r in self.S]


@dataclass(frozen=True)
class JacobiCoeffs:
    """Recurrence coefficients ``z P_n = P_{n+1} + beta_n P_n + gamma_n P_{n-1}``.

    ``beta[n]`` for ``0 <= n < len(beta)``; ``gamma[n]`` with the convention
    ``gamma[0] == 0``, so ``gamma`` has the same length as ``beta``.
    """

    beta: tuple
    gamma: tuple
    prec: int

    @property
    def size(self) -> int:
        return len(self.beta)

    def matrix(self, size: int | None = None) -> list[list[mpf]]:
        """Dense tridiagonal Jacobi matrix (unit superdiagonal)."""
        size = self.size if size is None else size
        if size > self.size:
            raise ValueError(f"only {self.size} recurrence coefficients available")
        J = la.zeros(size)
        for n in range(size):
            J[n][n] = self.beta[n]
            if n + 1 < size:
                J[n][n + 1] = mp.one
                J[n + 1][n] = self.gamma[n + 1]
        return J


@dataclass(frozen=True)
class SecondKindValue:
    """``Q_n(z) = sum_k P_n(k) w(k) / (z - k)`` at ``prec`` bits."""

    n: int
    z: mpf
    value: mpf
    prec: int


def cholesky_hankel(G: HankelTruncation, prec: int | None = None) -> CholeskyPair:
    """Square-root-free elimination of the Hankel window."""
    prec = G.prec if prec is None else prec
    with mp.workprec(prec):
        A = G.to_dense()
        L, d = la.ldl(A, pivot_floor=mpf(2) ** (-prec) * abs(A[0][0]))
        S = la.inv_unit_lower(L)
        for i in range(len(S)):
            S[i][i] = mp.one
            for j in range(i + 1, len(S)):
                S[i][j] = mp.zero
    return CholeskyPair(tuple(tuple(r) for r in S), tuple(d), prec)


def jacobi_from_conjugation(cp: CholeskyPair) -> list[list[mpf]]:
    """``S Lambda S^-1`` on the truncation; its last row is not trusted."""
    with mp.workprec(cp.prec):
        K = cp.K
        S = cp.dense_S()
        SL = [[S[i][j - 1] if j >= 1 else mp.zero for j in range(K)] for i in range(K)]
        return la.matmul(SL, la.inv_unit_lower(S))


def recurrence_coeffs(cp: CholeskyPair, check: bool = True) -> JacobiCoeffs:
    """beta_0..beta_{K-2} and gamma_1..gamma_{K-2} from the Cholesky pair.

    ``beta_n = S[n][n-1] - S[n+1][n]`` and ``gamma_n = H_n / H_{n-1}``.  With
    ``check`` the band of ``S Lambda S^-1`` is compared against them and a
    disagreement beyond ``2**-(prec/2)`` raises NumericBreakdown.
    """
    K = cp.K
    if K < 2:
        raise ValueError("need K >= 2 for recurrence coefficients")
    with mp.workprec(cp.prec):
        S, H = cp.S, cp.H
        beta = [(S[n][n - 1] if n else mp.zero) - S[n + 1][n] for n in range(K - 1)]
        gamma = [mp.zero] + [H[n] / H[n - 1] for n in range(1, K - 1)]
        if check:
            J = jacobi_from_conjugation(cp)
            tol = mpf(2) ** (-(cp.prec // 2))
            for n in range(K - 1):
                scale = max(abs(beta[n]), mp.one)
                if abs(J[n][n] - beta[n]) > tol * scale:
                    raise NumericBreakdown(f"beta_{n} extraction paths disagree")
                if n and abs(J[n][n - 1] - gamma[n]) > tol * max(abs(gamma[n]), mp.one):
                    raise NumericBreakdown(f"gamma_{n} extraction paths disagree")
    return JacobiCoeffs(tuple(beta), tuple(gamma), cp.prec)


def eval_poly_all(jc: JacobiCoeffs, z, nmax: int) -> list[mpf]:
    """``[P_0(z), ..., P_nmax(z)]`` by the three-term recurrence."""
    if nmax > jc.size:
        raise ValueError(f"degree {nmax} exceeds the {jc.size} available coefficients")
    z = mpf(z)
    out = [mp.one]
    prev = mp.zero
    for n in range(nmax):
        nxt = (z - jc.beta[n]) * out[n] - jc.gamma[n] * prev
        prev = out[n]
        out.append(nxt)
    return out


def eval_poly(data: CholeskyPair | JacobiCoeffs, n: int, z, method: str = "recurrence"):
    """``P_n(z)``: three-term recurrence (default) or Horner on row n of S."""
    with mp.workprec(data.prec):
        if method == "horner":
            if not isinstance(data, CholeskyPair):
                raise TypeError("Horner evaluation needs the Cholesky pair")
            if n >= data.K:
                raise ValueError(f"degree {n} outside the K = {data.K} window")
            return la.horner(data.S[n][: n + 1], mpf(z))
        if isinstance(data, CholeskyPair):
            if n >= data.K:
                raise ValueError(f"degree {n} outside the K = {data.K} window")
            data = recurrence_coeffs(data, check=False)
        return eval_poly_all(data, z, n)[n]


def _check_pole(z, prec):
    nearest = mp.nint(z)
    if nearest >= 0 and abs(z - nearest) < mpf(2) ** (-(prec // 2)):
        raise PoleError(f"z = {mp.nstr(z, 10)} lies on the lattice point {int(nearest)}")


def second_kind_vector(w: PearsonWeight, jc: JacobiCoeffs, z, nmax: int, prec: int,
                       k_max: int = DEFAULT_K_MAX) -> list[mpf]:
    """``[Q_0(z), ..., Q_nmax(z)]`` from one lattice sweep at the ambient precision."""
    z = mpf(z)
    _check_pole(z, prec)

    def terms(k, wk):
        scale = wk / (z - k)
        return [p * scale for p in eval_poly_all(jc, k, nmax)]

    return lattice_sums(w, terms, nmax + 1, prec, k_max)


def second_kind(w: PearsonWeight, cp: CholeskyPair, n: int, z, prec: int,
                k_max: int = DEFAULT_K_MAX) -> SecondKindValue:
    """Second kind function ``Q_n(z)`` for ``z`` off the lattice."""
    if n >= cp.K:
        raise ValueError(f"degree {n} outside the K = {cp.K} window")
    with mp.workprec(max(cp.prec, prec)):
        z = mpf(z)
        _check_pole(z, prec)
        jc = recurrence_coeffs(cp, check=False)
        eval_row = lambda k: eval_poly_all(jc, k, n)[n]  # noqa: E731
        value = lattice_sums(w, lambda k, wk: [eval_row(k) * wk / (z - k)], 1,
                             max(cp.prec, prec), k_max)[0]
    return SecondKindValue(n, rounded(z, prec), rounded(value, prec), prec)


def tridiag_ldl_cf(r: Sequence, s: Sequence) -> tuple[list, list]:
    """Continued-fraction LDL^T of the symmetric tridiagonal ``(r, s)``.

    ``delta_0 = r_0``, ``l_{n+1} = s_n / delta_n``,
    ``delta_{n+1} = r_{n+1} - s_n**2 / delta_n``.  Returns ``(l, delta)`` with
    ``l[0] = 0`` as a placeholder so that ``l[n]`` sits in row n.
    """
    if len(s) != len(r) - 1:
        raise ValueError("need len(s) == len(r) - 1")
    delta = [mpf(r[0])]
    l = [mp.zero]
    for n in range(len(s)):
        if not delta[n]:
            raise NumericBreakdown(f"zero pivot delta_{n}")
        l.append(s[n] / delta[n])
        delta.append(r[n + 1] - s[n] ** 2 / delta[n])
    if not delta[-1]:
        raise NumericBreakdown(f"zero pivot delta_{len(delta) - 1}")
    return l, delta


# -- family: everything attached to one weight at one target precision -----

@dataclass
class OrthoFamily:
    """Moments, Cholesky pair and recurrence of a weight at size ``K``.

    Built by :func:`build_family`, which chooses a working precision ``wp``
    above the target ``prec`` so that the Hankel elimination loses no more
    than the guard bits.  All derived quantities are evaluated at ``wp``.
    """

    weight: PearsonWeight
    K: int
    prec: int
    wp: int
    hankel: HankelTruncation
    cp: CholeskyPair
    jc: JacobiCoeffs
    _q_cache: dict = field(default_factory=dict, repr=False)

    @property
    def H(self):
        return self.cp.H

    def P(self, z, nmax: int | None = None) -> list[mpf]:
        nmax = self.jc.size if nmax is None else nmax
        with mp.workprec(self.wp):
            return eval_poly_all(self.jc, z, nmax)

    def Q(self, z, nmax: int | None = None) -> list[mpf]:
        nmax = self.jc.size - 1 if nmax is None else nmax
        with mp.workprec(self.wp):
            key = (mpf(z), nmax)
            if key not in self._q_cache:
                self._q_cache[key] = second_kind_vector(self.weight, self.jc, z, nmax,
                                                        self.wp)
            return self._q_cache[key]

    def coeffs(self, n: int) -> list[mpf]:
        return self.cp.coeffs(n)


def conditioning_loss(G: HankelTruncation, cp: CholeskyPair) -> float:
    """Bits lost in the elimination, estimated by ``max_n rho_2n |S_n|^2 / H_n``."""
    with mp.workprec(64):
        worst = mp.one
        for n in range(cp.K):
            row = mp.fsum(mpf(x) ** 2 for x in cp.S[n])
            worst = max(worst, mpf(G.rho[2 * n]) * row / abs(mpf(cp.H[n])))
        return float(mp.log(worst, 2))


def build_family(w: PearsonWeight, K: int, prec: int, guard: int = 64,
                 k_max: int = DEFAULT_K_MAX) -> OrthoFamily:
    """Cholesky data of ``w`` at size ``K`` accurate to about ``prec`` bits."""
    wp = prec + guard + 4 * K
    for _ in range(6):
        G = moment_matrix(w, K, wp, k_max)
        cp = cholesky_hankel(G, wp)
        loss = conditioning_loss(G, cp)
        if wp - loss >= prec + guard:
            break
        wp = prec + guard + int(math.ceil(loss)) + 16
    else:
        raise NumericBreakdown("could not reach the requested precision")
    jc = recurrence_coeffs(cp)
    return OrthoFamily(w, K, prec, wp, G, cp, jc)
