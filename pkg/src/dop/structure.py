"""Pascal matrices, dressed Pascal matrices and the Laguerre-Freud structure matrix."""
from __future__ import annotations

import time
from dataclasses import dataclass
from math import comb
from typing import Sequence

from mpmath import mp, mpf

from . import _linalg as la
from .errors import NumericBreakdown, WindowTooSmall
from .orthopoly import CholeskyPair, JacobiCoeffs, eval_poly_all, recurrence_coeffs
from .precision import to_mpf
from .report import VerificationReport, make_report
from .weights import PearsonWeight, eval_theta_sigma


@dataclass
class BandedMatrix:
    """K x K matrix with ``lower`` sub- and ``upper`` superdiagonals.

    ``diags[d]`` holds diagonal ``d`` (``d > 0`` above the main one); its
    entry ``t`` sits at row ``t`` for ``d >= 0`` and at column ``t`` for
    ``d < 0``, so ``diags[d][t]`` is ``psi^(d)_t`` in the usual notation.
    """

    K: int
    lower: int
    upper: int
    diags: dict

    @classmethod
    def zeros(cls, K, lower, upper):
        return cls(K, lower, upper,
                   {d: [mp.zero] * (K - abs(d)) for d in range(-lower, upper + 1)
                    if abs(d) < K})

    @classmethod
    def from_dense(cls, A, lower=None, upper=None):
        """Banded copy of a dense array; a missing bandwidth is the exact one."""
        K = len(A)
        nz = [(i - j) for i in range(K) for j in range(K) if A[i][j]]
        if lower is None:
            lower = max([d for d in nz if d > 0], default=0)
        if upper is None:
            upper = max([-d for d in nz if d < 0], default=0)
        out = cls.zeros(K, lower, upper)
        for d, vals in out.diags.items():
            for t in range(len(vals)):
                i, j = (t, t + d) if d >= 0 else (t - d, t)
                vals[t] = A[i][j]
        return out

    @classmethod
    def identity(cls, K):
        return cls(K, 0, 0, {0: [mp.one] * K})

    def __getitem__(self, ij):
        i, j = ij
        if not (0 <= i < self.K and 0 <= j < self.K):
            raise IndexError(ij)
        d = j - i
        if d > self.upper or -d > self.lower:
            return 0
        return self.diags[d][min(i, j)]

    def diagonal(self, d: int) -> list:
        if d > self.upper or -d > self.lower:
            return [0] * (self.K - abs(d))
        return list(self.diags[d])

    def to_dense(self) -> list[list]:
        A = la.zeros(self.K)
        for d, vals in self.diags.items():
            for t, v in enumerate(vals):
                i, j = (t, t + d) if d >= 0 else (t - d, t)
                A[i][j] = v
        return A

    def transpose(self) -> "BandedMatrix":
        return BandedMatrix(self.K, self.upper, self.lower,
                            {-d: list(v) for d, v in self.diags.items()})

    def __matmul__(self, other: "BandedMatrix") -> "BandedMatrix":
        """Truncated product; the bandwidths add."""
        if self.K != other.K:
            raise ValueError("size mismatch")
        K = self.K
        lo = min(self.lower + other.lower, K - 1)
        up = min(self.upper + other.upper, K - 1)
        out = BandedMatrix.zeros(K, lo, up)
        for i in range(K):
            for j in range(max(0, i - lo), min(K, i + up + 1)):
                kmin = max(0, i - self.lower, j - other.upper)
                kmax = min(K - 1, i + self.upper, j + other.lower)
                acc = 0
                for k in range(kmin, kmax + 1):
                    acc += self[i, k] * other[k, j]
                out.diags[j - i][min(i, j)] = acc
        return out

    def add_scaled_identity(self, c) -> "BandedMatrix":
        out = BandedMatrix(self.K, self.lower, self.upper,
                           {d: list(v) for d, v in self.diags.items()})
        out.diags[0] = [x + c for x in out.diags[0]]
        return out

    def max_abs(self):
        return max((abs(v) for vals in self.diags.values() for v in vals), default=0)


def jacobi_banded(jc: JacobiCoeffs, size: int | None = None) -> BandedMatrix:
    return BandedMatrix.from_dense(jc.matrix(size), 1, 1)


def banded_poly(coeffs: Sequence, A: BandedMatrix) -> BandedMatrix:
    """Horner evaluation of an ascending coefficient list at a banded matrix."""
    acc = BandedMatrix.zeros(A.K, 0, 0)
    for c in reversed(coeffs):
        acc = (acc @ A) if acc.max_abs() else acc
        acc = acc.add_scaled_identity(to_mpf(c))
    return acc


def pascal_matrix(K: int, inverse: bool = False) -> BandedMatrix:
    """Lower Pascal matrix ``C(n, m)`` (or its inverse ``(-1)^(n-m) C(n, m)``), exact ints."""
    if K < 1:
        raise ValueError("K must be at least 1")
    sgn = -1 if inverse else 1
    A = [[sgn ** (n - m) * comb(n, m) if n >= m else 0 for m in range(K)] for n in range(K)]
    return BandedMatrix.from_dense(A, K - 1, 0)


def dressed_pascal(cp: CholeskyPair) -> tuple[BandedMatrix, BandedMatrix]:
    """``Pi = S B S^-1`` and ``Pi^-1 = S B^-1 S^-1`` (exact on every truncation)."""
    with mp.workprec(cp.prec):
        S = cp.dense_S()
        Sinv = la.inv_unit_lower(S)
        B = pascal_matrix(cp.K).to_dense()
        Bi = pascal_matrix(cp.K, inverse=True).to_dense()
        Pi = la.matmul(la.matmul(S, B), Sinv)
        Pinv = la.matmul(la.matmul(S, Bi), Sinv)
        for M in (Pi, Pinv):
            for i in range(cp.K):
                M[i][i] = mp.one
                for j in range(i + 1, cp.K):
                    M[i][j] = mp.zero
    return (BandedMatrix.from_dense(Pi, cp.K - 1, 0),
            BandedMatrix.from_dense(Pinv, cp.K - 1, 0))


def psi_constructions(w: PearsonWeight, cp: CholeskyPair, jc: JacobiCoeffs | None = None,
                      Pi: tuple | None = None) -> dict[str, list[list]]:
    """Every closed form of the structure matrix as dense ``(K-1) x (K-1)`` arrays.

    The first one, ``Pi^-1 H theta(J^T)``, is the construction path; the
    others are cross-checks.  Only the leading ``K - N - M - 2`` window of
    each is exact.
    """
    jc = recurrence_coeffs(cp) if jc is None else jc
    Pi, Pinv = dressed_pascal(cp) if Pi is None else Pi
    L = jc.size
    with mp.workprec(cp.prec):
        J = jacobi_banded(jc, L)
        Jt = J.transpose()
        I = BandedMatrix.identity(L)
        H = list(cp.H[:L])
        P = la.window(Pi.to_dense(), L)
        Pinv_d = la.window(Pinv.to_dense(), L)
        PT = la.transpose(P)
        th, sg = w.theta_coeffs, w.sigma_coeffs
        theta_J = banded_poly(th, J).to_dense()
        theta_Jt = banded_poly(th, Jt).to_dense()
        sigma_J = banded_poly(sg, J).to_dense()
        sigma_Jt = banded_poly(sg, Jt).to_dense()
        theta_J1 = banded_poly(th, J.add_scaled_identity(1)).to_dense()
        sigma_Jt1 = banded_poly(sg, Jt.add_scaled_identity(-1)).to_dense()
        del I
        return {
            "Pi^-1 H theta(J^T)": la.matmul(Pinv_d, la.scale_rows(H, theta_Jt)),
            "sigma(J) H Pi^T": la.matmul(la.scale_cols(sigma_J, H), PT),
            "Pi^-1 theta(J) H": la.scale_cols(la.matmul(Pinv_d, theta_J), H),
            "H sigma(J^T) Pi^T": la.matmul(la.scale_rows(H, sigma_Jt), PT),
            "theta(J+I) Pi^-1 H": la.scale_cols(la.matmul(theta_J1, Pinv_d), H),
            "H Pi^T sigma(J^T-I)": la.matmul(la.scale_rows(H, PT), sigma_Jt1),
        }


def psi_window(w: PearsonWeight, cp: CholeskyPair) -> int:
    return cp.K - w.band


def laguerre_freud(w: PearsonWeight, cp: CholeskyPair, jc: JacobiCoeffs | None = None,
                   Pi: tuple | None = None) -> BandedMatrix:
    """Structure matrix Psi on the exact ``K - N - M - 2`` window.

    Built as ``Pi^-1 H theta(J^T)``; the other five closed forms must agree
    and the out-of-band entries must be negligible (both to
    ``2**-(prec/2)`` relative), otherwise NumericBreakdown.  Out-of-band
    entries are then dropped, leaving M sub- and N+1 superdiagonals.
    """
    W = psi_window(w, cp)
    if W < 2:
        raise WindowTooSmall(f"K = {cp.K} too small: need K >= N + M + 4 = {w.band + 2}")
    forms = psi_constructions(w, cp, jc, Pi)
    with mp.workprec(cp.prec):
        tol = mpf(2) ** (-(cp.prec // 2))
        names = list(forms)
        Psi = la.window(forms[names[0]], W)
        for name in names[1:]:
            if la.rel_diff(Psi, la.window(forms[name], W)) > tol:
                raise NumericBreakdown(f"structure matrix form {name!r} disagrees")
        scale = la.max_abs(Psi)
        for i in range(W):
            for j in range(W):
                if (j - i > w.N + 1 or i - j > w.M) and abs(Psi[i][j]) > tol * scale:
                    raise NumericBreakdown(f"out-of-band entry ({i}, {j}) is not negligible")
        return BandedMatrix.from_dense(Psi, min(w.M, W - 1), min(w.N + 1, W - 1))


def psi_extreme_diagonals(w: PearsonWeight, cp: CholeskyPair, jc: JacobiCoeffs,
                          W: int) -> tuple[list, list]:
    """Closed forms of the lowest and highest diagonals of Psi.

    ``psi^(-M)_n = eta H_n prod_{k=n+1}^{n+M} gamma_k`` and
    ``psi^(N+1)_n = H_n prod_{k=n+1}^{n+N+1} gamma_k``.
    """
    with mp.workprec(cp.prec):
        eta = to_mpf(w.params.eta)
        low, high = [], []
        for n in range(W - w.M):
            v = eta * cp.H[n]
            for k in range(n + 1, n + w.M + 1):
                v *= jc.gamma[k]
            low.append(v)
        for n in range(W - w.N - 1):
            v = cp.H[n]
            for k in range(n + 1, n + w.N + 2):
                v *= jc.gamma[k]
            high.append(v)
    return low, high


def p_shift_residuals(w: PearsonWeight, cp: CholeskyPair, Psi: BandedMatrix,
                      z, nmax: int, jc: JacobiCoeffs | None = None) -> tuple[mpf, mpf]:
    """Backward and forward structure-equation residuals at one ``z``.

    Relative to the sum of moduli of the terms on the right-hand side.
    """
    jc = recurrence_coeffs(cp, check=False) if jc is None else jc
    with mp.workprec(cp.prec):
        z = mpf(z)
        W = Psi.K
        P = eval_poly_all(jc, z, W - 1)
        Pm = eval_poly_all(jc, z - 1, nmax)
        Pp = eval_poly_all(jc, z + 1, nmax)
        theta, sigma = eval_theta_sigma(w, z)
        back = fwd = mp.zero
        for n in range(nmax + 1):
            terms = [Psi[n, m] * P[m] / cp.H[m] for m in range(max(0, n - w.M), min(W, n + w.N + 2))]
            r = abs(theta * Pm[n] - mp.fsum(terms)) / max(mp.fsum(abs(t) for t in terms), abs(theta * Pm[n]), mpf(2) ** -cp.prec)
            back = max(back, r)
            terms = [Psi[m, n] * P[m] / cp.H[m] for m in range(max(0, n - w.N - 1), min(W, n + w.M + 1))]
            r = abs(sigma * Pp[n] - mp.fsum(terms)) / max(mp.fsum(abs(t) for t in terms), abs(sigma * Pp[n]), mpf(2) ** -cp.prec)
            fwd = max(fwd, r)
    return back, fwd


def verify_p_shift(w: PearsonWeight, cp: CholeskyPair, Psi: BandedMatrix,
                   z_samples: Sequence, nmax: int | None = None,
                   tol_bits: int | None = None, params_K: int | None = None,
                   report_prec: int | None = None) -> list[VerificationReport]:
    """Structure equations ``theta(z)P(z-1) = Psi H^-1 P(z)`` and
    ``sigma(z)P(z+1) = Psi^T H^-1 P(z)`` for degrees ``n <= nmax``."""
    start = time.perf_counter()
    W = Psi.K
    nmax = W - w.N - w.M - 2 if nmax is None else nmax
    if nmax > W - max(w.N + 2, w.M + 1):
        raise WindowTooSmall(f"degree {nmax} too large for a {W} x {W} structure matrix")
    report_prec = cp.prec if report_prec is None else report_prec
    tol_bits = report_prec // 2 if tol_bits is None else tol_bits
    back = fwd = mp.zero
    for z in z_samples:
        b, f = p_shift_residuals(w, cp, Psi, z, nmax)
        back, fwd = max(back, b), max(fwd, f)
    el = time.perf_counter() - start
    K = W if params_K is None else params_K
    zs = ",".join(str(z) for z in z_samples)
    return [
        make_report("theta(z)P(z-1) = Psi H^-1 P(z)", w.params, K, report_prec, back,
                    tol_bits, seconds=el, detail=f"n<={nmax} z={zs}"),
        make_report("sigma(z)P(z+1) = Psi^T H^-1 P(z)", w.params, K, report_prec, fwd,
                    tol_bits, seconds=el, detail=f"n<={nmax} z={zs}"),
    ]
