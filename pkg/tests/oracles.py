"""Independent reference computations.

Nothing here goes through the library's moment, Cholesky or recurrence
code: the weight comes from log-gamma values, inner products are plain
lattice sums, and recurrence coefficients come from the discretized
Stieltjes procedure on the lattice itself.
"""
from mpmath import mp, mpf


def _q(x):
    return mpf(x.numerator) / x.denominator


def weight_values(params, prec, tail_bits=None):
    """``[w(0), w(1), ...]`` until the tail is negligible for degree-40 moments."""
    tail_bits = prec + 64 if tail_bits is None else tail_bits
    with mp.workprec(prec):
        a = [_q(x) for x in params.a]
        b = [_q(x) for x in params.b]
        eta = _q(params.eta)
        log_eta = mp.log(eta)
        const = mp.fsum(mp.loggamma(x) for x in b) - mp.fsum(mp.loggamma(x) for x in a)
        out, k, peak = [], 0, mp.zero
        while True:
            lw = (const + mp.fsum(mp.loggamma(x + k) for x in a)
                  - mp.fsum(mp.loggamma(x + k) for x in b) - mp.loggamma(k + 1) + k * log_eta)
            wk = mp.exp(lw)
            out.append(wk)
            bound = wk * mpf(k + 1) ** 40
            peak = max(peak, bound)
            if k > 20 and bound < peak * mpf(2) ** -tail_bits:
                return out
            k += 1


def lattice_moments(params, count, prec):
    with mp.workprec(prec + 64):
        w = weight_values(params, prec + 64)
        return [mp.fsum(wk * mpf(k) ** n for k, wk in enumerate(w)) for n in range(count)]


def stieltjes(params, nmax, prec):
    """``(beta_0..beta_nmax, gamma_0..gamma_nmax, H_0..H_nmax)`` by the
    Stieltjes procedure on the lattice (gamma_0 reported as 0)."""
    with mp.workprec(prec + 128):
        w = weight_values(params, prec + 128)
        ks = [mpf(k) for k in range(len(w))]
        prev = [mp.zero] * len(w)
        cur = [mp.one] * len(w)
        beta, gamma, H = [], [mp.zero], []
        for n in range(nmax + 1):
            h = mp.fsum(p * p * wk for p, wk in zip(cur, w))
            bn = mp.fsum(k * p * p * wk for k, p, wk in zip(ks, cur, w)) / h
            H.append(h)
            beta.append(bn)
            if n:
                gamma.append(h / H[n - 1])
            g = gamma[n]
            cur, prev = [(k - bn) * p - g * q for k, p, q in zip(ks, cur, prev)], cur
        return beta, gamma, H


def inner_products(params, rows, prec):
    """Gram matrix ``sum_k P_n(k) P_m(k) w(k)`` of coefficient lists."""
    with mp.workprec(prec + 64):
        w = weight_values(params, prec + 64)
        vals = [[mp.polyval(list(reversed(r)), k) for k in range(len(w))] for r in rows]
        return [[mp.fsum(x * y * wk for x, y, wk in zip(vi, vj, w)) for vj in vals]
                for vi in vals]


def second_kind(params, row, z, prec):
    """``sum_k P(k) w(k) / (z - k)`` for one coefficient list."""
    with mp.workprec(prec + 64):
        w = weight_values(params, prec + 64)
        z = mpf(z)
        return mp.fsum(mp.polyval(list(reversed(row)), k) * wk / (z - k)
                       for k, wk in enumerate(w))


def rel(x, y):
    scale = max(abs(x), abs(y))
    return abs(x - y) / scale if scale else mp.zero
