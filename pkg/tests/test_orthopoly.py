import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf

from dop import _linalg as la
from dop.errors import NumericBreakdown, PoleError
from dop.moments import moment_matrix
from dop.orthopoly import (JacobiCoeffs, build_family, cholesky_hankel, eval_poly,
                           eval_poly_all, recurrence_coeffs, second_kind, tridiag_ldl_cf)
from dop.weights import make_weight

import oracles

TOL = mpf(2) ** -128


@pytest.fixture(scope="module")
def fams(weights):
    return {name: build_family(w, 14, 256) for name, w in weights.items()}


def test_charlier_closed_forms(fams):
    for name, eta in (("charlier-0.5", mpf(1) / 2), ("charlier-1", mpf(1))):
        jc = fams[name].jc
        with mp.workprec(256):
            for n in range(11):
                assert oracles.rel(jc.beta[n], n + eta) < TOL
                assert abs(jc.gamma[n] - n * eta) <= TOL * max(n, 1)


def test_meixner_closed_forms(fams):
    jc = fams["meixner"].jc
    with mp.workprec(256):
        a, eta = mpf(2), mpf(2) / 5
        for n in range(11):
            assert oracles.rel(jc.beta[n], (n + (n + a) * eta) / (1 - eta)) < TOL
            assert abs(jc.gamma[n] - eta * n * (n + a - 1) / (1 - eta) ** 2) <= TOL * max(n, 1) ** 2


@pytest.mark.parametrize("name", ["gen-charlier", "gen-meixner", "meixner", "charlier-0.5"])
def test_recurrence_matches_stieltjes_oracle(fams, name):
    fam = fams[name]
    beta, gamma, H = oracles.stieltjes(fam.weight.params, 10, 256)
    for n in range(11):
        assert oracles.rel(fam.jc.beta[n], beta[n]) < TOL
        assert oracles.rel(fam.H[n], H[n]) < TOL
        if n:
            assert oracles.rel(fam.jc.gamma[n], gamma[n]) < TOL


def test_cholesky_pair_diagonalizes_hankel():
    G = moment_matrix(make_weight((2,), (), "2/5"), 8, 400)
    cp = cholesky_hankel(G)
    with mp.workprec(400):
        S = cp.dense_S()
        SGSt = la.matmul(la.matmul(S, G.to_dense()), la.transpose(S))
        assert la.rel_diff(SGSt, la.diag(cp.H)) < mpf(2) ** -300
        assert all(S[n][n] == 1 for n in range(8))


def test_norms_are_products_of_gamma(fams):
    fam = fams["gen-meixner"]
    with mp.workprec(fam.wp):
        h = fam.H[0]
        for n in range(1, 12):
            h *= fam.jc.gamma[n]
            assert oracles.rel(h, fam.H[n]) < TOL


def test_polynomials_orthogonal_by_direct_sums(fams):
    fam = fams["gen-charlier"]
    rows = [fam.coeffs(n) for n in range(8)]
    gram = oracles.inner_products(fam.weight.params, rows, 256)
    for n in range(8):
        for m in range(8):
            ref = fam.H[n] if n == m else 0
            assert abs(gram[n][m] - ref) / mp.sqrt(fam.H[n] * fam.H[m]) < TOL


def test_recurrence_and_horner_agree(fams):
    fam = fams["gen-meixner"]
    with mp.workprec(fam.wp):
        for z in (mpf(0), mpf("3.7"), mpf(-2)):
            for n in (0, 1, 5, 11):
                assert oracles.rel(eval_poly(fam.jc, n, z), eval_poly(fam.cp, n, z,
                                                                      method="horner")) < TOL


def test_first_polynomial():
    jc = JacobiCoeffs((mpf(3), mpf(4)), (mpf(0), mpf(2)), 64)
    assert eval_poly_all(jc, 5, 2) == [1, 2, 2 * 1 - 2]


def test_second_kind_matches_direct_sum(fams):
    fam = fams["gen-meixner"]
    for n, z in ((0, "2.5"), (4, "-1.75"), (7, "9.3")):
        q = second_kind(fam.weight, fam.cp, n, mpf(z), 256)
        ref = oracles.second_kind(fam.weight.params, fam.coeffs(n), mpf(z), 256)
        assert oracles.rel(q.value, ref) < TOL
    assert oracles.rel(fam.Q(mpf("2.5"), 4)[4],
                       oracles.second_kind(fam.weight.params, fam.coeffs(4), mpf("2.5"), 256)) < TOL


def test_second_kind_pole():
    fam = build_family(make_weight((), (), "1/2"), 6, 128)
    with pytest.raises(PoleError):
        second_kind(fam.weight, fam.cp, 2, 3, 128)
    # negative integers are not lattice points
    second_kind(fam.weight, fam.cp, 2, -3, 128)


def test_precision_doubling_agreement(weights):
    w = weights["gen-meixner"]
    lo, hi = build_family(w, 12, 256), build_family(w, 12, 512)
    for n in range(10):
        assert oracles.rel(lo.jc.beta[n], hi.jc.beta[n]) < mpf(2) ** -200
        assert oracles.rel(lo.H[n], hi.H[n]) < mpf(2) ** -200


def test_continued_fraction_ldl_matches_dense():
    with mp.workprec(200):
        r = [mpf(4), mpf(5), mpf(6), mpf(7)]
        s = [mpf(1), mpf(2), mpf("0.5")]
        l, d = tridiag_ldl_cf(r, s)
        A = la.zeros(4)
        for i in range(4):
            A[i][i] = r[i]
        for i in range(3):
            A[i + 1][i] = A[i][i + 1] = s[i]
        L, dd = la.ldl(A)
        assert la.max_abs_diff([d], [dd]) < mpf(2) ** -190
        assert all(abs(l[i + 1] - L[i + 1][i]) < mpf(2) ** -190 for i in range(3))


def test_continued_fraction_zero_pivot():
    with pytest.raises(NumericBreakdown):
        tridiag_ldl_cf([mpf(0), mpf(1)], [mpf(1)])


def test_recurrence_cross_check_detects_corruption(fams):
    cp = fams["meixner"].cp
    H = list(cp.H)
    H[5] *= 1 + mpf(2) ** -40
    bad = type(cp)(cp.S, tuple(H), cp.prec)
    with pytest.raises(NumericBreakdown):
        recurrence_coeffs(bad)


@settings(max_examples=15, deadline=None)
@given(eta=st.fractions(min_value="1/10", max_value=3, max_denominator=16))
def test_charlier_property(eta):
    fam = build_family(make_weight((), (), eta), 8, 128)
    with mp.workprec(128):
        e = mpf(eta.numerator) / eta.denominator
        for n in range(6):
            assert oracles.rel(fam.jc.beta[n], n + e) < mpf(2) ** -64
            if n:
                assert oracles.rel(fam.jc.gamma[n], n * e) < mpf(2) ** -64
