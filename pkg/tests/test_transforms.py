import pytest
from mpmath import mp, mpf

from dop import _linalg as la
from dop.errors import HypothesisViolated, PointOnDivisor, SingularBlock, ZeroDenominator
from dop.orthopoly import CholeskyPair
from dop.structure import laguerre_freud
from dop.transforms import (QuasiDetInput, christoffel_coeffs, christoffel_poly,
                            christoffel_rows, connection_matrices, connection_residuals,
                            family, factorization_target, geronimus_coeffs,
                            geronimus_connection, geronimus_norms, geronimus_poly,
                            geronimus_second_kind_residual, jacobi_factorize, m_sigma,
                            m_theta, quasidet_theta_star, shifted_norms_cf,
                            shifted_poly_determinantal, sigma_correction, theta_correction,
                            uvarov_resolvents, uvarov_second_kind_check)
from dop.weights import ShiftSpec, eval_theta_sigma, make_weight, shift_params

import oracles

TOL = mpf(2) ** -128
IT, TJ, T = ShiftSpec.it(1), ShiftSpec.tj(1), ShiftSpec.total()


def fam_of(a, b, eta, K=16):
    w = make_weight(a, b, eta)
    return family(w, K + w.band, 256)


def coeff_rel(rows, fam, nmax):
    return max(la.max_abs_diff([rows[n]], [fam.coeffs(n)]) / la.max_abs([fam.coeffs(n)])
               for n in range(nmax + 1))


# -- quasi-determinants -----------------------------------------------------

def test_quasidet_scalar():
    assert quasidet_theta_star(QuasiDetInput(((1,),), (2,), (3,), 4), 64) == -2


def test_quasidet_zero_coupling():
    q = QuasiDetInput(((2, 1), (1, 3)), (5, 7), (0, 0), mpf("1.25"))
    assert quasidet_theta_star(q, 64) == mpf("1.25")


def test_quasidet_identity_block():
    q = QuasiDetInput(((1, 0), (0, 1)), (1, 1), (1, 1), 3)
    assert quasidet_theta_star(q, 64) == 1


def test_quasidet_is_determinant_ratio():
    with mp.workprec(200):
        rows = [[mpf(1) / (i + j + 1) + (i == j) for j in range(5)] for i in range(5)]
        rows[0][0] = mpf(0)  # forces a pivot swap
        got = quasidet_theta_star(QuasiDetInput.from_array(rows), 200)
        ref = mp.det(mp.matrix(rows)) / mp.det(mp.matrix([r[:4] for r in rows[:4]]))
        assert oracles.rel(got, ref) < mpf(2) ** -180


def test_quasidet_singular_block():
    with pytest.raises(SingularBlock):
        quasidet_theta_star(QuasiDetInput(((1, 2), (2, 4)), (1, 1), (1, 1), 0), 128)


# -- connection matrices and Christoffel formulas ---------------------------

def test_it_connection_diagonal_identity():
    w = make_weight((2,), (), "2/5")
    fam = fam_of((2,), (), "2/5")
    pair = connection_matrices(w, fam.cp, IT)
    with mp.workprec(fam.wp):
        P = fam.P(-2, 9)
        for n in range(9):
            assert oracles.rel(pair.omega[n, n], -P[n + 1] / P[n]) < TOL
            assert pair.Omega[n, n] == 1 and pair.omega[n, n + 1] == 1


def test_charlier_total_connection_uses_eta_kappa():
    # T leaves a Charlier weight unchanged, so TH = H and the constant is eta
    fam = fam_of((), (), "1/2")
    pair = connection_matrices(fam.weight, fam.cp, T)
    with mp.workprec(fam.wp):
        for n in range(10):
            assert oracles.rel(pair.omega[n, n], mpf(1) / 2) < TOL
            assert oracles.rel(pair.Omega[n + 1, n], fam.jc.gamma[n + 1] * 2) < TOL


def test_connection_zero_denominator():
    fam = fam_of((2,), (), "2/5", K=8)
    H = list(fam.H)
    H[3] = mp.zero
    bad = CholeskyPair(fam.cp.S, tuple(H), fam.cp.prec)
    with pytest.raises(ZeroDenominator):
        connection_matrices(fam.weight, fam.cp, IT, shifted=bad)


def test_christoffel_degree_zero_is_one():
    fam = fam_of((2,), (), "2/5")
    with mp.workprec(fam.wp):
        assert oracles.rel(christoffel_poly(fam.weight, fam.cp, IT, 0, mpf("3.3")), 1) < TOL


def test_christoffel_meixner_it_coefficients():
    fam, up = fam_of((2,), (), "2/5"), fam_of((3,), (), "2/5")
    rows = christoffel_coeffs(fam.weight, fam.cp, IT, 8)
    assert coeff_rel(rows, up, 8) < TOL


def test_christoffel_tj_from_b_two_and_a_half():
    fam, down = fam_of((), ("5/2",), "7/10"), fam_of((), ("3/2",), "7/10")
    with mp.workprec(fam.wp):
        v = christoffel_poly(fam.weight, fam.cp, TJ, 3, mpf("4.5"))
        assert oracles.rel(v, down.P(mpf("4.5"), 3)[3]) < TOL


def test_christoffel_total_returns_translated_value():
    fam = fam_of(("17/10",), ("23/10",), "2/5")
    up = family(shift_params(fam.weight, T), fam.cp.K, 256)
    with mp.workprec(fam.wp):
        for n in (1, 4, 7):
            v = christoffel_poly(fam.weight, fam.cp, T, n, mpf("3.25"))
            assert oracles.rel(v, up.P(mpf("2.25"), n)[n]) < TOL
        with pytest.raises(PointOnDivisor):
            christoffel_poly(fam.weight, fam.cp, T, 2, 0)


def test_christoffel_point_on_divisor():
    fam = fam_of((2,), (), "2/5")
    with pytest.raises(PointOnDivisor):
        christoffel_poly(fam.weight, fam.cp, IT, 3, -2)


def test_christoffel_hypothesis_violated():
    w = make_weight((2,), (), "2/5")
    with mp.workprec(128):
        rows = [[mpf(1)], [mpf(2), mpf(1)], [mpf(1), mpf(0), mpf(1)]]  # P_1 = z + 2
        with pytest.raises(HypothesisViolated):
            christoffel_rows(rows, w.params, IT, 1)


def test_connection_identities_at_sample_points():
    fam = fam_of(("17/10",), ("23/10",), "2/5")
    w = fam.weight
    for s in (IT, TJ, T):
        sf = family(shift_params(w, s), fam.cp.K, 256)
        for z in ("0.3", "2.5", "-3.75", "6.1", "11.9"):
            assert max(connection_residuals(w, fam, sf, s, mpf(z), 10)) < TOL


# -- Geronimus formulas -----------------------------------------------------

def test_geronimus_degree_zero():
    fam = fam_of((3,), (), "2/5")
    assert geronimus_poly(fam.weight, fam.cp, IT.inverted(), 0, mpf(7)) == 1


def test_geronimus_it_inverse_gives_a_two_family():
    fam, down = fam_of((3,), (), "2/5"), fam_of((2,), (), "2/5")
    rows = geronimus_coeffs(fam.weight, fam, IT.inverted(), 6)
    assert coeff_rel(rows, down, 6) < TOL
    with mp.workprec(fam.wp):
        v = geronimus_poly(fam.weight, fam.cp, IT.inverted(), 5, mpf("1.7"))
        assert oracles.rel(v, down.P(mpf("1.7"), 5)[5]) < TOL


def test_christoffel_geronimus_roundtrip():
    fam = fam_of(("5/2",), (), "2/5")
    w = fam.weight
    down = make_weight(("3/2",), (), "2/5")
    rows = geronimus_coeffs(w, fam, IT.inverted(), 7)
    with mp.workprec(fam.wp):
        back = christoffel_rows(rows, down.params, IT, 6)
    assert coeff_rel(back, fam, 6) < TOL


@pytest.mark.parametrize("s", [IT.inverted(), TJ.inverted(), T.inverted()])
def test_geronimus_norms_and_second_kind(s):
    fam = fam_of(("17/10",), ("23/10",), "2/5")
    w = fam.weight
    sf = family(shift_params(w, s), fam.cp.K, 256)
    norms = geronimus_norms(w, fam, s, 9)
    for n in range(10):
        assert oracles.rel(norms[n], sf.H[n]) < TOL
    for z in ("2.5", "-1.75"):
        assert geronimus_second_kind_residual(w, fam, sf, s, mpf(z), 9) < TOL
        assert max(connection_residuals(w, fam, sf, s, mpf(z), 9)) < TOL


def test_total_geronimus_first_norm():
    # T^-1 H_0 = 1 - upsilon Q_0(-1), that is P_0(-1) - upsilon Q_0(-1)
    fam = fam_of(("17/10",), ("23/10",), "2/5")
    sf = family(shift_params(fam.weight, T.inverted()), fam.cp.K, 256)
    with mp.workprec(fam.wp):
        ups = mpf(fam.weight.params.upsilon.numerator) / fam.weight.params.upsilon.denominator
        assert oracles.rel(1 - ups * fam.Q(-1, 0)[0], sf.H[0]) < TOL


def test_geronimus_connection_is_bidiagonal():
    fam = fam_of((3,), (), "2/5")
    pair = geronimus_connection(fam.weight, fam, IT.inverted(), 6)
    assert (pair.omega.lower, pair.omega.upper, pair.Omega.lower, pair.Omega.upper) == (0, 1, 1, 0)


# -- LU / UL ----------------------------------------------------------------

def test_lu_first_pivot():
    fam = fam_of((2,), (), "2/5", K=12)
    L, U = jacobi_factorize(fam.weight, fam.cp, IT, "LU")
    with mp.workprec(fam.wp):
        assert oracles.rel(U[0][0], fam.jc.beta[0] + 2) < TOL


def test_lu_meixner():
    fam = fam_of((2,), (), "2/5", K=12)
    L, U = jacobi_factorize(fam.weight, fam.cp, IT, "LU")
    with mp.workprec(fam.wp):
        prod = la.window(la.matmul(L, U), 10)
        J = la.window(fam.jc.matrix(11), 10)
        target = [[J[i][j] + (2 if i == j else 0) for j in range(10)] for i in range(10)]
        assert la.max_abs_diff(prod, target) < TOL * la.max_abs(J)


def test_ul_meixner_matches_shifted_jacobi():
    fam = fam_of((2,), (), "2/5", K=12)
    up = fam_of((3,), (), "2/5", K=12)
    L, U = jacobi_factorize(fam.weight, fam.cp, IT, "UL")
    with mp.workprec(fam.wp):
        prod = la.window(la.matmul(U, L), 8)
        J3 = la.window(up.jc.matrix(9), 8)
        shifted = [[prod[i][j] - (2 if i == j else 0) for j in range(8)] for i in range(8)]
        assert la.rel_diff(shifted, J3) < TOL


def test_total_shift_ul_is_tj_plus_identity():
    # U L for the total shift rebuilds TJ + I; the form TJ - I is off by exactly 2I
    fam = fam_of(("17/10",), ("23/10",), "2/5")
    up = family(shift_params(fam.weight, T), fam.cp.K, 256)
    L, U = jacobi_factorize(fam.weight, fam.cp, T, "UL")
    with mp.workprec(fam.wp):
        prod = la.window(la.matmul(U, L), 8)
        TJ = la.window(up.jc.matrix(9), 8)
        diff = [[prod[i][j] - TJ[i][j] for j in range(8)] for i in range(8)]
        assert la.max_abs_diff(diff, la.identity(8)) < TOL * la.max_abs(TJ)
        minus = [[TJ[i][j] - (i == j) for j in range(8)] for i in range(8)]
        gap = [[prod[i][j] - minus[i][j] for j in range(8)] for i in range(8)]
        assert la.max_abs_diff(gap, la.diag([mpf(2)] * 8)) < TOL * la.max_abs(TJ)


def test_factorization_target_shapes():
    fam = fam_of((2,), (), "2/5", K=8)
    T8 = factorization_target(fam.weight, fam.cp, IT, "LU", 5)
    assert len(T8) == 5 and T8[0][1] == 1


def test_bad_mode():
    fam = fam_of((2,), (), "2/5", K=8)
    with pytest.raises(ValueError):
        jacobi_factorize(fam.weight, fam.cp, IT, "QR")


def test_continued_fraction_norms():
    fam = fam_of(("17/10",), ("23/10",), "2/5")
    for s in (IT, TJ, T):
        sf = family(shift_params(fam.weight, s), fam.cp.K, 256)
        cf = shifted_norms_cf(fam.weight, fam.cp, s, 10)
        assert max(oracles.rel(cf[n], sf.H[n]) for n in range(11)) < TOL


# -- determinantal formulas -------------------------------------------------

def direct(fam, n, z, direction):
    w = fam.weight
    with mp.workprec(fam.wp):
        theta, sigma = eval_theta_sigma(w, z)
        eta = mpf(w.params.eta.numerator) / w.params.eta.denominator
        Pn = fam.P(z + direction, n)[n]
        return theta * Pn if direction < 0 else sigma / eta * Pn


def test_charlier_backward_two_by_two():
    fam = fam_of((), (), 1)
    with mp.workprec(fam.wp):
        z = mpf("3.5")
        P0, Pz = fam.P(0, 5), fam.P(z, 5)
        rows = [[P0[4], Pz[4]], [P0[5], Pz[5]]]
        qd = quasidet_theta_star(QuasiDetInput.from_array(rows), fam.wp)
        assert oracles.rel(qd, z * fam.P(z - 1, 4)[4]) < TOL
        assert oracles.rel(shifted_poly_determinantal(fam.weight, fam, 4, z, -1), qd) < TOL


@pytest.mark.parametrize("spec,n,z,direction", [
    (((), ("3/2",), "7/10"), 5, "6.5", -1),
    (((2,), (), "2/5"), 4, "2.5", 1),
    ((("17/10",), ("23/10",), "2/5"), 6, "-3.25", 1),
    ((("17/10",), ("23/10",), "2/5"), 3, "8.5", -1),
])
def test_determinantal_against_direct(spec, n, z, direction):
    fam = fam_of(*spec)
    got = shifted_poly_determinantal(fam.weight, fam, n, mpf(z), direction)
    assert oracles.rel(got, direct(fam, n, mpf(z), direction)) < TOL


def test_determinantal_hypotheses():
    fam = fam_of((2,), (), "2/5")
    with pytest.raises(HypothesisViolated):
        shifted_poly_determinantal(fam.weight, fam, 0, mpf("2.5"), 1)
    with pytest.raises(HypothesisViolated):
        fam2 = fam_of((), (1,), "1/2")
        shifted_poly_determinantal(fam2.weight, fam2, 3, mpf("2.5"), -1)
    with pytest.raises(HypothesisViolated):
        fam3 = fam_of((), (2, 2), "1/2")
        shifted_poly_determinantal(fam3.weight, fam3, 4, mpf("2.5"), -1)
    with pytest.raises(ValueError):
        shifted_poly_determinantal(fam.weight, fam, 4, mpf("2.5"), 0)


# -- Geronimus-Uvarov -------------------------------------------------------

def test_m_theta_arrays():
    assert m_theta(make_weight((), (), "1/2")) == [[1]]
    assert m_sigma(make_weight((), (), "1/2")) == []
    w = make_weight((2,), ("5/2",), "1/2")
    # theta = z^2 + 3/2 z, sigma = z/2 + 1
    assert m_theta(w) == [[mpf(3) / 2, 1], [1, 0]]
    assert m_sigma(w) == [[mpf(1) / 2]]


def test_charlier_theta_correction_is_h0():
    fam = fam_of((), (), "1/2")
    for z in ("1.5", "7.25"):
        corr = theta_correction(fam.weight, fam.cp, mpf(z))
        assert len(corr) == 1 and oracles.rel(corr[0], fam.H[0]) < TOL
    assert sigma_correction(fam.weight, fam.cp, 3) == []


@pytest.mark.parametrize("spec", [((), ("3/2",), "7/10"), ((2,), (), "2/5"),
                                  (("17/10",), ("23/10",), "2/5")])
def test_uvarov_identities(spec):
    fam = fam_of(*spec)
    Psi = laguerre_freud(fam.weight, fam.cp, fam.jc)
    reports = uvarov_second_kind_check(fam.weight, fam, Psi, [mpf("4.3"), mpf("9.7")], 256)
    assert reports and all(r.passed for r in reports), [r.line() for r in reports]
    res = uvarov_resolvents(fam.weight, fam.cp, Psi, fam.jc)
    assert res.residual_plus < TOL and res.residual_minus < TOL
