import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grammoments import (
    MomentOverflowError,
    MomentTable,
    Spectrum,
    alpha_vector,
    monic_coefficients,
    solve_quotient,
    stable_moment,
    stable_moments_upto,
    validate_ensemble,
)

from .conftest import random_spectrum

# Moment formula with an exact 80-digit Vandermonde inverse (mpmath), frozen.
EXACT = {
    5: {1: 0.5562946875, 2: 0.50481865396054687, 5: 1.1032514813306887, 8: 5.3989467486036124,
        10: 21.706738268494853, 20: 562593.0803124444, 30: 897951655292.41721,
        45: 4.1753045743636333e23},
    20: {1: 0.96124046891548564, 2: 1.166861057695754, 5: 4.7562784645786107,
         8: 37.474692534778096, 10: 191.37952770055658, 20: 8981485.8114565249,
         30: 17067023823503.95, 45: 8.6330518128150186e24},
}


def test_monic_single():
    np.testing.assert_array_equal(monic_coefficients(Spectrum([1.0])).a, [-1.0, 1.0])


def test_monic_hand_expansion():
    # (X-1)(X-2)(X-4) = X^3 - 7X^2 + 14X - 8
    np.testing.assert_array_equal(monic_coefficients(Spectrum([1.0, 2.0, 4.0])).a, [-8.0, 14.0, -7.0, 1.0])


def test_monic_root_residual(config1):
    a = monic_coefficients(config1.spectrum)
    assert a.a[-1] == 1.0
    assert np.sign(a.a[0]) == (-1) ** config1.q
    for beta in config1.spectrum.values:
        scale = np.sum(np.abs(a.a) * beta ** np.arange(a.a.size))
        assert abs(a(beta)) <= 1e-10 * scale


def test_quotient_tau_q_plus_one():
    a = monic_coefficients(Spectrum([1.0, 2.0, 4.0]))
    b = solve_quotient(a, 4).b
    # row 1: a_{q+1} b_1 + a_q b_2 = 0 with b_2 = -1 gives b_1 = a_q
    assert b.tolist() == [a.a[2], -1.0]


def test_quotient_single_root():
    a = monic_coefficients(Spectrum([1.0]))
    q = solve_quotient(a, 2)
    assert q.b.tolist() == [-1.0, -1.0]
    # P(X) = alpha_1 - X^2 = Q(X)(X - 1) with Q = -X - 1 gives alpha_1 = 1 and P(1) = 0
    alpha = alpha_vector(Spectrum([1.0]), a, 2).alpha
    assert alpha.tolist() == [1.0]


def test_quotient_out_of_contract():
    a = monic_coefficients(Spectrum([1.0, 2.0]))
    with pytest.raises(ValueError):
        solve_quotient(a, 2)


@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=8, unique=True), st.integers(1, 30))
def test_quotient_last_coefficient(values, extra):
    try:
        s = Spectrum(values)
    except ValueError:
        return
    a = monic_coefficients(s)
    assert solve_quotient(a, s.q + extra).b[-1] == -1.0


def test_quotient_satisfies_toeplitz_system():
    s = Spectrum([0.4, 1.1, 1.9, 3.0])
    a = monic_coefficients(s).a
    q = s.q
    for tau in range(q + 1, q + 12):
        b = solve_quotient(monic_coefficients(s), tau).b
        n = b.size
        phi = np.zeros((n, n))
        for r in range(n):
            for j in range(r, n):
                idx = q - (j - r)
                if 0 <= idx <= q:
                    phi[r, j] = a[idx]
        rhs = np.zeros(n)
        rhs[-1] = -1.0
        np.testing.assert_allclose(phi @ b, rhs, atol=1e-12 * np.abs(b).max())


def test_alpha_trivial():
    s = Spectrum([1.0, 2.0, 4.0])
    a = monic_coefficients(s)
    assert alpha_vector(s, a, 2).alpha.tolist() == [0.0, 0.0, 1.0]
    assert alpha_vector(s, a, 0).alpha.tolist() == [1.0, 0.0, 0.0]


def test_alpha_tau_equals_q():
    s = Spectrum([1.0, 2.0, 4.0])
    alpha = alpha_vector(s, monic_coefficients(s), 3).alpha
    assert alpha.tolist() == [8.0, -14.0, 7.0]
    psi = np.vander(s.array, 3, increasing=True)
    np.testing.assert_allclose(psi @ alpha, [1.0, 8.0, 64.0])


def test_alpha_tau_4_against_direct_solve():
    s = Spectrum([1.0, 2.0, 4.0])
    alpha = alpha_vector(s, monic_coefficients(s), 4).alpha
    psi = np.vander(s.array, 3, increasing=True)
    direct = np.linalg.solve(psi, s.array**4)
    np.testing.assert_allclose(alpha, direct, rtol=1e-13)
    np.testing.assert_allclose(psi @ alpha, [1.0, 16.0, 256.0])


def test_polynomial_reconstruction(config1):
    s = config1.spectrum
    a = monic_coefficients(s)
    for tau in range(s.q + 1, 31):
        alpha = alpha_vector(s, a, tau).alpha
        for beta in s.values:
            powers = beta ** np.arange(s.q)
            val = math.fsum(np.append(alpha * powers, -(beta**tau)))
            scale = np.sum(np.abs(alpha) * powers) + beta**tau
            assert abs(val) <= 1e-8 * scale


@pytest.mark.parametrize("q", [5, 20])
@pytest.mark.parametrize("p", [1, 2, 5, 8, 10, 20, 30, 45])
def test_moments_against_exact(q, p, config1, config2):
    cfg = config1 if q == 5 else config2
    exact = EXACT[q][p]
    assert stable_moment(cfg, p) == pytest.approx(exact, rel=5e-11)


def test_hand_example():
    cfg = validate_ensemble(2, 3, [1.0, 2.0, 4.0])
    assert stable_moment(cfg, 1) == pytest.approx(7.0, rel=1e-15)


def test_normalization_exact(config2):
    assert stable_moment(config2, 0) == 1.0


@pytest.mark.parametrize("b", [0.5, 3.0])
def test_exponential_moments(b):
    cfg = validate_ensemble(1, 1, [b])
    for p in range(12):
        assert stable_moment(cfg, p) == pytest.approx(math.factorial(p) * b**p, rel=1e-13)


def test_batch_matches_single(config2):
    table = stable_moments_upto(config2, 12)
    assert table.engine == "stable"
    assert len(table) == 13
    for p in range(13):
        assert table[p] == pytest.approx(stable_moment(config2, p), rel=1e-15)


def test_batch_small(config1):
    assert dict(stable_moments_upto(config1, 0).moments) == {0: 1.0}
    t = stable_moments_upto(config1, 1)
    assert round(t[1], 4) == 0.5563 and t[0] == 1.0


def test_log_convex(moments1, moments2):
    assert moments1.log_convexity_violations() == []
    assert moments2.log_convexity_violations() == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_trace_identity_random(seed):
    rng = np.random.default_rng(seed)
    q = int(rng.integers(1, 12))
    cfg = validate_ensemble(int(rng.integers(1, q + 1)), q, random_spectrum(rng, q, 0.01))
    assert stable_moment(cfg, 1) == pytest.approx(cfg.spectrum.trace, rel=1e-10)


def test_overflow_reports_order():
    cfg = validate_ensemble(1, 2, [1e3, 2e3])
    with pytest.raises(MomentOverflowError) as info:
        stable_moments_upto(cfg, 200)
    assert info.value.p is not None and info.value.p <= 200


def test_negative_order():
    cfg = validate_ensemble(1, 1, [1.0])
    with pytest.raises(ValueError):
        stable_moment(cfg, -1)


def test_moment_table_validation():
    with pytest.raises(ValueError):
        MomentTable({1: 1.0}, "stable")
    with pytest.raises(ValueError):
        MomentTable({0: 1.0, 1: -0.5}, "stable")
    with pytest.raises(ValueError):
        MomentTable({0: 1.0}, "magic")
    t = MomentTable({0: 1.0, 2: 2.0, 1: 1.0}, "empirical")
    assert list(t.moments) == [0, 1, 2]
    np.testing.assert_array_equal(t.as_array(), [1.0, 1.0, 2.0])
