import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from smoothlab import constants as cst
from smoothlab import disorder as dis
from smoothlab import toy
from smoothlab.errors import EnumerationTooLarge, ParameterOutOfRange

RAD = dis.rademacher()
BERN = toy.bernoulli_spins()


def test_spin_spec_validation_and_json():
    s = toy.ProductSpinSpec((0.0, 0.5, 1.0), (0.2, 0.3, 0.5))
    assert not s.signed and s.s0 == 1.0
    assert toy.ProductSpinSpec.from_json(s.to_json()) == s
    assert s.to_dict() == {"atoms": [[0.0, 0.2], [0.5, 0.3], [1.0, 0.5]]}
    assert toy.rademacher_spins().signed
    with pytest.raises(ValueError):
        toy.ProductSpinSpec((0.0, 1.0), (0.5, 0.6))


def test_trivial_values():
    assert toy.exact_f(dis.standard_gaussian(), toy.rademacher_spins(), 0.0, 0.0, 0.0) == 0.0
    for h in (-1.0, 0.4, 2.0):
        assert toy.exact_f(dis.standard_gaussian(), BERN, 0.0, h, 0.2) == pytest.approx(math.log((1 + math.exp(h)) / 2))


def test_gaussian_quadrature_against_direct_sum():
    # E log cosh(h + beta Z) by a fine trapezoid on the Gaussian density
    z = np.linspace(-12, 12, 200_001)
    dens = np.exp(-z * z / 2) / math.sqrt(2 * math.pi)
    ref = integrate.trapezoid(np.log(np.cosh(0.3 + 0.8 * (z + 0.2))) * dens, z)
    assert toy.exact_f(dis.standard_gaussian(), toy.rademacher_spins(), 0.8, 0.3, 0.2) == pytest.approx(ref, abs=1e-10)


def test_integrability_check():
    with pytest.raises(ParameterOutOfRange):
        toy.exact_f(dis.laplace_density(), BERN, 1.0, 0.0, 0.5)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_enumeration_matches_brute_force(N):
    spins = toy.ProductSpinSpec((0.0, 0.4, 1.0), (0.3, 0.3, 0.4))
    spec = dis.two_point(2.0)
    got = toy.exact_f_finite_N(spec, spins, 0.4, -0.3, 0.2, N)
    assert got == pytest.approx(toy.brute_force_mean_log_z(spec, spins, 0.4, -0.3, 0.2, N), abs=1e-12)


@given(st.integers(1, 10), st.floats(0, 1), st.floats(-2, 2), st.floats(-1, 1))
def test_enumeration_factorizes(N, beta, h, delta):
    assert toy.exact_f_finite_N(RAD, BERN, beta, h, delta, N) == pytest.approx(
        toy.exact_f(RAD, BERN, beta, h, delta), abs=1e-12)


def test_beta_zero_decouples():
    a = toy.exact_f_finite_N(RAD, BERN, 0.0, 0.3, 0.5, 5)
    b = toy.exact_f_finite_N(dis.two_point(3.0), BERN, 0.0, 0.3, -0.2, 5)
    assert a == pytest.approx(b, abs=1e-14)


def test_enumeration_caps():
    with pytest.raises(EnumerationTooLarge):
        toy.exact_f_finite_N(RAD, BERN, 0.1, 0.0, 0.0, 15)
    wide = dis.FiniteDiscrete.standardized(range(40), [1] * 40)
    many = toy.ProductSpinSpec(tuple(np.linspace(0, 1, 30)), tuple([1 / 30] * 30))
    with pytest.raises(EnumerationTooLarge):
        toy.exact_f_finite_N(wide, many, 0.1, 0.0, 0.0, 12)


@pytest.mark.parametrize("window", [(0.2, 0.7), (0.0, 0.34), (0.5, 1.0)])
def test_restricted_matches_brute_force(window):
    got = toy.restricted_f_finite_N(RAD, BERN, 0.3, 0.2, 0.1, window[0], window[1], 4)
    assert got == pytest.approx(toy.brute_force_mean_log_z(RAD, BERN, 0.3, 0.2, 0.1, 4, window), abs=1e-12)


def test_restricted_full_and_empty():
    full = toy.restricted_f_finite_N(RAD, BERN, 0.3, 0.2, 0.1, -0.1, 1.1, 6)
    assert full == pytest.approx(toy.exact_f_finite_N(RAD, BERN, 0.3, 0.2, 0.1, 6), abs=1e-14)
    assert toy.restricted_f_finite_N(RAD, BERN, 0.3, 0.2, 0.1, -1.0, -0.5, 6) == -math.inf


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.5), st.floats(0, 0.5))
def test_window_monotonicity(x, y, pad_lo, pad_hi):
    a, b = min(x, y), max(x, y) + 1e-3
    inner = toy.restricted_f_finite_N(RAD, BERN, 0.3, 0.2, 0.1, a, b, 6)
    outer = toy.restricted_f_finite_N(RAD, BERN, 0.3, 0.2, 0.1, a - pad_lo, b + pad_hi, 6)
    assert inner <= outer + 1e-14


def test_zero_window_is_minus_log_two():
    for beta, h, delta in ((0.0, 0.0, 0.0), (0.5, 1.0, 0.3), (0.2, -2.0, -0.4)):
        v = toy.restricted_f_finite_N(RAD, BERN, beta, h, delta, -0.01, 0.01, 8)
        assert v == pytest.approx(-math.log(2), abs=1e-14)


@pytest.mark.parametrize("h", [-1.5, 0.0, 0.3, 2.0])
def test_bernoulli_legendre_duality(h):
    assert toy.bernoulli_legendre(h) == pytest.approx(math.log((1 + math.exp(h)) / 2), abs=1e-9)


def test_sup_decomposition_decreases_with_N():
    res = [toy.sup_decomposition_check(RAD, BERN, 0.2, 0.3, 0.1, N, 48) for N in (6, 8, 10, 12)]
    assert all(r >= 0 for r in res)
    assert all(a > b for a, b in zip(res, res[1:]))


def test_sup_decomposition_at_beta_zero_tends_to_legendre():
    res = [toy.sup_decomposition_check(RAD, BERN, 0.0, 0.0, 0.0, N, 4 * N) for N in (4, 8, 12)]
    assert res[0] > res[1] > res[2]


def test_counterexample_symmetric_case():
    dh, dd = toy.counterexample_derivatives(1.0, 0.1)
    assert abs(dh) < 1e-10 and abs(dd) < 1e-10


@pytest.mark.parametrize("version,dh_coef", [("log", -0.5), ("cosh", 0.25)])
def test_counterexample_coefficients(version, dh_coef):
    beta = 0.025
    dh, dd = toy.counterexample_derivatives(2.0, beta, version)
    assert dd / beta**2 == pytest.approx(0.75, rel=0.01)
    assert dh / beta**3 == pytest.approx(dh_coef, rel=0.01)


def test_counterexample_reflection():
    # a -> 1/a reflects the disorder and flips both leading coefficients
    dh, dd = toy.counterexample_derivatives(2.0, 0.05)
    dh2, dd2 = toy.counterexample_derivatives(0.5, 0.05)
    assert dh2 == pytest.approx(-dh, rel=1e-6)
    assert dd2 == pytest.approx(-dd, rel=1e-6)


def test_derivative_csv():
    rows = toy.derivative_table(2.0, [0.1, 0.05])
    text = toy.derivative_csv(rows)
    assert text.startswith("a,beta,dh,ddelta,ratio\r\n")
    assert rows[0][4] == pytest.approx(rows[0][3] / (0.1 * rows[0][2]))


@given(st.floats(0, 0.5), st.floats(-1, 1), st.floats(-0.5, 0.5), st.floats(-2, 2))
def test_translation_identity(beta, h, delta, c):
    for spec in (dis.two_point(2.0), dis.standard_gaussian()):
        assert toy.translation_identity_check(spec, toy.rademacher_spins(), beta, h, delta, c) < 1e-10


def test_h_derivative_is_gibbs_mean():
    spec, e = dis.two_point(2.0), 1e-5
    for beta, h, delta in ((0.3, 0.2, 0.1), (0.8, -1.0, -0.3)):
        fd = (toy.exact_f(spec, BERN, beta, h + e, delta) - toy.exact_f(spec, BERN, beta, h - e, delta)) / (2 * e)
        assert fd == pytest.approx(toy.gibbs_mean(spec, BERN, beta, h, delta), abs=1e-6)


@given(st.floats(0.01, 0.5), st.floats(-0.5, 0.5), st.floats(-1, 1))
def test_derivative_comparison(beta, delta, h):
    # d f / d delta lies between c- beta (d f/dh) and c+ beta (d f/dh)
    spec, e = dis.two_point(2.0), 1e-5
    dd = (toy.exact_f(spec, BERN, beta, h, delta + e) - toy.exact_f(spec, BERN, beta, h, delta - e)) / (2 * e)
    dh = toy.gibbs_mean(spec, BERN, beta, h, delta)
    cm, cp = cst.c_pm(spec, beta, delta)
    assert cm * beta * dh - 1e-8 <= dd <= cp * beta * dh + 1e-8


@given(st.floats(0, 0.3), st.floats(-0.3, 0.3), st.floats(-1, 1))
def test_sandwich_pointwise(beta, delta, h):
    spec = dis.two_point(2.0)
    if beta == 0 and delta == 0:
        return
    cm, cp = cst.C_pm(spec, beta, delta)
    lo_c, hi_c = (cm, cp) if delta >= 0 else (cp, cm)
    mid = toy.exact_f(spec, BERN, beta, h, delta)
    assert toy.exact_f(spec, BERN, beta, h + lo_c * beta * delta, 0.0) <= mid + 1e-9
    assert mid <= toy.exact_f(spec, BERN, beta, h + hi_c * beta * delta, 0.0) + 1e-9
