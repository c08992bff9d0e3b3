import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from smoothlab import constants as cst
from smoothlab import disorder as dis
from smoothlab.errors import OutOfImage, ParameterOutOfRange


def two_atom_c(a, beta, delta):
    """Independent evaluation of (c-, c+) for the two-point law by explicit sums."""
    x = np.array([-1.0 / a, a])
    p = np.array([a * a, 1.0]) / (a * a + 1.0)
    q = p * np.exp(delta * x)
    q /= q.sum()
    X = x - q @ x
    pos, neg = np.maximum(X, 0), np.maximum(-X, 0)

    def g(y):
        return np.where(np.abs(y) < 1e-12, 1.0, np.expm1(y) / np.where(y == 0, 1, y))

    cp = (q @ (X**2 * g(beta * pos))) / (q @ np.exp(-beta * neg))
    cm = (q @ (X**2 * g(-beta * neg))) / (q @ np.exp(beta * pos))
    return cm, cp


def test_g_func_series_and_direct():
    assert cst.g_func(0.0) == 1.0
    for x in (1e-6, -3e-5, 0.3, -2.0, 5.0):
        assert cst.g_func(x) == pytest.approx(math.expm1(x) / x, rel=1e-12)


@given(st.floats(-1.99, 1.99).filter(lambda d: d != 0))
def test_gaussian_b_is_one(delta):
    assert cst.b_delta(dis.standard_gaussian(), delta) == pytest.approx(1.0, abs=1e-12)


def test_b_laplace_closed_form():
    law = dis.laplace_density()
    t = 0.4
    lm = -math.log(1 - t * t / 2)
    m = t / (1 - t * t / 2)
    assert cst.b_delta(law, t) == pytest.approx(2 / t * abs(m - lm / t), rel=1e-9)


@pytest.mark.parametrize("beta,delta", [(0.0, 0.0), (0.1, 0.0), (0.1, 0.3), (0.5, -0.4), (0.05, 1.2)])
def test_c_pm_two_point_oracle(beta, delta):
    got = cst.c_pm(dis.two_point(2.0), beta, delta)
    assert got == pytest.approx(two_atom_c(2.0, beta, delta), rel=1e-12)


def test_C_pm_against_quad():
    beta, delta = 0.1, 0.3
    ref = [integrate.quad(lambda d: two_atom_c(2.0, beta, d)[i], 0, delta, epsabs=0, epsrel=1e-12)[0] / delta
           for i in (0, 1)]
    assert cst.C_pm(dis.two_point(2.0), beta, delta) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("law", [dis.standard_gaussian(), dis.rademacher(), dis.two_point(2.0)])
def test_unit_constants_at_origin(law):
    assert cst.C_pm(law, 0.0, 0.0) == pytest.approx((1.0, 1.0), abs=1e-8)


@given(st.floats(0.0, 0.6), st.floats(-0.6, 0.6))
def test_c_pm_brackets_tilted_variance(beta, delta):
    law = dis.two_point(2.0)
    cm, cp = cst.c_pm(law, beta, delta)
    tilted = law.tilt(delta)
    var = tilted.expect(lambda x: (x - law.mean_at(delta)) ** 2)
    assert cm <= var * (1 + 1e-12) and var <= cp * (1 + 1e-12)


def test_gaussian_constants_independent_of_delta():
    law = dis.standard_gaussian()
    assert cst.c_pm(law, 0.3, 0.0) == pytest.approx(cst.c_pm(law, 0.3, 0.7), rel=1e-12)


def test_F_inverse_round_trip():
    law = dis.two_point(2.0)
    for y in (0.01, 0.07, 0.3):
        d = cst.F_beta_inverse(law, 0.2, y)
        assert cst.F_beta(law, 0.2, d) == pytest.approx(y, abs=1e-9)


def test_F_inverse_out_of_image():
    law = dis.laplace_density()
    radius = cst.usable_radius(law, 0.1)
    with pytest.raises(OutOfImage):
        cst.F_beta_inverse(law, 0.1, radius * 1.01)


def test_a_constant_formula():
    law = dis.two_point(2.0)
    beta, delta = 0.1, 0.05
    d = cst.F_beta_inverse(law, beta, delta)
    assert cst.a_constant(law, beta, delta) == pytest.approx(cst.b_delta(law, d) * (d / delta) ** 2, rel=1e-12)


def test_a_constant_gaussian_is_inverse_square():
    # Gaussian c- does not depend on delta, so A = 1/C-^2
    law = dis.standard_gaussian()
    cm = cst.c_pm(law, 0.5, 0.0)[0]
    assert cst.a_constant(law, 0.5, 0.1) == pytest.approx(1 / cm**2, rel=1e-8)


def test_a_constant_tends_to_one():
    law = dis.two_point(2.0)
    vals = [cst.a_constant(law, b, b) for b in (0.1, 0.03, 0.01)]
    gaps = [abs(v - 1) for v in vals]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.02


def test_a_constant_negative_requires_mirror():
    with pytest.raises(ParameterOutOfRange):
        cst.a_constant(dis.two_point(2.0), 0.1, -0.05)
    val = cst.a_constant(dis.two_point(2.0), 0.1, -0.05, mirror=True)
    assert val == pytest.approx(cst.a_constant(dis.two_point(0.5), 0.1, 0.05), rel=1e-8)


def test_admissibility():
    law = dis.laplace_density()
    assert cst.eps0(law, 1.0) == pytest.approx(math.sqrt(2) / 2)
    with pytest.raises(ParameterOutOfRange):
        cst.c_pm(law, 0.1, 0.8)
    with pytest.raises(ParameterOutOfRange):
        cst.c_pm(law, 0.8, 0.1)


@given(st.floats(0.0, 0.2))
def test_F_strictly_increasing(beta):
    law = dis.two_point(2.0)
    vals = [cst.F_beta(law, beta, d) for d in np.linspace(-0.5, 0.5, 7)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_report_fields():
    rep = cst.constants_report(dis.two_point(2.0), 0.1, 0.1)
    assert rep.csv_row()[:2] == [0.1, 0.1]
    assert rep.F_value == pytest.approx(rep.C_minus * 0.1)
    assert rep.eps0 == math.inf
    assert '"beta": 0.1' in rep.to_json()
