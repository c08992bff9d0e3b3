import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import logsumexp

from smoothlab import disorder as dis
from smoothlab.errors import EmptyDisorder
from smoothlab.pinning import (
    RenewalLaw,
    critical_point,
    free_energy_mc,
    homogeneous_f,
    log_z_profile,
    quenched_log_Z,
    replica_csv,
    superadditivity_check,
    superadditivity_slack,
)


def brute_log_z(renewal, omega, beta, h):
    """Sum over every set of return times that ends at N."""
    N = len(omega)
    total = 0.0
    for k in range(N):
        for inner in itertools.combinations(range(1, N), k):
            times = (0,) + inner + (N,)
            w = 1.0
            for a, b in zip(times, times[1:]):
                w *= float(renewal.K(b - a)) * math.exp(h + beta * omega[b - 1])
            total += w
    return math.log(total)


def log_space_profile(renewal, omega, beta, h):
    N = len(omega)
    logK = np.array([-np.inf] + [float(renewal.log_K(n)) for n in range(1, N + 1)])
    lz = np.full(N + 1, -np.inf)
    lz[0] = 0.0
    for n in range(1, N + 1):
        lz[n] = h + beta * omega[n - 1] + logsumexp(lz[:n] + logK[n:0:-1])
    return lz


def test_c_alpha_matches_direct_sum():
    for alpha in (0.5, 0.8, 2.0):
        s = 1 + alpha
        n0 = 10**5
        direct = np.sum(np.arange(1, n0) ** -s) + n0 ** (1 - s) / (s - 1) + 0.5 * n0**-s + s * n0 ** (-s - 1) / 12
        assert RenewalLaw(alpha).c_alpha == pytest.approx(1 / direct, rel=1e-10)


def test_kernel_normalized_with_defect():
    law = RenewalLaw(0.8, defect=0.2)
    assert law.h_c0 == pytest.approx(-math.log(0.8))
    assert float(law.K(1)) == pytest.approx(0.8 * law.c_alpha)


def test_profile_matches_brute_force(rng):
    law = RenewalLaw(0.7, defect=0.1)
    omega = rng.standard_normal(9)
    got = quenched_log_Z(law, omega, 0.6, -0.2)
    assert got == pytest.approx(brute_log_z(law, omega, 0.6, -0.2), rel=1e-12)


def test_profile_matches_log_space_recursion_with_rescaling(rng):
    law = RenewalLaw(1.3)
    omega = rng.standard_normal(600)
    # large field forces the rescaling branch
    got = log_z_profile(law, omega[None, :], 1.0, 3.0)[0]
    ref = log_space_profile(law, omega, 1.0, 3.0)
    assert got[-1] > 1500
    assert np.allclose(got, ref, rtol=1e-11, atol=1e-9)


def test_empty_disorder():
    with pytest.raises(EmptyDisorder):
        quenched_log_Z(RenewalLaw(0.5), [], 0.1, 0.0)


@given(st.integers(1, 40), st.floats(0.0, 1.0), st.floats(-1.0, 1.0), st.integers(0, 2**32))
def test_superadditivity(split, beta, h, seed):
    omega = np.random.default_rng(seed).standard_normal(41)
    law = RenewalLaw(0.8)
    assert superadditivity_check(law, omega, beta, h, split)
    assert superadditivity_slack(law, omega, beta, h, split) >= -1e-9


def test_homogeneous_f_solves_equation():
    for alpha, h in ((0.5, 0.05), (0.8, 0.3), (2.0, 0.01), (1.0, 1.0)):
        law = RenewalLaw(alpha)
        f = homogeneous_f(law, h)
        total = law.c_alpha * mpmath.polylog(1 + alpha, mpmath.exp(-f))
        assert float(total) == pytest.approx(math.exp(-h), rel=1e-10)


def test_homogeneous_f_zero_below_critical():
    law = RenewalLaw(0.8, defect=0.3)
    assert homogeneous_f(law, law.h_c0 - 0.01) == 0.0
    assert homogeneous_f(law, law.h_c0 + 0.1) > 0


@pytest.mark.parametrize("alpha,slope,tol", [(0.75, 4 / 3, 0.07), (2.0, 1.0, 0.05), (0.5, 2.0, 0.05)])
def test_homogeneous_exponent(alpha, slope, tol):
    law = RenewalLaw(alpha)
    t = np.logspace(-4, -2, 20)
    f = [homogeneous_f(law, x) for x in t]
    fit = np.polyfit(np.log(t), np.log(f), 1)[0]
    assert abs(fit - slope) <= tol * slope


def test_beta_zero_matches_homogeneous():
    law = RenewalLaw(0.8)
    raw = []
    est = free_energy_mc(dis.standard_gaussian(), law, 0.0, 0.3, 0.0, 4096, 2, 1, raw=raw)
    exact = homogeneous_f(law, 0.3)
    assert est.std_error == 0.0
    # the finite-size bias is ~1/N and the half-length difference measures it
    assert abs(est.value - exact) <= 1.01 * est.systematic
    extrapolated = 2 * raw[0][2] / 4096 - raw[0][3] / 2048
    assert extrapolated == pytest.approx(exact, abs=1e-6)


def test_free_energy_workers_identical():
    args = (dis.standard_gaussian(), RenewalLaw(0.8), 0.5, 0.0, 0.1, 256, 40, 2024)
    a = free_energy_mc(*args, workers=1)
    b = free_energy_mc(*args, workers=4)
    assert a.to_json() == b.to_json()


def test_delocalized_estimate_shrinks_with_N():
    vals = [abs(free_energy_mc(dis.standard_gaussian(), RenewalLaw(0.8), 0.5, -1.0, 0.0, N, 16, 3).value)
            for N in (256, 1024, 4096)]
    assert vals[0] > vals[1] > vals[2]


def test_mc_argument_checks():
    with pytest.raises(ValueError):
        free_energy_mc(dis.standard_gaussian(), RenewalLaw(0.8), 0.5, 0.0, 0.0, 1000, 8, 0)
    with pytest.raises(ValueError):
        free_energy_mc(dis.standard_gaussian(), RenewalLaw(0.8), 0.5, 0.0, 0.0, 1024, 1, 0)


def test_replica_csv():
    raw = []
    free_energy_mc(dis.rademacher(), RenewalLaw(0.8), 0.5, 0.0, 0.0, 64, 3, 5, raw=raw)
    text = replica_csv(raw)
    lines = text.split("\r\n")
    assert lines[0] == "replica_index,seed,log_Z_N,log_Z_half_N"
    assert len(lines) == 5 and lines[-1] == ""


def test_gaussian_tilt_equals_shift_pathwise():
    # with a common seed the tilted draws are the untilted ones shifted by delta
    law = RenewalLaw(0.8)
    a = free_energy_mc(dis.standard_gaussian(), law, 0.5, -0.1, 0.3, 512, 8, 77)
    b = free_energy_mc(dis.standard_gaussian(), law, 0.5, 0.05, 0.0, 512, 8, 77)
    assert a.value == pytest.approx(b.value, abs=1e-12)


def test_critical_point_monotone_in_disorder():
    law = RenewalLaw(0.8)
    pure = critical_point(dis.standard_gaussian(), law, 0.0, 0.0, 1024, 16, 1, tol=2e-3)
    assert 0.0 <= pure < 0.1
    noisy = critical_point(dis.standard_gaussian(), law, 0.5, 0.0, 1024, 16, 1, tol=2e-3)
    assert noisy != pure
