import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothlab.errors import BracketNotFound, QuadratureFailure
from smoothlab.numerics import adaptive_simpson, bisect_increasing, bisect_predicate


def test_simpson_polynomial_exact():
    # Simpson is exact for cubics
    val = adaptive_simpson(lambda x: 4 * x**3 - 2 * x + 1, -1.0, 2.0)
    assert val == pytest.approx(15.0 - 3.0 + 3.0, abs=1e-12)


def test_simpson_smooth_against_closed_form():
    assert adaptive_simpson(np.exp, 0.0, 1.0, rtol=1e-10) == pytest.approx(math.e - 1, rel=1e-10)
    assert adaptive_simpson(np.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-8)


def test_simpson_vector_valued():
    out = adaptive_simpson(lambda x: np.array([x, x * x]), 0.0, 3.0)
    assert out == pytest.approx([4.5, 9.0], rel=1e-10)


def test_simpson_empty_interval():
    assert adaptive_simpson(np.exp, 1.0, 1.0) == 0.0


def test_simpson_reports_failure():
    with pytest.raises(QuadratureFailure):
        adaptive_simpson(lambda x: np.sign(x - 1 / 3) * 1e3, 0.0, 1.0, rtol=1e-14, atol=0.0, max_depth=8)


def test_bisection_root():
    root = bisect_increasing(lambda x: x**3, 2.0, 0.0, 2.0)
    assert root == pytest.approx(2 ** (1 / 3), abs=1e-10)


def test_bisection_needs_bracket():
    with pytest.raises(BracketNotFound):
        bisect_increasing(lambda x: x, 5.0, 0.0, 1.0)


@given(st.floats(0.01, 100.0))
def test_bisection_inverts_log(y):
    x = bisect_increasing(math.log, math.log(y), 1e-3, 200.0, xtol=1e-12)
    assert x == pytest.approx(y, abs=1e-10)


def test_predicate_bisection():
    assert bisect_predicate(lambda x: x > 0.3, 0.0, 1.0, 1e-6) == pytest.approx(0.3, abs=1e-6)
