import numpy as np
import pytest
from hypothesis import given, strategies as st

from rtnls.numerics import MomentumGrid, consistency_ratio, gauss_panels, richardson, symmetric_grid


@given(st.integers(0, 9))
def test_gauss_panels_exact_on_polynomials(d):
    x, w = gauss_panels(-1.0, 2.0, 3, 6)
    exact = (2.0 ** (d + 1) - (-1.0) ** (d + 1)) / (d + 1)
    assert abs(np.sum(w * x ** d) - exact) < 1e-12


@given(st.floats(0.5, 20), st.integers(1, 200))
def test_symmetric_grid_is_mirror_exact(P, half):
    p, dp = symmetric_grid(P, 2 * half + 1)
    assert np.array_equal(p, -p[::-1])
    assert p[half] == 0.0
    assert abs(dp - 2 * P / (2 * half)) < 1e-14


def test_symmetric_grid_rejects_even():
    with pytest.raises(ValueError):
        symmetric_grid(1.0, 10)


def test_trapezoid_weights():
    g = MomentumGrid(3.0, 61)
    assert abs(g.w.sum() - 6.0) < 1e-12
    assert abs(np.sum(g.w * np.exp(-g.p ** 2)) - np.sqrt(np.pi)) < 1e-3
    assert g == MomentumGrid(3.0, 61) and hash(g) == hash(MomentumGrid(3.0, 61))


def test_richardson_removes_leading_orders():
    f = lambda h: 1.0 + 0.3 * h + 0.7 * h ** 2
    best, spread = richardson([f(0.4), f(0.2), f(0.1)], 2.0, order=1)
    assert abs(best - 1.0) < 1e-13
    ratio = consistency_ratio([f(0.4), f(0.2), f(0.1)])
    assert 2.0 < ratio < 3.0
