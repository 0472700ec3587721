import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from rtnls.profiles import AnalyticProfile, Term, packet_profile, random_even_profile, random_profile

seeds = st.integers(0, 2 ** 32 - 1)


def _num(fn, lo=-40, hi=40):
    re = quad(lambda x: fn(x).real, lo, hi, limit=400, epsabs=1e-13)[0]
    im = quad(lambda x: fn(x).imag, lo, hi, limit=400, epsabs=1e-13)[0]
    return re + 1j * im


def test_term_validation():
    with pytest.raises(ValueError):
        Term(1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        Term(1.0, 1.0, 0.0, degree=1.5)


@given(seeds)
def test_flip_and_shift(seed):
    f = random_profile(np.random.default_rng(seed))
    p = np.linspace(-3, 3, 13)
    assert np.allclose(f.flipped()(p), f(-p), atol=1e-13)
    assert np.allclose(f.shifted(0.7)(p), f(p - 0.7), atol=1e-13)
    assert np.allclose(random_even_profile(np.random.default_rng(seed))(p),
                       random_even_profile(np.random.default_rng(seed))(-p), atol=1e-13)


@given(seeds)
def test_norm_closed_form(seed):
    f = random_profile(np.random.default_rng(seed))
    assert abs(f.l2_norm_sq() - _num(lambda p: abs(f(p)) ** 2).real) < 1e-9 * max(1, f.l2_norm_sq())


@pytest.mark.parametrize("t", [0.0, 0.4])
def test_fourier_and_free_evolution_against_quadrature(t):
    f = AnalyticProfile((Term(0.8 - 0.3j, 0.9, 0.4, 1), Term(0.5, 1.3, -0.6, 2)))
    for p in (-1.3, 0.0, 0.8):
        ref = _num(lambda x: f(x) * np.exp(-1j * p * x + 1j * p * p * t))
        assert abs(f.fourier(p, t) - ref) < 1e-9
    for x in (-1.0, 0.5, 2.0):
        ref = _num(lambda p: f(p) * np.exp(1j * p * x - 1j * p * p * t)) / (2 * np.pi)
        assert abs(f.free_evolve(t, x) - ref) < 1e-9
        h = 1e-5
        fd = (f.free_evolve(t, x + h) - f.free_evolve(t, x - h)) / (2 * h)
        assert abs(f.free_evolve_dx(t, x) - fd) < 1e-7


@given(seeds, st.floats(0.0, 3.0))
def test_free_evolution_keeps_norm(seed, t):
    f = random_profile(np.random.default_rng(seed), n_terms=1, max_degree=0)
    x, dx = np.linspace(-60, 60, 6001, retstep=True)
    n0 = np.sum(np.abs(f.free_evolve(0.0, x)) ** 2) * dx
    nt = np.sum(np.abs(f.free_evolve(t, x)) ** 2) * dx
    assert abs(nt - n0) < 1e-6 * n0
    assert abs(n0 - f.l2_norm_sq() / (2 * np.pi)) < 1e-6 * n0


def test_packet_support():
    f = packet_profile(1.0, 2.0)
    lo, hi = f.support()
    assert abs(lo - 1.0) < 1e-6 and abs(hi - 2.0) < 1e-6
    assert abs(f(1.0)) < 1.01e-14 and abs(f(0.5)) < 1e-14


def test_serialization_roundtrip(rng):
    f = random_profile(rng)
    g = AnalyticProfile.from_list(f.to_list())
    assert g == f
    assert AnalyticProfile.from_list([[2.0, 1.0, 0.5]])(0.5) == 2.0


@given(st.floats(-12, 3), st.floats(-1.5, 1), st.integers(0, 5), st.sampled_from([1e-14, 1e-6]))
def test_term_radius_is_the_tail_edge(log_amp, log_w, d, tol):
    t = Term(complex(10 ** log_amp), 10 ** log_w, 0.0, d)
    r = t.radius(tol)
    f = lambda s: abs(t.amp) * s ** d * np.exp(-(s / t.width) ** 2)
    s = np.linspace(r, r + 10 * t.width, 200)
    assert np.all(f(s) <= tol * (1 + 1e-9))
    if r > t.width * np.sqrt(d / 2) + 1e-12:
        assert abs(f(r) - tol) < 1e-8 * tol
