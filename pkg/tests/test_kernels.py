import numpy as np
import pytest
from hypothesis import given, strategies as st

from rtnls.kernels import (MINUS, PLUS, ModelParams, b_alpha, bulk_S, bulk_S_matrix, check_label,
                           defect_TR, unitarity_residual, verify_kernel_identities, ybe_residual)

momenta = st.floats(-50, 50, allow_nan=False)
couplings = st.one_of(st.just(0.0), st.floats(1e-3, 5.0))


def test_values_at_unit_momentum():
    # hand-evaluated: S(1) = (1-i)/(1+i) = -i, T(1) = 1/(1+i), R(1) = -i/(1+i)
    par = ModelParams(1.0, 1.0)
    assert abs(bulk_S(1.0, par) + 1j) < 1e-15
    T, R = defect_TR(1.0, par)
    assert abs(T - (1 - 1j) / 2) < 1e-15
    assert abs(R - (-1 - 1j) / 2) < 1e-15
    assert abs(b_alpha(1.0, PLUS, par) + 1j) < 1e-15


def test_free_limits():
    par = ModelParams(0.0, 0.0)
    p = np.linspace(-3, 3, 7)
    assert np.all(bulk_S(p, par) == 1)
    T, R = defect_TR(p, par)
    assert np.all(T == 1) and np.all(R == 0)


@pytest.mark.parametrize("g,eta", [(-0.1, 1.0), (1.0, -1.0), (np.nan, 1.0), (1.0, np.inf)])
def test_rejects_bad_params(g, eta):
    with pytest.raises(ValueError):
        ModelParams(g, eta)


@pytest.mark.parametrize("bad", [0, 2, "+", 0.5])
def test_rejects_bad_label(bad):
    with pytest.raises(ValueError):
        check_label(bad)


@given(momenta, couplings)
def test_s_unitarity(p, g):
    par = ModelParams(g, 1.0)
    assert abs(bulk_S(p, par) * bulk_S(-p, par) - 1) < 1e-12
    assert abs(abs(bulk_S(p, par)) - 1) < 1e-12


@given(momenta, couplings)
def test_defect_unitarity(p, eta):
    par = ModelParams(0.5, eta)
    T, R = defect_TR(p, par)
    Tm, Rm = defect_TR(-p, par)
    assert abs(T * Tm + R * Rm - 1) < 1e-12
    assert abs(T * Rm + R * Tm) < 1e-12
    # hermitian analyticity: conj(T(p)) = T(-p)
    assert abs(np.conj(T) - Tm) < 1e-12


@given(momenta, couplings)
def test_b_alpha(p, eta):
    par = ModelParams(0.5, eta)
    assert abs(b_alpha(p, MINUS, par) + 1) == 0
    if p != 0 or eta > 0:
        assert abs(b_alpha(p, PLUS, par) * b_alpha(-p, PLUS, par) - 1) < 1e-12


@given(momenta, momenta, momenta, couplings)
def test_matrix_identities(p1, p2, p3, g):
    par = ModelParams(g, 1.0)
    assert unitarity_residual(p1, p2, par) < 1e-12
    assert ybe_residual(p1, p2, p3, par) < 1e-12


def test_ybe_at_fixed_triple():
    assert ybe_residual(1.0, 2.0, 3.0, ModelParams(1.0, 1.0)) < 1e-12


def test_s_matrix_is_diagonal():
    m = bulk_S_matrix(0.3, -1.1, ModelParams(0.7, 1.0))
    assert m.shape == (4, 4)
    assert np.allclose(m - np.diag(np.diag(m)), 0)


def test_identity_report_on_random_sample(rng):
    rep = verify_kernel_identities(ModelParams(1.0, 1.0), rng.uniform(-5, 5, 100))
    assert rep.n_samples == 100
    assert rep.max_residual() < 1e-12
    assert [k for k, _ in rep.as_rows()][0] == "s_unitarity"


def test_identity_report_needs_samples():
    with pytest.raises(ValueError):
        verify_kernel_identities(ModelParams(1.0, 1.0), [])
