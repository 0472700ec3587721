import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rtnls.fock import (FieldQuadrature, FockElement, FockSpace, GridMismatch, NParticleState,
                        SmearProfile, annihilate, boundary_residuals, check_ordered, create, defect_apply,
                        defect_smeared, dominates, field_apply, group_average_projector, inner_product,
                        project, tilde_create, word_vev)
from rtnls.kernels import ModelParams, defect_TR
from rtnls.numerics import MomentumGrid
from rtnls.profiles import AnalyticProfile, random_profile

PAR = ModelParams(0.7, 1.3)


def space(M=21, P=6.0, params=PAR, max_n=3):
    return FockSpace(MomentumGrid(P, M), params, max_n)


def rsmear(rng):
    return SmearProfile(random_profile(rng, center=(-2.0, 2.0)), random_profile(rng, center=(-2.0, 2.0)))


def rstate(sp, n, rng):
    st_ = sp.vacuum()
    for _ in range(n):
        st_ = create(st_, rsmear(rng))
    return st_.scaled(1.0 / st_.norm())


def test_vacuum():
    sp = space()
    om = sp.vacuum()
    assert inner_product(om, om) == 1
    assert annihilate(om, rsmear(np.random.default_rng(0))).comps == {}


def test_one_particle_creation_formula():
    sp = space(M=31)
    f = rsmear(np.random.default_rng(1))
    got = create(sp.vacuum(), f).comps[1]
    p = sp.grid.p
    fp, fm = f.momentum_values(p)
    T, R = defect_TR(p, PAR)
    Tm, Rm = defect_TR(-p, PAR)
    want = 0.5 * np.array([fp + T * fm + R * fp[::-1], fm + Tm * fp + Rm * fm[::-1]])
    assert np.allclose(got, want, atol=1e-14)


@settings(max_examples=6)
@given(st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_created_states_satisfy_exchange_properties(n, seed):
    comp = rstate(space(), n, np.random.default_rng(seed)).component(n)
    assert comp.rt_residual() < 1e-10 and comp.s_residual() < 1e-10


@settings(max_examples=10)
@given(st.integers(0, 2), st.integers(0, 2 ** 32 - 1))
def test_adjoint_and_creation_bound(n, seed):
    rng = np.random.default_rng(seed)
    sp = space()
    phi, psi, f = rstate(sp, n, rng), rstate(sp, n + 1, rng), rsmear(rng)
    fn = np.sqrt(np.sum(sp.weights * np.abs(f.momentum_values(sp.grid.p)) ** 2))
    up = create(phi, f)
    assert abs(inner_product(phi, annihilate(psi, f)) - inner_product(up, psi)) < 1e-10 * fn
    assert up.norm() <= np.sqrt(n + 1) * fn * (1 + 1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_projector_matches_group_average(n):
    sp = space(M=7, P=3.0)
    rng = np.random.default_rng(n)
    U = rng.normal(size=sp.shape(n)) + 1j * rng.normal(size=sp.shape(n))
    Pu = project(sp, U, n)
    assert np.allclose(Pu, group_average_projector(sp, U, n), atol=1e-12)
    assert np.allclose(project(sp, Pu, n), Pu, atol=1e-12)


def test_projector_is_self_adjoint():
    sp = space(M=9, P=3.0)
    rng = np.random.default_rng(3)
    U, V = (rng.normal(size=sp.shape(2)) + 1j * rng.normal(size=sp.shape(2)) for _ in range(2))
    a = inner_product(FockElement(sp, {2: project(sp, U, 2)}), FockElement(sp, {2: V}))
    b = inner_product(FockElement(sp, {2: U}), FockElement(sp, {2: project(sp, V, 2)}))
    assert abs(a - b) < 1e-12 * abs(a)


def test_defect_action_on_vacuum_and_mixed_relation():
    sp = space(M=31)
    om = sp.vacuum()
    T, R = defect_TR(np.array(0.8), PAR)
    assert abs(defect_apply(om, "reflect", 0.8).comps[0] - R) < 1e-15
    assert abs(defect_apply(om, "transmit", 0.8).comps[0] - T) < 1e-15
    # word evaluator agrees with composing the operators by hand
    rng = np.random.default_rng(4)
    f, w = rsmear(rng), random_profile(rng)
    lhs = word_vev(sp, [("a", (f.plus, f.minus)), ("r", w), ("ad", (f.plus, f.minus))])
    st_ = defect_smeared(create(om, f), "reflect", w)
    rhs = inner_product(create(om, f), st_)
    assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))
    with pytest.raises(ValueError):
        defect_apply(om, "bounce", 0.1)


def test_particle_number_bound():
    sp = space(max_n=1)
    st_ = create(sp.vacuum(), rsmear(np.random.default_rng(5)))
    with pytest.raises(ValueError):
        create(st_, rsmear(np.random.default_rng(6)))


def test_snapshot_roundtrip_and_grid_mismatch():
    sp = space()
    comp = rstate(sp, 2, np.random.default_rng(7)).component(2)
    rec = json.loads(json.dumps(comp.to_dict()))
    back = NParticleState.from_dict(sp, rec)
    assert np.array_equal(back.data, comp.data)
    with pytest.raises(GridMismatch):
        NParticleState.from_dict(space(M=23), rec)
    with pytest.raises(GridMismatch):
        inner_product(sp.vacuum(), space(M=23).vacuum())


# --- smeared field -----------------------------------------------------------

def pos(c, w=1.0, amp=1.0, al=1):
    return SmearProfile.single(al, AnalyticProfile.gaussian(amp, w, c), "position")


def test_time_smeared_creator_keeps_norm():
    sp = space(M=61, P=6.0)
    f = pos(3.0)
    n0 = tilde_create(sp.vacuum(), 0.0, f).norm()
    for t in (0.3, 1.0):
        assert abs(tilde_create(sp.vacuum(), t, f).norm() - n0) < 1e-12 * n0
    with pytest.raises(ValueError):
        tilde_create(sp.vacuum(), 0.0, SmearProfile.single(1, AnalyticProfile.gaussian(1, 1, 0)))


def test_field_on_vacuum():
    sp = space(M=41)
    f = pos(2.0)
    om = sp.vacuum()
    assert field_apply(om, 0.2, f).comps == {}
    d = field_apply(om, 0.2, f, dagger=True) - tilde_create(om, 0.2, f)
    assert d.norm() < 1e-14


def test_field_rejects_three_particles():
    sp = space(M=9, P=3.0)
    st_ = rstate(sp, 3, np.random.default_rng(8))
    with pytest.raises(ValueError):
        field_apply(st_, 0.0, pos(1.0))


@pytest.mark.parametrize("t", [0.0, 0.4])
def test_smeared_two_particle_correlator(t):
    # ordered families pair slot by slot
    sp = space(M=141, P=6.0, params=ModelParams(2.0, 2.0))
    f1, f2 = pos(12.0, 1.0, 1.0), pos(4.0, 1.0, 0.5)
    h1, h2 = pos(12.2, 1.0, 0.8 + 0.1j), pos(4.1, 0.9, 1.0)
    check_ordered([f1, f2], tol=1e-6)
    check_ordered([h1, h2], tol=1e-6)
    om = sp.vacuum()
    lhs = inner_product(tilde_create(tilde_create(om, t, f2), t, f1),
                        tilde_create(tilde_create(om, t, h2), t, h1))
    assert abs(lhs - f1.inner(h1) * f2.inner(h2)) < 1e-8


def test_exchange_lemma_on_two_particles():
    sp = space(M=141, P=6.0, params=ModelParams(2.0, 2.0))
    quad = FieldQuadrature(s_max=30.0)
    f, h1, h2 = pos(4.0), pos(20.0), pos(12.0)
    check_ordered([h1, h2, f], tol=1e-6)
    om = sp.vacuum()
    psi2 = tilde_create(tilde_create(om, 0.0, h2), 0.0, h1)
    lhs = field_apply(psi2, 0.0, f, quad=quad)
    rhs = tilde_create(om, 0.0, h2).scaled(f.inner(h1)) + tilde_create(om, 0.0, h1).scaled(f.inner(h2))
    assert (lhs - rhs).norm() < 1e-7


def test_ordering_predicate():
    assert dominates(pos(20.0), pos(4.0), tol=1e-6)
    assert not dominates(pos(4.0), pos(4.2), tol=1e-6)
    with pytest.raises(ValueError):
        check_ordered([pos(4.0), pos(4.2)], tol=1e-6)


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_one_particle_boundary_conditions(t):
    sp = space(M=41, P=8.0)
    chi = create(sp.vacuum(), rsmear(np.random.default_rng(9))).component(1)
    cont, jump = boundary_residuals(chi, t)
    assert cont < 1e-7 and jump < 1e-7


def test_measure_reproduces_delta_normalization():
    # <a+(f) Omega, a+(f) Omega> = int dp/2pi conj(f) (1 + T-map) f on the grid
    sp = space(M=41)
    f = rsmear(np.random.default_rng(10))
    st_ = create(sp.vacuum(), f)
    fv = f.momentum_values(sp.grid.p)
    direct = np.sum(sp.grid.w * np.conj(fv) * 2 * st_.comps[1]) / (2 * np.pi)
    assert abs(inner_product(st_, st_) - direct) < 1e-12
