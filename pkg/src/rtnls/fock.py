"""Discretized Fock representation of the RT algebra.

An n-particle component is a complex array of shape (2,)*n + (M,)*n:
label axes first (index 0 is alpha=+1, index 1 is alpha=-1), then momentum
axes on a symmetric grid, so p -> -p is an index reversal.  The measure on
each one-particle slot is dp/pi (see `MEASURE`), the weight under which the
projector realization reproduces the 2 pi delta normalization of the
algebra, <Omega, a(h) a+(g) Omega> = int dp/2pi h^bar (1 + T-map) g.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, sqrt
from typing import Callable

import numpy as np

from .kernels import ModelParams, bulk_S, defect_TR
from .numerics import MomentumGrid
from .profiles import AnalyticProfile

LAB = np.array([1.0, -1.0])
MEASURE = 1.0 / np.pi


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FockSpace:
    grid: MomentumGrid
    params: ModelParams
    max_n: int = 3

    @property
    def M(self):
        return self.grid.M

    @property
    def weights(self):
        """One-slot measure weights (dp/pi trapezoid)."""
        return self.grid.w * MEASURE

    def shape(self, n):
        return (2,) * n + (self.M,) * n

    # broadcast helpers ------------------------------------------------------
    def x_slot(self, n, k):
        """alpha_k p_k broadcast to the n-particle layout."""
        s = [1] * (2 * n)
        s[k] = 2
        lab = LAB.reshape(s)
        s = [1] * (2 * n)
        s[n + k] = self.M
        return lab * self.grid.p.reshape(s)

    def p_slot(self, n, k):
        s = [1] * (2 * n)
        s[n + k] = self.M
        return self.grid.p.reshape(s)

    def S(self, x):
        return bulk_S(x, self.params)

    def TR(self, x):
        return defect_TR(x, self.params)

    def vacuum(self):
        return FockElement(self, {0: np.array(1.0 + 0j)})

    def zero(self):
        return FockElement(self, {})

    def check(self, other):
        if other.space.grid != self.grid or other.space.params != self.params:
            raise GridMismatch("states live on different grids or models")


# --- maps defining the n-particle subspace ----------------------------------

def rt_map(space: FockSpace, data, n, k):
    """T(a_k p_k) phi[.., -a_k, ..](.., p_k, ..) + R(a_k p_k) phi[.., a_k, ..](.., -p_k, ..)."""
    T, R = space.TR(space.x_slot(n, k))
    return T * np.flip(data, axis=k) + R * np.flip(data, axis=n + k)


def swap_map(space: FockSpace, data, n, i):
    """S(a_i p_i - a_j p_j) phi with slots i and j = i+1 exchanged."""
    perm = list(range(2 * n))
    perm[i], perm[i + 1] = perm[i + 1], perm[i]
    perm[n + i], perm[n + i + 1] = perm[n + i + 1], perm[n + i]
    return space.S(space.x_slot(n, i) - space.x_slot(n, i + 1)) * np.transpose(data, perm)


def _move_first_to(n, k, first=0):
    """Axis permutation putting slot `first` at slot k, shifting slots first+1..k left."""
    order = list(range(n))
    slot = order.pop(first)
    order.insert(k, slot)
    return order + [n + j for j in order]


def _factors(space, n, first, k):
    """Pairwise factor lists for insertion point k: (S-string, C_k)."""
    xs = [space.x_slot(n, j) for j in range(n)]
    s_str = [space.S(xs[j] - xs[k]) for j in range(first, k)]
    C = []
    for j in range(first, n):
        if j != k:
            C += [space.S(xs[k] - xs[j]), space.S(xs[j] + xs[k])]
    return xs[k], s_str, C


def _prod(arrs, sl=None):
    out = 1.0
    for a in arrs:
        out = out * (a if sl is None or a.shape[-1] == 1 else a[..., sl])
    return out


def project_step(space: FockSpace, W, n, first=0):
    """Orthogonal projection of W in L (x) H^(n-1) onto H^(n).

    The slots first..n-1 are projected, earlier slots are spectators.  Slot
    `first` carries the new particle, the remaining slots are assumed to lie
    in H^(n-1-first) already.  This is the explicit Weyl-group coset sum:
    sum over the insertion point k of an S-string times
    (W + C_k * T-map_k W), divided by 2 m with m = n - first.
    For n >= 3 the sum is taken slice by slice in the last momentum, so the
    pairwise factors are never broadcast to the full tensor.
    """
    m = n - first
    if n < 3:
        out = np.zeros_like(W)
        for k in range(first, n):
            V = np.transpose(W, _move_first_to(n, k, first))
            _, s_str, C = _factors(space, n, first, k)
            out = out + _prod(s_str) * (V + _prod(C) * rt_map(space, V, n, k))
        return out / (2 * m)
    M = space.M
    out = np.zeros_like(W)
    parts = []
    for k in range(first, n):
        xk, s_str, C = _factors(space, n, first, k)
        T, R = space.TR(xk)
        parts.append((k, np.transpose(W, _move_first_to(n, k, first)), s_str, C, T, R))
    for i in range(M):
        sl = slice(i, i + 1)
        acc = 0.0
        for k, V, s_str, C, T, R in parts:
            Vi = V[..., sl]
            if k == n - 1:
                Vr = V[..., M - 1 - i:M - i]
            else:
                Vr = np.flip(Vi, axis=n + k)
            tmap = _prod([T], sl) * np.flip(Vi, axis=k) + _prod([R], sl) * Vr
            acc = acc + _prod(s_str, sl) * (Vi + _prod(C, sl) * tmap)
        out[..., sl] = acc
    return out / (2 * m)


def project(space: FockSpace, U, n):
    """Projector onto H^(n) for an arbitrary tensor in L^(x)n."""
    out = U
    for first in range(n - 1, -1, -1):
        out = project_step(space, out, n, first)
    return out


def group_average_projector(space: FockSpace, U, n):
    """Brute-force average over the signed-permutation group generated by the maps.

    Only used as an oracle for `project` (2^n n! elements).
    """
    gens = [lambda d, i=i: swap_map(space, d, n, i) for i in range(n - 1)]
    gens.append(lambda d: rt_map(space, d, n, n - 1))
    # breadth-first enumeration of group elements via their action on a probe
    probe = np.random.default_rng(7).normal(size=space.shape(n)) + 0j
    seen = [(probe, U)]
    frontier = [(probe, U)]
    order = 2 ** n * factorial(n)
    while frontier and len(seen) < order:
        nxt = []
        for pr, u in frontier:
            for g in gens:
                q = g(pr)
                if not any(np.allclose(q, s, atol=1e-9) for s, _ in seen):
                    seen.append((q, g(u)))
                    nxt.append((q, g(u)))
        frontier = nxt
    return sum(u for _, u in seen) / len(seen)


# --- states ------------------------------------------------------------------

@dataclass(frozen=True)
class NParticleState:
    space: FockSpace
    n: int
    data: np.ndarray

    def rt_residual(self):
        if self.n == 0:
            return 0.0
        return float(np.max(np.abs(self.data - rt_map(self.space, self.data, self.n, self.n - 1))))

    def s_residual(self):
        res = 0.0
        for i in range(self.n - 1):
            res = max(res, float(np.max(np.abs(self.data - swap_map(self.space, self.data, self.n, i)))))
        return res

    def norm_sq(self):
        return float(np.real(_dot(self.space, self.data, self.data, self.n)))

    def to_dict(self):
        d = np.asarray(self.data)
        return {"n": self.n, "grid": [self.space.grid.P, self.space.grid.M],
                "re": d.real.ravel().tolist(), "im": d.imag.ravel().tolist()}

    @classmethod
    def from_dict(cls, space, rec):
        if tuple(rec["grid"]) != (space.grid.P, space.grid.M):
            raise GridMismatch("snapshot grid differs from the space grid")
        n = rec["n"]
        data = (np.array(rec["re"]) + 1j * np.array(rec["im"])).reshape(space.shape(n))
        return cls(space, n, data)


def _dot(space, u, v, n):
    if n == 0:
        return complex(np.conj(u) * v)
    w = space.weights
    prod = np.conj(u) * v
    prod = prod.sum(axis=tuple(range(n)))
    for _ in range(n):
        prod = prod @ w if prod.ndim == 1 else np.tensordot(prod, w, axes=([prod.ndim - 1], [0]))
    return complex(prod)


class FockElement:
    """Finite particle vector: dict n -> component array (absent means zero)."""

    def __init__(self, space: FockSpace, comps: dict):
        self.space = space
        self.comps = {int(n): np.asarray(d, dtype=complex) for n, d in comps.items()}
        for n, d in self.comps.items():
            if n > space.max_n:
                raise ValueError(f"particle number {n} exceeds the supported bound {space.max_n}")
            if d.shape != space.shape(n):
                raise ValueError(f"component {n} has shape {d.shape}, expected {space.shape(n)}")

    def component(self, n):
        return NParticleState(self.space, n, self.comps.get(n, np.zeros(self.space.shape(n), complex)))

    @property
    def max_particles(self):
        return max(self.comps, default=-1)

    def __add__(self, other):
        self.space.check(other)
        comps = dict(self.comps)
        for n, d in other.comps.items():
            comps[n] = comps[n] + d if n in comps else d
        return FockElement(self.space, comps)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, c):
        return FockElement(self.space, {n: c * d for n, d in self.comps.items()})

    def norm(self):
        return sqrt(max(inner_product(self, self).real, 0.0))

    def max_residuals(self):
        rt = max((self.component(n).rt_residual() for n in self.comps), default=0.0)
        sp = max((self.component(n).s_residual() for n in self.comps), default=0.0)
        return rt, sp


def inner_product(phi: FockElement, psi: FockElement) -> complex:
    phi.space.check(psi)
    tot = 0j
    for n, u in phi.comps.items():
        if n in psi.comps:
            tot += _dot(phi.space, u, psi.comps[n], n)
    return tot


# --- smearing functions ------------------------------------------------------

@dataclass(frozen=True)
class SmearProfile:
    """Pair (f_+, f_-) of analytic profiles.

    kind "momentum": f_alpha(p) directly; kind "position": f_alpha(x), used
    through its transform int dx f(x) exp(-ipx + ip^2 t).
    """
    plus: AnalyticProfile = field(default_factory=AnalyticProfile.zero)
    minus: AnalyticProfile = field(default_factory=AnalyticProfile.zero)
    kind: str = "momentum"

    def __post_init__(self):
        if self.kind not in ("momentum", "position"):
            raise ValueError("profile kind must be 'momentum' or 'position'")

    @classmethod
    def single(cls, alpha, prof, kind="momentum"):
        z = AnalyticProfile.zero()
        return cls(prof, z, kind) if alpha > 0 else cls(z, prof, kind)

    def component(self, alpha):
        return self.plus if alpha > 0 else self.minus

    def momentum_values(self, p, t=0.0):
        """(2, M) array of momentum-space values at time t."""
        out = []
        for prof in (self.plus, self.minus):
            if self.kind == "momentum":
                out.append(prof(p))
            else:
                out.append(prof.fourier(p, t))
        return np.array(out)

    def supports(self, tol=1e-14):
        return {al: self.component(al).support(tol) for al in (1, -1) if not self.component(al).is_zero()}

    def inner(self, other):
        """<f, h> in the profiles' own variable (int dx or int dp, no 2 pi)."""
        if self.kind != other.kind:
            raise ValueError("profiles of different kinds")
        tot = 0j
        for al in (1, -1):
            f, h = self.component(al), other.component(al)
            tot += _profile_overlap(f, h)
        return tot


def _profile_overlap(f, h):
    from .profiles import _overlap
    return sum(_overlap(t1, t2) for t1 in f.terms for t2 in h.terms)


def dominates(f: SmearProfile, h: SmearProfile, margin=0.0, tol=1e-14):
    """f > h in the support-modulus ordering: every |x| in supp f exceeds every |x| in supp h."""
    fs, hs = f.supports(tol), h.supports(tol)
    if not fs or not hs:
        return True
    lo_f = min(min(abs(a), abs(b)) if a * b > 0 else 0.0 for a, b in fs.values())
    hi_h = max(max(abs(a), abs(b)) for a, b in hs.values())
    return lo_f > hi_h + margin


def check_ordered(profiles, margin=0.0, tol=1e-14):
    for f, h in zip(profiles[:-1], profiles[1:]):
        if not dominates(f, h, margin, tol):
            raise ValueError("smearing functions violate the required support ordering")


# --- bulk operators ----------------------------------------------------------

def _values(space, f, t=0.0):
    if isinstance(f, SmearProfile):
        return f.momentum_values(space.grid.p, t)
    f = np.asarray(f, dtype=complex)
    if f.shape != (2, space.M):
        raise ValueError("raw smearing data must have shape (2, M)")
    return f


def create(phi: FockElement, f, t=0.0) -> FockElement:
    """a+(f) phi, component-wise sqrt(n) P^(n) (f (x) phi^(n-1))."""
    space = phi.space
    fv = _values(space, f, t)
    out = {}
    for n, d in phi.comps.items():
        m = n + 1
        if m > space.max_n:
            raise ValueError(f"creation would exceed the supported particle number {space.max_n}")
        W = np.multiply.outer(fv, d) if n else fv * d
        # outer product puts f's label and momentum axes first; reorder to (labels, momenta)
        if n:
            perm = [0] + [2 + j for j in range(n)] + [1] + [2 + n + j for j in range(n)]
            W = np.transpose(W, perm)
        out[m] = sqrt(m) * project_step(space, W, m, 0)
    return FockElement(space, out)


def tilde_create(phi: FockElement, t, f: SmearProfile) -> FockElement:
    """Time-smeared creator with momentum profile int dx f(x) exp(-ipx + ip^2 t)."""
    if f.kind != "position":
        raise ValueError("tilde_create expects a position-space profile")
    return create(phi, f, t)


def annihilate(phi: FockElement, f, t=0.0) -> FockElement:
    """a(f) phi: sqrt(n) * contraction of conj(f) with the first slot."""
    space = phi.space
    fv = np.conj(_values(space, f, t)) * space.weights
    out = {}
    for n, d in phi.comps.items():
        if n == 0:
            continue
        red = np.tensordot(fv, d, axes=([0, 1], [0, n]))
        out[n - 1] = sqrt(n) * red
    return FockElement(space, out)


def defect_factor(space: FockSpace, n, which, p):
    """S-string * R-or-T(p) * S-string of the multiplicative defect action."""
    T, R = space.TR(np.asarray(p, dtype=float))
    val = R if which == "reflect" else T
    if which not in ("reflect", "transmit"):
        raise ValueError("which must be 'reflect' or 'transmit'")
    fac = val
    for j in range(n):
        xj = space.x_slot(n, j)
        fac = fac * space.S(p - xj) * space.S(xj + p)
    return fac


def defect_apply(phi: FockElement, which, p) -> FockElement:
    space = phi.space
    return FockElement(space, {n: defect_factor(space, n, which, p) * d for n, d in phi.comps.items()})


def defect_smeared(phi: FockElement, which, w: Callable) -> FockElement:
    """int dp/2pi w(p) r(p) phi (or t), on the grid."""
    space = phi.space
    p, wt = space.grid.p, space.grid.w / (2 * np.pi)
    wv = w(p)
    out = {}
    for n, d in phi.comps.items():
        acc = np.zeros_like(d)
        for j in range(space.M):
            if wv[j] != 0:
                acc = acc + (wt[j] * wv[j]) * defect_factor(space, n, which, p[j]) * d
        out[n] = acc
    return FockElement(space, out)


def word_vev(space: FockSpace, word) -> complex:
    """<Omega, X_1 ... X_k Omega> computed by acting on the vacuum, right to left.

    Same word convention as `rt_symbolic.smeared_word_vev`.
    """
    p = space.grid.p
    state = space.vacuum()
    kinds = [k for k, _ in word]
    for i in range(len(word) - 1, -1, -1):
        kind, smear = word[i]
        # components that the remaining annihilators cannot bring back to n=0 drop out
        budget = kinds[:i].count("a") + (kind == "a") - (kind == "ad")
        state = FockElement(space, {n: d for n, d in state.comps.items() if n <= budget})
        if kind in ("a", "ad"):
            fv = np.array([smear[0](p), smear[1](p)], dtype=complex)
            if kind == "a":
                # a(f) = int dp/2pi conj(f) a(p); a(p) acts with weight 2 / (dp/pi)
                state = annihilate(state, fv)
            else:
                state = create(state, fv)
        elif kind in ("r", "t"):
            state = defect_smeared(state, "reflect" if kind == "r" else "transmit", smear)
        else:
            raise ValueError(f"unknown generator kind {kind!r}")
        if not state.comps:
            return 0j
    return complex(state.comps.get(0, 0j))


# --- quantum field -----------------------------------------------------------

@dataclass(frozen=True)
class FieldQuadrature:
    """Laplace-variable cutoff for the field kernels.

    1/(p - q - i al eps) = i al int_0^inf du exp(-i al (p - q) u - eps u); the u
    integrals are done in closed form on [0, s_max].  eps = 0 is the exact
    limit; the cutoff error is the tail of the state's position profile
    beyond s_max, which decays like exp(-min(g, eta) s) or faster.
    """
    s_max: float = 14.0
    eps: float = 0.0

    def __post_init__(self):
        if not self.s_max > 0 or self.eps < 0:
            raise ValueError("need s_max > 0 and eps >= 0")


def _z(alpha, kappa, quad):
    return 1j * alpha * kappa + quad.eps


def _A(alpha, kappa, quad):
    """int_0^s exp(-z u) du."""
    z = _z(alpha, kappa, quad)
    s = quad.s_max
    small = np.abs(z) * s < 1e-8
    zs = np.where(small, 1.0, z)
    return np.where(small, s, -np.expm1(-zs * s) / zs)


def _A1(alpha, kappa, quad):
    """int_0^s u exp(-z u) du."""
    z = _z(alpha, kappa, quad)
    s = quad.s_max
    small = np.abs(z) * s < 1e-4
    zs = np.where(small, 1.0, z)
    full = (1 - np.exp(-zs * s) * (1 + zs * s)) / zs ** 2
    return np.where(small, s * s / 2 - z * s ** 3 / 3, full)


def _B(alpha, k0, k1, q, quad):
    """Triangle kernel int_{u1+u2<=s} exp(-z(k0-q) u1 - z(k1-q) u2); broadcasts."""
    same = k0 == k1
    dk = np.where(same, 1.0, k1 - k0)
    gen = (_A(alpha, k0 - q, quad) - _A(alpha, k1 - q, quad)) / (1j * alpha * dk)
    return np.where(same, _A1(alpha, k0 - q, quad), gen)


def _position_component(f: SmearProfile, alpha):
    prof = f.component(alpha)
    return None if prof.is_zero() else prof


def _embed(space, n, alpha_slots, block):
    """Put a label-alpha block into the full n-particle layout."""
    out = np.zeros(space.shape(n), dtype=complex)
    idx = tuple(0 if a > 0 else 1 for a in alpha_slots) + (Ellipsis,)
    out[idx] = block
    return out


def _check_field_input(phi, dagger):
    top = phi.max_particles
    if top > 2:
        raise ValueError("field_apply supports states with at most 2 particles")


def field_apply(phi: FockElement, t, f: SmearProfile, dagger=False, quad: FieldQuadrature = None) -> FockElement:
    """Phi(t, f) phi or Phi+(t, f) phi as a finite sum of Rosales orders.

    Phi(t,f) = sum_al int dx conj(f_al(x)) Phi_al(t,x), Phi+(t,f) its adjoint.
    On at most 2 particles the orders that can contribute are 0, 1 (both)
    and 2 (Phi+ only); each is a closed-form u-kernel contracted on the grid.
    """
    if f.kind != "position":
        raise ValueError("the field is smeared with a position-space profile")
    quad = quad or FieldQuadrature()
    _check_field_input(phi, dagger)
    space = phi.space
    g = space.params.g
    p = space.grid.p
    w = space.weights
    out = create(phi, f, t) if dagger else annihilate(phi, f, t)
    comps = dict(out.comps)

    def add(n, data):
        comps[n] = comps[n] + data if n in comps else data

    for al in (1, -1):
        prof = _position_component(f, al)
        if prof is None:
            continue
        ai = 0 if al > 0 else 1
        if dagger:
            for n, d in phi.comps.items():
                if n >= 1:
                    add(n + 1, (-g) * _dagger_order1(space, d, n, al, ai, prof, t, quad))
                if n >= 2:
                    add(n + 1, g * g * _dagger_order2(space, d, al, ai, prof, t, quad))
        else:
            for n, d in phi.comps.items():
                if n >= 2:
                    add(n - 1, (-g) * _field_order1(space, d, n, al, ai, prof, t, quad))
    return FockElement(space, comps)


def _dagger_order1(space, d, n, al, ai, prof, t, quad):
    """(-1) * Phi+^(1) on n particles, before the (-g) weight: -n sqrt(n+1) P[U]."""
    p, w = space.grid.p, space.weights
    k0, k1, q = p[:, None, None], p[None, :, None], p[None, None, :]
    ker = (_B(al, k0, k1, q, quad) * prof.fourier(k0 + k1 - q)
           * np.exp(1j * (k0 ** 2 + k1 ** 2 - q ** 2) * t) * w[None, None, :])
    block = d[ai]                          # labels of the remaining slots, then q, rest
    # move q to the front of the momentum axes: block has shape (2,)*(n-1) + (M,)*n
    nb = n - 1
    block = np.moveaxis(block, nb, 0)     # (M_q, (2,)*(n-1), (M,)*(n-1))
    U = np.tensordot(ker, block, axes=([2], [0]))   # (M, M, (2,)*(n-1), (M,)*(n-1))
    # reorder to labels (al, al, rest labels), momenta (k0, k1, rest momenta)
    perm = list(range(2, 2 + nb)) + [0, 1] + list(range(2 + nb, 2 + 2 * nb))
    U = np.transpose(U, perm)
    full = np.zeros(space.shape(n + 1), dtype=complex)
    full[(ai, ai) + (Ellipsis,)] = U
    return -n * sqrt(n + 1) * project(space, full, n + 1)


def _dagger_order2(space, d, al, ai, prof, t, quad):
    """Phi+^(2) on 2 particles, before the g^2 weight: 2 sqrt(3) P[U]."""
    p, w = space.grid.p, space.weights
    M = space.M
    dp = space.grid.dp
    Wqp = d[ai, ai] * np.outer(w, w) * np.exp(-1j * (p[:, None] ** 2 + p[None, :] ** 2) * t)
    kk, qq = p[:, None], p[None, :]
    XA = _A(al, kk - qq, quad)
    XA1 = _A1(al, kk - qq, quad)
    j = np.arange(M)
    U = np.zeros((M, M, M), dtype=complex)
    qp = p[:, None] + p[None, :]
    for m in range(3 * M - 2):
        # triples (j0, j1, j2) with j0 + j1 + j2 = m
        j0, j1 = np.meshgrid(j, j, indexing="ij")
        j2 = m - j0 - j1
        ok = (j2 >= 0) & (j2 < M)
        if not ok.any():
            continue
        j0, j1, j2 = j0[ok], j1[ok], j2[ok]
        K = p[j0[0]] + p[j1[0]] + p[j2[0]]
        Z = Wqp * prof.fourier(K - qp)
        G = {}
        for xa, X in (("A", XA), ("A1", XA1)):
            XZ = X @ Z
            for ya, Y in (("A", XA), ("A1", XA1)):
                G[xa, ya] = XZ @ Y.T          # G[a, b] = sum X(a-q) Z(q,p) Y(b-p)
        e01 = j0 == j1
        e12 = j1 == j2
        ia = 1j * al
        d10 = np.where(e01, 1.0, ia * (p[j1] - p[j0]))
        d21 = np.where(e12, 1.0, ia * (p[j2] - p[j1]))
        gen = (G["A", "A"][j0, j1] - G["A", "A"][j0, j2] - G["A", "A"][j1, j1] + G["A", "A"][j1, j2]) / (d10 * d21)
        c01 = (G["A1", "A"][j0, j1] - G["A1", "A"][j0, j2]) / d21
        c12 = (G["A", "A1"][j0, j1] - G["A", "A1"][j1, j1]) / d10
        c012 = G["A1", "A1"][j0, j1]
        val = np.where(e01 & e12, c012, np.where(e01, c01, np.where(e12, c12, gen)))
        U[j0, j1, j2] = val
    U = U * np.exp(1j * (p[:, None, None] ** 2 + p[None, :, None] ** 2 + p[None, None, :] ** 2) * t)
    full = np.zeros(space.shape(3), dtype=complex)
    full[ai, ai, ai] = U
    return 2 * sqrt(3) * project(space, full, 3)


def _field_order1(space, d, n, al, ai, prof, t, quad):
    """(-1) * Phi^(1) on n >= 2 particles, before the (-g) weight: -sqrt(n)(n-1) P[V]."""
    p, w = space.grid.p, space.weights
    nb = n - 2
    block = d[ai, ai]                      # (2,)*nb + (M_q, M_p, (M,)*nb)
    block = np.moveaxis(block, [nb, nb + 1], [0, 1])
    Wqp = np.exp(-1j * (p[:, None] ** 2 + p[None, :] ** 2) * t) * np.outer(w, w)
    V = np.zeros((space.M,) + block.shape[2:], dtype=complex)
    for ik, k in enumerate(p):
        Ak = _A(al, k - p, quad)
        ker = Wqp * np.conj(prof.fourier(p[:, None] + p[None, :] - k)) * np.outer(Ak, Ak)
        V[ik] = np.exp(1j * k * k * t) * np.tensordot(ker, block, axes=([0, 1], [0, 1]))
    # V: (M_k, (2,)*nb, (M,)*nb) -> labels (al, rest), momenta (k, rest)
    perm = list(range(1, 1 + nb)) + [0] + list(range(1 + nb, 1 + 2 * nb))
    V = np.transpose(V, perm)
    full = np.zeros(space.shape(n - 1), dtype=complex)
    full[(ai,) + (Ellipsis,)] = V
    return -sqrt(n) * (n - 1) * project(space, full, n - 1)


def bc_matrix_element(chi: NParticleState, t, x, alpha=None, deriv=0):
    """int dp/2pi exp(ipx - ip^2 t) (ip)^deriv chi_alpha(p) for a one-particle chi.

    alpha defaults to the sign of x; at x = 0 it must be given.
    """
    if chi.n != 1:
        raise ValueError("bc_matrix_element takes a one-particle component")
    if alpha is None:
        if x == 0:
            raise ValueError("at x = 0 the half-line label must be given")
        alpha = 1 if x > 0 else -1
    space = chi.space
    p, w = space.grid.p, space.grid.w
    ai = 0 if alpha > 0 else 1
    integrand = np.exp(1j * p * x - 1j * p * p * t) * (1j * p) ** deriv * chi.data[ai]
    return complex(np.sum(w * integrand) / (2 * np.pi))


def boundary_residuals(chi: NParticleState, t=0.0):
    """(continuity, jump) residuals of the one-particle matrix element at x = 0."""
    eta = chi.space.params.eta
    vp = bc_matrix_element(chi, t, 0.0, alpha=1)
    vm = bc_matrix_element(chi, t, 0.0, alpha=-1)
    dp_ = bc_matrix_element(chi, t, 0.0, alpha=1, deriv=1)
    dm = bc_matrix_element(chi, t, 0.0, alpha=-1, deriv=1)
    return abs(vp - vm), abs(dp_ - dm - 2 * eta * 0.5 * (vp + vm))
