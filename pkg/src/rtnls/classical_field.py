"""Classical field of the delta-impurity NLS: spectral profiles, Rosales terms,
boundary residuals, equation-of-motion residual and energy.

Two evaluation routes are provided for the order-n Rosales term with the
alpha-dependent i*eps prescription.

* ``laplace`` (default): each denominator 1/(p - q - i a eps) is written as
  i a int_0^oo exp(-i a (p - q) u - eps u) du.  The momentum integrals then
  collapse onto the free field psi_a(t, y) = int dp/2pi lam_a(p) e^{ipy - ip^2 t}
  and the term becomes a 2n-fold integral over the positive orthant,

      Phi^(n)_a(t, x) = (-1)^n int du  psi(x + a u1) conj psi(x + a(u1 + u2))
                        psi(x + a(u2 + u3)) ... conj psi(x + a(u_{2n-1} + u_{2n}))
                        psi(x + a u_{2n}),

  a chain that contracts in O(n K^2) for K nodes per u.  The eps -> 0 limit
  is taken exactly (eps = 0 in the damping).
* ``momentum``: the literal (2n+1)-fold grid sum with Lorentzian denominators
  at eps in {4, 2, 1} x node spacing, Richardson-extrapolated to eps -> 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .kernels import LABELS, MINUS, PLUS, ModelParams, b_alpha, check_label, defect_TR
from .numerics import consistency_ratio, gauss_panels, richardson, symmetric_grid
from .profiles import AnalyticProfile


# --- seeds and spectral profiles -------------------------------------------

def _check_even(f, tol=1e-14, lo=-6.0, hi=6.0):
    p = np.linspace(lo, hi, 241)
    res = float(np.abs(f(p) - f(-p)).max())
    if res > tol:
        raise ValueError(f"mu1 must be even (|mu1(p) - mu1(-p)| = {res:.2e})")


@dataclass(frozen=True)
class SeedProfiles:
    mu0: AnalyticProfile
    mu1: AnalyticProfile

    def __post_init__(self):
        lo, hi = self.mu1.support()
        r = max(abs(lo), abs(hi), 1.0)
        _check_even(self.mu1, lo=-r, hi=r)

    def scaled(self, c):
        return SeedProfiles(self.mu0.scaled(c), self.mu1.scaled(c))

    def to_dict(self):
        return {"mu0": self.mu0.to_list(), "mu1": self.mu1.to_list()}

    @classmethod
    def from_dict(cls, d):
        return cls(AnalyticProfile.from_list(d.get("mu0", [])), AnalyticProfile.from_list(d.get("mu1", [])))


@dataclass(frozen=True)
class SpectralProfiles:
    """lam_plus / lam_minus define the field; mu_* are kept when built from seeds."""
    params: ModelParams
    lam_plus: Callable
    lam_minus: Callable
    mu_plus: Optional[Callable] = None
    mu_minus: Optional[Callable] = None
    support: tuple = (-8.0, 8.0)

    def lam(self, alpha, p):
        return self.lam_plus(p) if check_label(alpha) == PLUS else self.lam_minus(p)

    def mu(self, alpha, p):
        f = self.mu_plus if check_label(alpha) == PLUS else self.mu_minus
        if f is None:
            raise ValueError("profiles were not built from seeds")
        return f(p)

    def beta(self, alpha, p):
        p = np.asarray(p, dtype=float)
        return 0.5 * (self.lam_plus(p) + check_label(alpha) * self.lam_minus(-p))

    def lambda_plus(self, p):
        return self.lam_plus(p)

    def lambda_minus(self, p):
        return self.lam_minus(p)

    def beta_plus(self, p):
        return self.beta(PLUS, p)

    def beta_minus(self, p):
        return self.beta(MINUS, p)

    def mirrored(self):
        """Parity image: lam~_pm(p) = lam_mp(-p); Phi~_pm(t, x) = Phi_mp(t, -x)."""
        lp, lm = self.lam_plus, self.lam_minus
        lo, hi = self.support
        return SpectralProfiles(self.params, lambda p: lm(-np.asarray(p, float)),
                                lambda p: lp(-np.asarray(p, float)), support=(-hi, -lo))

    def with_params(self, params):
        return replace(self, params=params)

    # --- invariant residuals ------------------------------------------------
    def relation_rt_residual(self, p):
        p = np.asarray(p, dtype=float)
        T, R = defect_TR(p, self.params)
        Tm, Rm = defect_TR(-p, self.params)
        r1 = self.lam_plus(p) - T * self.lam_minus(p) - R * self.lam_plus(-p)
        r2 = self.lam_minus(p) - Tm * self.lam_plus(p) - Rm * self.lam_minus(-p)
        return float(max(np.abs(r1).max(), np.abs(r2).max()))

    def prop_beta_residual(self, p):
        p = np.asarray(p, dtype=float)
        return float(max(np.abs(self.beta(a, p) - b_alpha(p, a, self.params) * self.beta(a, -p)).max()
                         for a in LABELS))

    def bracket_residual(self, k):
        k = np.asarray(k, dtype=float)
        eta = self.params.eta
        return float(np.abs(self.beta(PLUS, -k) / (k + 1j * eta) - self.beta(MINUS, -k)).max())

    def beta_minus_odd_residual(self, p):
        p = np.asarray(p, dtype=float)
        return float(np.abs(self.beta(MINUS, p) + self.beta(MINUS, -p)).max())

    def invariant_residuals(self, p):
        """All four residuals above from one evaluation of lam_pm at +-p."""
        p = np.asarray(p, dtype=float)
        lp, lm, lpr, lmr = self.lam_plus(p), self.lam_minus(p), self.lam_plus(-p), self.lam_minus(-p)
        T, R = defect_TR(p, self.params)
        Tm, Rm = defect_TR(-p, self.params)
        rt = max(np.abs(lp - T * lm - R * lpr).max(), np.abs(lm - Tm * lp - Rm * lmr).max())
        bp, bpr = 0.5 * (lp + lmr), 0.5 * (lpr + lm)          # beta_+(p), beta_+(-p)
        bm, bmr = 0.5 * (lp - lmr), 0.5 * (lpr - lm)          # beta_-(p), beta_-(-p)
        prop = max(np.abs(bp - b_alpha(p, PLUS, self.params) * bpr).max(),
                   np.abs(bm - b_alpha(p, MINUS, self.params) * bmr).max())
        bracket = np.abs(bpr / (p + 1j * self.params.eta) - bmr).max()
        return {"relation_rt": float(rt), "prop_beta": float(prop), "bracket": float(bracket),
                "beta_minus_odd": float(np.abs(bm + bmr).max())}


def _profile_support(*fs):
    lo, hi = 0.0, 0.0
    for f in fs:
        a, b = f.support()
        lo, hi = min(lo, a, -b), max(hi, b, -a)
    return (lo, hi)


def _removable(f, k, den, h=1e-5):
    """f(k) with the points where den(k) = 0 replaced by a symmetric limit."""
    k = np.asarray(k, dtype=float)
    bad = np.abs(den(k)) < 1e-9
    if not np.any(bad):
        return f(k)
    safe = np.where(bad, k + 0.5, k)
    out = np.asarray(f(safe), dtype=complex)
    kb = k[bad] if k.ndim else k
    out[bad] = 0.5 * (f(kb + h) + f(kb - h))
    return out


def build_profiles(seeds: SeedProfiles, params: ModelParams) -> SpectralProfiles:
    """mu_pm from the seeds, then lam_pm through the 2x2 transmission/reflection map.

    At eta = 0 both mu_pm have a denominator k + 1 vanishing at k = -1; the
    seeds must then cancel it (mu0(1) = mu0(-1) = mu1(1)) and the point is
    evaluated as a limit.
    """
    mu0, mu1, eta = seeds.mu0, seeds.mu1, params.eta
    if eta == 0:
        res = max(abs(mu0(-1.0) - mu1(1.0)), abs(mu0(1.0) - mu1(1.0)))
        if res > 1e-12:
            raise ValueError(f"at eta = 0 the seeds give a pole at k = -1 (numerator {res:.2e})")

    def mu_plus_raw(k):
        return (mu0(k) + (k - 1j * eta) * mu1(k)) / (k - 1j * eta + 1)

    def mu_minus_raw(k):
        return -(mu0(-k) + (k + 1j * eta) * mu1(k)) / (k + 1j * eta + 1)

    if eta > 0:
        mu_plus, mu_minus = mu_plus_raw, mu_minus_raw
    else:
        def mu_plus(k):
            return _removable(mu_plus_raw, k, lambda k: k + 1)

        def mu_minus(k):
            return _removable(mu_minus_raw, k, lambda k: k + 1)

    def lam_plus(p):
        p = np.asarray(p, dtype=float)
        T, R = defect_TR(p, params)
        return mu_plus(p) + T * mu_minus(p) + R * mu_plus(-p)

    def lam_minus(p):
        p = np.asarray(p, dtype=float)
        Tm, Rm = defect_TR(-p, params)
        return Tm * mu_plus(p) + mu_minus(p) + Rm * mu_minus(-p)

    return SpectralProfiles(params, lam_plus, lam_minus, mu_plus, mu_minus,
                            support=_profile_support(mu0, mu1))


def profiles_from_lambda(lam_plus, lam_minus, params, support=(-8.0, 8.0), check=True):
    prof = SpectralProfiles(params, lam_plus, lam_minus, support=support)
    if check:
        p = np.linspace(support[0], support[1], 401)
        r = prof.relation_rt_residual(p)
        if r > 1e-10:
            raise ValueError(f"profiles violate the reflection-transmission relation ({r:.2e})")
    return prof


# --- quadrature -------------------------------------------------------------

@dataclass(frozen=True)
class Quadrature:
    P: float = 8.0            # momentum cutoff
    M: int = 129              # momentum nodes (momentum route, n <= 1)
    M2: int = 49              # momentum nodes (momentum route, n = 2)
    eps_factors: tuple = (4, 2, 1)
    h0: float = 1e-3
    method: str = "laplace"
    psi_nodes: int = 257      # momentum nodes for the free field psi
    u_max: float = 16.0
    u_panels: int = 8
    u_order: int = 12
    max_order: int = 2
    eps: float = 0.0          # damping used by the laplace route (0 = the limit)

    def __post_init__(self):
        if self.P <= 0 or self.u_max <= 0:
            raise ValueError("cutoffs must be positive")
        for m in (self.M, self.M2, self.psi_nodes):
            if m % 2 != 1:
                raise ValueError("node counts must be odd")
        if self.method not in ("laplace", "momentum"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")

    def coarse(self):
        return replace(self, u_order=max(self.u_order - 4, 4), psi_nodes=(self.psi_nodes // 4) * 2 + 1
                       if self.psi_nodes > 129 else self.psi_nodes)


@dataclass(frozen=True)
class RosalesValue:
    value: complex
    est_error: float


@dataclass(frozen=True)
class FieldSample:
    t: float
    x: float
    value: complex
    order: int
    est_error: float = float("nan")


# --- laplace route ----------------------------------------------------------

class _Chain:
    """Cached ingredients of the position-space evaluation for one (profiles, quad, alpha)."""

    def __init__(self, profiles: SpectralProfiles, quad: Quadrature, alpha: int):
        self.alpha = alpha
        p, dp = symmetric_grid(quad.P, quad.psi_nodes)
        w = np.full(p.size, dp / (2 * np.pi))
        w[0] *= 0.5
        w[-1] *= 0.5
        self.p = p
        self.lam_w = profiles.lam(alpha, p) * w
        u, wu = gauss_panels(0.0, quad.u_max, quad.u_panels, quad.u_order)
        self.wu = np.asarray(wu) * np.exp(-quad.eps * np.asarray(u))
        K = u.size
        self.K = K
        shifts = np.concatenate([u, (u[:, None] + u[None, :]).ravel()])
        self.E = np.exp(1j * alpha * np.outer(shifts, p))

    def coefficients(self, t, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        ph = np.exp(1j * np.outer(self.p, x) - 1j * (self.p ** 2 * t)[:, None])
        return self.lam_w[:, None] * ph                        # (M, nx)

    def values(self, t, x, deriv=False):
        c = self.coefficients(t, x)
        vals = self.E @ c
        dvals = self.E @ (1j * self.p[:, None] * c) if deriv else None
        return vals, dvals

    def terms(self, n_max, t, x, deriv=False):
        """Phi^(n), n = 0..n_max, (and x-derivatives) for an array of x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        K = self.K
        out = np.zeros((n_max + 1, x.size), dtype=complex)
        dout = np.zeros_like(out) if deriv else None
        for j0 in range(0, x.size, 64):
            xs = x[j0:j0 + 64]
            vals, dvals = self.values(t, xs, deriv)
            # n = 0: psi at the point itself, u = 0 is not a node so use the direct sum
            c = self.coefficients(t, xs)
            out[0, j0:j0 + xs.size] = c.sum(0)
            if deriv:
                dout[0, j0:j0 + xs.size] = (1j * self.p[:, None] * c).sum(0)
            if n_max == 0:
                continue
            single = vals[:K].T                                 # (nx, K)
            pair = vals[K:].T.reshape(xs.size, K, K)
            A, B = np.conj(pair), pair
            v = single * self.wu
            if deriv:
                dsingle = dvals[:K].T
                dpair = dvals[K:].T.reshape(xs.size, K, K)
                dA, dB = np.conj(dpair), dpair
                dv = dsingle * self.wu
            for n in range(1, n_max + 1):
                r = v
                dr = dv if deriv else None
                for i in range(n):
                    if i > 0:
                        # sum over u_{2i} with the B link, then weight u_{2i+1}
                        rn = np.einsum("xi,xij->xj", r * self.wu, B) * self.wu
                        if deriv:
                            dr = (np.einsum("xi,xij->xj", dr * self.wu, B)
                                  + np.einsum("xi,xij->xj", r * self.wu, dB)) * self.wu
                        r = rn
                    rn = np.einsum("xi,xij->xj", r, A)
                    if deriv:
                        dr = np.einsum("xi,xij->xj", dr, A) + np.einsum("xi,xij->xj", r, dA)
                    r = rn
                val = (-1) ** n * np.einsum("xi,xi->x", r, v)
                out[n, j0:j0 + xs.size] = val
                if deriv:
                    dout[n, j0:j0 + xs.size] = (-1) ** n * (np.einsum("xi,xi->x", dr, v) + np.einsum("xi,xi->x", r, dv))
        return out, dout


@lru_cache(maxsize=16)
def _chain(profiles, quad, alpha):
    return _Chain(profiles, quad, alpha)


# --- momentum route -----------------------------------------------------------

def _momentum_term(n, alpha, t, x, profiles, P, M, eps):
    p, dp = symmetric_grid(P, M)
    w = dp / (2 * np.pi)
    lam = profiles.lam(alpha, p)
    a = lam * np.exp(1j * p * x - 1j * p * p * t) * w
    b = np.conj(lam) * np.exp(-1j * p * x + 1j * p * p * t) * w
    K = 1.0 / (p[:, None] - p[None, :] - 1j * alpha * eps)        # K[p_i, q_j]
    r = a
    for _ in range(n):
        c = (K @ r) * b
        r = (K.T @ c) * a
    return complex(r.sum())


def momentum_route(n, alpha, t, x, profiles, quad, eps_factors=None):
    M = quad.M if n <= 1 else quad.M2
    _, dp = symmetric_grid(quad.P, M)
    eps_factors = eps_factors or quad.eps_factors
    vals = [_momentum_term(n, alpha, t, x, profiles, quad.P, M, f * dp) for f in eps_factors]
    if n == 0:
        return RosalesValue(vals[-1], 0.0), vals
    best, spread = richardson(vals, ratio=eps_factors[0] / eps_factors[1], order=1)
    return RosalesValue(best, spread), vals


def brute_force_rosales1(alpha, t, x, profiles, P, M, eps):
    """Dense 3-D trapezoid sum of the n = 1 term at fixed eps (oracle)."""
    p, dp = symmetric_grid(P, M)
    w = dp / (2 * np.pi)
    lam = profiles.lam(alpha, p)
    lq = lam * np.exp(1j * p * x - 1j * p * p * t)
    lp = np.conj(lam) * np.exp(-1j * p * x + 1j * p * p * t)
    P1, Q0, Q1 = np.meshgrid(p, p, p, indexing="ij")
    integrand = (lp[:, None, None] * lq[None, :, None] * lq[None, None, :]
                 / ((P1 - Q0 - 1j * alpha * eps) * (P1 - Q1 - 1j * alpha * eps)))
    return complex(integrand.sum() * w ** 3)


# --- public operations --------------------------------------------------------

def rosales_term(n, alpha, t, x, profiles: SpectralProfiles, quad: Quadrature = Quadrature()) -> RosalesValue:
    alpha = check_label(alpha)
    if n < 0 or n > quad.max_order:
        raise ValueError(f"order {n} outside the supported range 0..{quad.max_order}")
    if alpha * x < 0:
        raise ValueError("Phi_alpha is evaluated on its own half-line only")
    if quad.method == "momentum":
        return momentum_route(n, alpha, t, x, profiles, quad)[0]
    val = _chain(profiles, quad, alpha).terms(n, t, x)[0][n, 0]
    coarse = _chain(profiles, quad.coarse(), alpha).terms(n, t, x)[0][n, 0]
    return RosalesValue(complex(val), float(abs(val - coarse)))


def side_series(alpha, t, x, profiles, N, quad=Quadrature(), deriv=False):
    """sum_n (-g)^n Phi^(n)_alpha on an array of x (analytic continuation allowed)."""
    alpha = check_label(alpha)
    if N < 0 or N > quad.max_order:
        raise ValueError(f"truncation {N} outside the supported range 0..{quad.max_order}")
    if quad.method == "momentum":
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        g = profiles.params.g
        vals = np.array([sum((-g) ** n * momentum_route(n, alpha, t, xx, profiles, quad)[0].value
                             for n in range(N + 1)) for xx in xs])
        if deriv:
            raise NotImplementedError("derivatives use the laplace route")
        return vals, None
    terms, dterms = _chain(profiles, quad, alpha).terms(N, t, x, deriv)
    coef = (-profiles.params.g) ** np.arange(N + 1)
    val = coef @ terms
    return val, (coef @ dterms if deriv else None)


def field_values(t, x, profiles, N, quad=Quadrature()):
    """Phi(t, x) with theta(0) = 1/2, vectorized over x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape, dtype=complex)
    pos, neg, zero = x > 0, x < 0, x == 0
    if pos.any():
        out[pos] = side_series(PLUS, t, x[pos], profiles, N, quad)[0]
    if neg.any():
        out[neg] = side_series(MINUS, t, x[neg], profiles, N, quad)[0]
    if zero.any():
        vp = side_series(PLUS, t, [0.0], profiles, N, quad)[0][0]
        vm = side_series(MINUS, t, [0.0], profiles, N, quad)[0][0]
        out[zero] = 0.5 * (vp + vm)
    return out


def field_value(t, x, profiles, N, quad=Quadrature(), with_error=False) -> FieldSample:
    val = complex(field_values(t, [x], profiles, N, quad)[0])
    err = float("nan")
    if with_error:
        err = float(abs(val - field_values(t, [x], profiles, N, quad.coarse())[0]))
    return FieldSample(float(t), float(x), val, int(N), err)


@dataclass(frozen=True)
class BoundaryResidual:
    t: float
    continuity: float
    jump: float
    continuity_err: float
    jump_err: float
    continuity_ratio: float
    jump_ratio: float
    levels: tuple = field(default_factory=tuple)


def _one_sided(profiles, N, quad, t, h):
    """Continuity and jump combinations evaluated at offset h (centered FD step h/2)."""
    d = 0.5 * h
    xp = np.array([h, h - d, h + d])
    fp = side_series(PLUS, t, xp, profiles, N, quad)[0]
    fm = side_series(MINUS, t, -xp, profiles, N, quad)[0]
    cont = fp[0] - fm[0]
    dplus = (fp[2] - fp[1]) / (2 * d)
    dminus = (fm[1] - fm[2]) / (2 * d)     # derivative of Phi_- at -h
    return cont, dplus - dminus


def boundary_residuals(t, profiles, N, quad=Quadrature(), h=None) -> BoundaryResidual:
    """One-sided limits by Richardson in h.

    The raw one-sided combinations are first order in h.  Each level h in
    {4h0, 2h0, h0} is first corrected with its 2h partner (2 c(h) - c(2h)),
    so the three levels approach the limit at second order; the consistency
    ratio between consecutive level differences should then be close to 4.
    """
    h0 = quad.h0 if h is None else h
    hs = [8 * h0, 4 * h0, 2 * h0, h0]
    raw = [_one_sided(profiles, N, quad, t, hh) for hh in hs]
    c = [r[0] for r in raw]
    j = [r[1] for r in raw]
    eta = profiles.params.eta
    phi0 = field_values(t, [0.0], profiles, N, quad)[0]
    j = [v - 2 * eta * phi0 for v in j]
    ce = [2 * c[i + 1] - c[i] for i in range(3)]
    je = [2 * j[i + 1] - j[i] for i in range(3)]
    cb, cs = richardson(ce, 2.0, order=2)
    jb, js = richardson(je, 2.0, order=2)
    return BoundaryResidual(float(t), float(abs(cb)), float(abs(jb)), float(cs), float(js),
                            consistency_ratio(ce), consistency_ratio(je),
                            tuple(zip(hs[1:], ce, je)))


def eom_residual(t, x, profiles, N, quad=Quadrature(), fd_steps=(1e-3, 1e-3)):
    if x == 0:
        raise ValueError("the equation of motion holds for x != 0 only")
    alpha = PLUS if x > 0 else MINUS
    dt, dx = fd_steps
    g = profiles.params.g
    ft = np.array([side_series(alpha, tt, [x], profiles, N, quad)[0][0] for tt in (t - dt, t + dt)])
    fx = side_series(alpha, t, [x - dx, x, x + dx], profiles, N, quad)[0]
    f0 = fx[1]
    lin = 1j * (ft[1] - ft[0]) / (2 * dt) + (fx[2] - 2 * f0 + fx[0]) / dx ** 2
    return complex(lin - 2 * g * abs(f0) ** 2 * f0)


def energy(t, profiles, N, quad=Quadrature(), X=30.0, panels=60, order=10):
    """int (|Phi_x|^2 + g|Phi|^4) over both half-lines + 2 eta |Phi(t,0)|^2."""
    g, eta = profiles.params.g, profiles.params.eta
    x, w = gauss_panels(0.0, X, panels, order)
    tot = 0.0
    for alpha in LABELS:
        f, df = side_series(alpha, t, alpha * np.asarray(x), profiles, N, quad, deriv=True)
        tot += float(np.sum(w * (np.abs(df) ** 2 + g * np.abs(f) ** 4)))
    phi0 = field_values(t, [0.0], profiles, N, quad)[0]
    return tot + 2 * eta * abs(phi0) ** 2


def mass(t, profiles, N, quad=Quadrature(), X=30.0, panels=60, order=10):
    x, w = gauss_panels(0.0, X, panels, order)
    tot = 0.0
    for alpha in LABELS:
        f = side_series(alpha, t, alpha * np.asarray(x), profiles, N, quad)[0]
        tot += float(np.sum(w * np.abs(f) ** 2))
    return tot
