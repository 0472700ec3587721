"""Gaussian-polynomial profiles with exact sign flips and closed-form transforms.

A profile is a finite sum of terms amp * (p - c)^d * exp(-((p - c)/w)^2).
The same family is used for momentum-space seeds, packets and position-space
smearing functions; the Gaussian integrals with a quadratic phase are done
in closed form through Hermite polynomials.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

TAIL = 1e-14


@dataclass(frozen=True)
class Term:
    amp: complex
    width: float
    center: float
    degree: int = 0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("term width must be positive")
        if int(self.degree) != self.degree or self.degree < 0:
            raise ValueError("term degree must be a nonnegative integer")

    def radius(self, tol=TAIL) -> float:
        """Smallest r with |term| < tol for all |p - c| >= r."""
        a, w, d = abs(self.amp), self.width, self.degree
        if a == 0 or a < tol and d == 0:
            return 0.0
        if d == 0:
            return float(w * np.sqrt(np.log(a / tol)))
        # with u = s^2/w^2 the edge solves u exp(-2u/d) = c, larger root on the W_{-1} branch
        lo = w * np.sqrt(d / 2.0)
        z = -(2.0 / d) * (tol / (a * w ** d)) ** (2.0 / d)
        if z < -np.exp(-1.0):
            return float(lo)            # the peak itself is below tol
        u = -(d / 2.0) * lambertw(z, -1).real
        return float(max(w * np.sqrt(u), lo))


def _hermite(d, z):
    h0 = np.ones_like(z)
    if d == 0:
        return h0
    h1 = 2 * z
    for n in range(1, d):
        h0, h1 = h1, 2 * z * h1 - 2 * n * h0
    return h1


def gauss_moment(d, a, b):
    """int s^d exp(-a s^2 + i b s) ds for Re a > 0 (principal square root)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ra = np.sqrt(a)
    z = b / (2 * ra)
    return np.sqrt(np.pi / a) * (1j / (2 * ra)) ** d * _hermite(d, z) * np.exp(-z * z)


@dataclass(frozen=True)
class AnalyticProfile:
    terms: tuple = ()

    @classmethod
    def gaussian(cls, amp=1.0, width=1.0, center=0.0, degree=0):
        return cls((Term(complex(amp), float(width), float(center), int(degree)),))

    @classmethod
    def zero(cls):
        return cls(())

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape, dtype=complex)
        for t in self.terms:
            s = p - t.center
            out = out + t.amp * s ** t.degree * np.exp(-(s / t.width) ** 2)
        return out

    def __add__(self, other):
        return AnalyticProfile(self.terms + other.terms)

    def scaled(self, c):
        c = complex(c)
        return AnalyticProfile(tuple(Term(t.amp * c, t.width, t.center, t.degree) for t in self.terms))

    def flipped(self):
        """p -> f(-p), exact within the family."""
        return AnalyticProfile(tuple(
            Term(t.amp * (-1) ** t.degree, t.width, -t.center, t.degree) for t in self.terms))

    def shifted(self, a):
        """p -> f(p - a)."""
        return AnalyticProfile(tuple(
            Term(t.amp, t.width, t.center + a, t.degree) for t in self.terms))

    def is_zero(self):
        return all(t.amp == 0 for t in self.terms)

    def support(self, tol=TAIL):
        """Nominal support interval outside which |f| < tol."""
        live = [t for t in self.terms if t.amp != 0]
        if not live:
            return (0.0, 0.0)
        k = len(live)
        lo = min(t.center - t.radius(tol / k) for t in live)
        hi = max(t.center + t.radius(tol / k) for t in live)
        return (float(lo), float(hi))

    # --- transforms ---------------------------------------------------------
    def free_evolve(self, t, x):
        """int dp/2pi f(p) exp(i p x - i p^2 t), f read as a momentum profile."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(np.broadcast(x, np.asarray(t)).shape, dtype=complex)
        for tm in self.terms:
            c = tm.center
            a = 1.0 / tm.width ** 2 + 1j * t
            b = x - 2 * c * t
            out = out + tm.amp / (2 * np.pi) * np.exp(1j * c * x - 1j * c * c * t) * gauss_moment(tm.degree, a, b)
        return out

    def free_evolve_dx(self, t, x):
        """x-derivative of free_evolve."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for tm in self.terms:
            c = tm.center
            a = 1.0 / tm.width ** 2 + 1j * t
            b = x - 2 * c * t
            ph = np.exp(1j * c * x - 1j * c * c * t)
            # d/dx of exp(icx) G_d(a, b) with db/dx = 1 and dG_d/db = i G_{d+1}
            out = out + tm.amp / (2 * np.pi) * ph * (
                1j * c * gauss_moment(tm.degree, a, b) + 1j * gauss_moment(tm.degree + 1, a, b))
        return out

    def fourier(self, p, t=0.0):
        """int dx f(x) exp(-i p x + i p^2 t), f read as a position profile."""
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape, dtype=complex)
        for tm in self.terms:
            out = out + tm.amp * np.exp(-1j * p * tm.center) * gauss_moment(tm.degree, 1.0 / tm.width ** 2, -p)
        return out * np.exp(1j * p * p * t)

    def l2_norm_sq(self):
        """int |f|^2 dp, exact."""
        tot = 0.0 + 0j
        for t1 in self.terms:
            for t2 in self.terms:
                tot += _overlap(t1, t2)
        return float(tot.real)

    # --- serialization ------------------------------------------------------
    def to_list(self):
        return [[t.amp.real, t.amp.imag, t.width, t.center, t.degree] for t in self.terms]

    @classmethod
    def from_list(cls, rows):
        terms = []
        for r in rows:
            if len(r) == 3:
                re, w, c = r
                im, d = 0.0, 0
            elif len(r) == 4:
                re, w, c, d = r
                im = 0.0
            else:
                re, im, w, c, d = r
            terms.append(Term(complex(re, im), float(w), float(c), int(d)))
        return cls(tuple(terms))


def _overlap(t1: Term, t2: Term):
    """int conj(t1(p)) t2(p) dp for two terms, via a Gaussian quadrature-free expansion."""
    # product of Gaussians is a Gaussian centred at m with 1/v = 1/w1^2 + 1/w2^2
    a1, a2 = 1 / t1.width ** 2, 1 / t2.width ** 2
    a = a1 + a2
    m = (a1 * t1.center + a2 * t2.center) / a
    pref = np.exp(-a1 * t1.center ** 2 - a2 * t2.center ** 2 + a * m * m)
    # expand (s + m - c1)^d1 (s + m - c2)^d2 in powers of s
    poly = np.polynomial.polynomial
    c1 = poly.polypow([m - t1.center, 1.0], t1.degree)
    c2 = poly.polypow([m - t2.center, 1.0], t2.degree)
    cc = poly.polymul(c1, c2)
    tot = sum(ck * gauss_moment(k, a, 0.0) for k, ck in enumerate(cc))
    return np.conj(t1.amp) * t2.amp * pref * tot


def random_profile(rng, n_terms=2, width=(0.6, 1.4), center=(-1.0, 1.0), max_degree=2, amp=1.0):
    terms = []
    for _ in range(n_terms):
        terms.append(Term(complex(amp * rng.normal(), amp * rng.normal()),
                          float(rng.uniform(*width)), float(rng.uniform(*center)),
                          int(rng.integers(0, max_degree + 1))))
    return AnalyticProfile(tuple(terms))


def random_even_profile(rng, **kw):
    f = random_profile(rng, **kw)
    return AnalyticProfile(f.terms + f.flipped().terms)


def packet_profile(lo, hi, amp=1.0, tol=TAIL):
    """Single Gaussian whose nominal support (tails < tol) is the interval (lo, hi)."""
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    w = r / np.sqrt(np.log(abs(amp) / tol))
    return AnalyticProfile.gaussian(amp, w, c)
