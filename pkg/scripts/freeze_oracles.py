"""Independent reference values pinned in the test suite.

Each number below is computed here by a route that shares no code path with
the function under test (scipy adaptive quadrature on the closed-form
kernels, or a dense brute-force sum), printed, and copied into the tests.

    python scripts/freeze_oracles.py
"""
import numpy as np
from scipy.integrate import quad

from rtnls.classical_field import SeedProfiles, brute_force_rosales1, build_profiles
from rtnls.kernels import ModelParams
from rtnls.profiles import AnalyticProfile


def T(p, eta):
    return p / (p + 1j * eta)


def R(p, eta):
    return -1j * eta / (p + 1j * eta)


def cquad(f, a, b):
    re = quad(lambda x: f(x).real, a, b, limit=500, epsabs=1e-14, epsrel=1e-13)[0]
    im = quad(lambda x: f(x).imag, a, b, limit=500, epsabs=1e-14, epsrel=1e-13)[0]
    return re + 1j * im


def linear_defect_fractions(p0=2.5, sigma=3.0, eta=1.0):
    """Transmitted and reflected mass fractions of a Gaussian packet hitting a bare delta."""
    w = lambda p: np.exp(-sigma ** 2 * (p - p0) ** 2)
    tot = quad(w, -np.inf, np.inf, epsabs=1e-15)[0]
    tr = quad(lambda p: abs(T(p, eta)) ** 2 * w(p), -np.inf, np.inf, epsabs=1e-15)[0]
    rf = quad(lambda p: abs(R(p, eta)) ** 2 * w(p), -np.inf, np.inf, epsabs=1e-15)[0]
    return tr / tot, rf / tot


def one_particle_amplitudes(eta=1.0):
    """out <h, g> in for h on (1, 2) label +, g Gaussian of width 0.2 at -1.5 (label -) or 1.5 (label +).

    Opposite labels: int dp/2pi conj(h(p)) T(p) g(p);
    same label:     int dp/2pi conj(h(p)) R(p) g(-p).
    """
    h = lambda p: np.exp(-((p - 1.5) / 0.1) ** 2)
    g_minus = lambda p: (0.7 + 0.2j) * np.exp(-((p - 1.4) / 0.12) ** 2)
    g_plus = lambda p: (0.7 + 0.2j) * np.exp(-((p + 1.4) / 0.12) ** 2)
    opp = cquad(lambda p: np.conj(h(p)) * T(p, eta) * g_minus(p), 0.5, 2.5) / (2 * np.pi)
    same = cquad(lambda p: np.conj(h(p)) * R(p, eta) * g_plus(-p), 0.5, 2.5) / (2 * np.pi)
    return opp, same


def classical_first_order(eps=0.5):
    seeds = SeedProfiles(AnalyticProfile.gaussian(1, 1, 0.3), AnalyticProfile.gaussian(0.7, 1, 0))
    prof = build_profiles(seeds, ModelParams(0.05, 1.0))
    return {a: brute_force_rosales1(a, 0.0, 1.0 * a, prof, 8.0, 321, eps) for a in (1, -1)}


if __name__ == "__main__":
    tr, rf = linear_defect_fractions()
    print(f"LINEAR_DEFECT = ({tr!r}, {rf!r})")
    opp, same = one_particle_amplitudes()
    print(f"ONE_PARTICLE_OPPOSITE = {opp!r}")
    print(f"ONE_PARTICLE_SAME = {same!r}")
    for a, v in classical_first_order().items():
        print(f"FIRST_ORDER[{a:+d}] = {v!r}")
