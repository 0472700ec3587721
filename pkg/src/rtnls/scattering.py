"""Wave packets, the scattering map and one-/two-particle transition amplitudes.

Packets are momentum-space Gaussian profiles with a nominal support.  The
general amplitude goes through the rewrite engine (`smeared_word_vev`);
the one- and two-particle closed forms are hand-coded from the reduced
correlators and integrate only over the declared supports.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .kernels import ModelParams, bulk_S, check_label, defect_TR
from .numerics import MomentumGrid
from .profiles import TAIL, AnalyticProfile, packet_profile
from .rt_symbolic import smeared_word_vev

ROLES = ("out", "in")
_ZERO = AnalyticProfile.zero()


@dataclass(frozen=True)
class Packet:
    """Momentum profile on one label.

    role "out": support inside R^alpha; role "in": support inside R^-alpha.
    """
    label: int
    profile: AnalyticProfile
    role: str = "out"
    tol: float = TAIL

    def __post_init__(self):
        check_label(self.label)
        if self.role not in ROLES:
            raise ValueError(f"packet role must be one of {ROLES}")
        lo, hi = self.support
        side = self.label if self.role == "out" else -self.label
        if not (side * lo > 0 and side * hi > 0):
            raise ValueError(f"{self.role}-packet support ({lo:.3g}, {hi:.3g}) is not inside the "
                             f"{'positive' if side > 0 else 'negative'} half-line")

    @classmethod
    def on(cls, label, lo, hi, role="out", amp=1.0):
        return cls(label, packet_profile(lo, hi, amp), role)

    @property
    def support(self):
        return self.profile.support(self.tol)

    @property
    def modulus(self):
        lo, hi = self.support
        return min(abs(lo), abs(hi)), max(abs(lo), abs(hi))

    def smear(self):
        """(f_+, f_-) pair of callables for the rewrite engine."""
        return (self.profile, _ZERO) if self.label > 0 else (_ZERO, self.profile)

    def flipped(self):
        return Packet(self.label, self.profile.flipped(), "in" if self.role == "out" else "out", self.tol)

    def norm_sq(self):
        """int dp/2pi |f|^2."""
        return self.profile.l2_norm_sq() / (2 * np.pi)

    def normalized(self):
        return Packet(self.label, self.profile.scaled(1 / np.sqrt(self.norm_sq())), self.role, self.tol)


def dominates(a: Packet, b: Packet, margin=0.0):
    return a.modulus[0] > b.modulus[1] + margin


@dataclass(frozen=True)
class OrderedFamily:
    """Out family h_1 > ... > h_n or in family g_m > ... > g_1 (stored g_1 first)."""
    packets: tuple
    role: str = "out"
    margin: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "packets", tuple(self.packets))
        if self.role not in ROLES:
            raise ValueError(f"family role must be one of {ROLES}")
        for pk in self.packets:
            if pk.role != self.role:
                raise ValueError("all packets of a family share its role")
        for a, b in zip(self.packets[:-1], self.packets[1:]):
            big, small = (a, b) if self.role == "out" else (b, a)
            if not dominates(big, small, self.margin):
                raise ValueError(f"{self.role} family violates the momentum-support ordering")

    def __len__(self):
        return len(self.packets)

    def ket_word(self):
        return [("ad", pk.smear()) for pk in self.packets]

    def bra_word(self):
        """<a+(h_1)...a+(h_n) Omega| as the annihilator word a(h_n)...a(h_1)."""
        return [("a", pk.smear()) for pk in reversed(self.packets)]


# --- free evolution ----------------------------------------------------------

def evolve_packet(pk: Packet, t) -> Callable:
    """x -> int dp/2pi f(p) exp(ipx - ip^2 t), in closed form."""
    prof = pk.profile
    return lambda x: prof.free_evolve(t, x)


def position_norm_sq(pk: Packet, t=0.0, lim=None):
    f = evolve_packet(pk, t)
    val, _ = integrate.quad(lambda x: abs(f(x)) ** 2, -np.inf, np.inf, limit=400)
    return val


def asymptotic_residual(pk: Packet, t) -> float:
    """|| theta(alpha x) f^t - f^t ||: the norm of f^t on the wrong half-line."""
    if pk.role == "out" and t < 0 or pk.role == "in" and t > 0:
        raise ValueError("out packets are tested at t > 0, in packets at t < 0")
    f = evolve_packet(pk, t)
    lo, hi = pk.support
    # the bulk of |f^t|^2 sits near x = 2 p t; split the range there
    centre = abs(lo + hi) * abs(t)
    spread = 10.0 / max(pk.profile.terms[0].width, 1e-3) + (hi - lo) * abs(t)
    side = pk.label
    g = lambda s: abs(f(-side * s)) ** 2      # s > 0 is the wrong half-line
    pts = [0.0, spread, centre + spread]
    tot = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        tot += integrate.quad(g, a, b, limit=400, epsabs=1e-30, epsrel=1e-10)[0]
    tot += integrate.quad(g, pts[-1], np.inf, limit=400, epsabs=1e-30, epsrel=1e-10)[0]
    return float(np.sqrt(tot))


def residual_ladder(pk: Packet, t0=1.0, ratio=2.0, count=6):
    ts = t0 * ratio ** np.arange(count)
    return ts, np.array([asymptotic_residual(pk, t) for t in ts])


# --- scattering map ----------------------------------------------------------

def s_map(fam: OrderedFamily) -> OrderedFamily:
    """Reverse the creator order and flip every profile p -> -p."""
    pks = tuple(pk.flipped() for pk in reversed(fam.packets))
    role = "in" if fam.role == "out" else "out"
    try:
        return OrderedFamily(pks, role, fam.margin)
    except ValueError as exc:
        raise ValueError("s_map output is not ordered: malformed input supports") from exc


# --- amplitudes --------------------------------------------------------------

def transition_amplitude(out: OrderedFamily, in_: OrderedFamily, grid: MomentumGrid, params: ModelParams) -> complex:
    """<a+(h_1)..a+(h_n) Omega, a+(g_1)..a+(g_m) Omega> through the rewrite engine."""
    if len(out) != len(in_):
        return 0j
    return smeared_word_vev(out.bra_word() + in_.ket_word(), grid, params)


def state_overlap(left: OrderedFamily, right: OrderedFamily, grid, params) -> complex:
    """<a+(left...) Omega, a+(right...) Omega> for families of any role."""
    if len(left) != len(right):
        return 0j
    return smeared_word_vev(left.bra_word() + right.ket_word(), grid, params)


def _nodes(lo, hi, dp):
    n = max(int(np.ceil((hi - lo) / dp)) + 1, 3)
    p = np.linspace(lo, hi, n)
    w = np.full(n, p[1] - p[0])
    w[0] = w[-1] = 0.5 * (p[1] - p[0])
    return p, w


def _T(x, params):
    return defect_TR(x, params)[0]


def _R(x, params):
    return defect_TR(x, params)[1]


def one_particle_closed_form(h: Packet, g: Packet, params: ModelParams, dp=0.01) -> complex:
    """Reflection (same side) or transmission (opposite side) amplitude."""
    p, w = _nodes(*h.support, dp)
    hb = np.conj(h.profile(p))
    a, b = h.label, g.label
    if a == b:
        val = hb * _R(a * p, params) * g.profile(-p)
    else:
        val = hb * _T(a * p, params) * g.profile(p)
    return complex(np.sum(w * val) / (2 * np.pi))


def _delta(a, b):
    return 1.0 if a == b else 0.0


def two_particle_closed_form(out: OrderedFamily, in_: OrderedFamily, params: ModelParams, dp=0.01) -> complex:
    """Eight-term reduced correlator smeared over the declared out supports."""
    h1, h2 = out.packets
    g1, g2 = in_.packets
    a1, a2, b1, b2 = h1.label, h2.label, g1.label, g2.label
    P1, w1 = _nodes(*h1.support, dp)
    P2, w2 = _nodes(*h2.support, dp)
    p1, p2 = P1[:, None], P2[None, :]
    W = w1[:, None] * w2[None, :] / (2 * np.pi) ** 2
    hb = np.conj(h1.profile(p1)) * np.conj(h2.profile(p2))
    S = lambda x: bulk_S(x, params)
    T = lambda x: _T(x, params)
    R = lambda x: _R(x, params)
    d, e = _delta, lambda a, b: 1.0 - _delta(a, b)
    G1, G2 = g1.profile, g2.profile
    tot = 0j
    # first four rows: q1 = +-p2, q2 = +-p1, prefactor S(a1 p1 - b1 q1)
    for s1 in (1, -1):
        for s2 in (1, -1):
            q1, q2 = s1 * p2, s2 * p1
            c2 = d(a2, b1) + e(a2, b1) * T(a2 * p2) if s1 > 0 else d(a2, b1) * R(a2 * p2)
            c1 = d(a1, b2) + e(a1, b2) * T(a1 * p1) if s2 > 0 else d(a1, b2) * R(a1 * p1)
            tot += np.sum(W * hb * S(a1 * p1 - b1 * q1) * c2 * c1 * G1(q1) * G2(q2))
    # last four rows: q1 = +-p1, q2 = +-p2, double S on the defect channel
    for s1 in (1, -1):
        for s2 in (1, -1):
            q1, q2 = s1 * p1, s2 * p2
            SS = S(a1 * p1 - b2 * q2) * S(a1 * p1 + b2 * q2)
            c1 = d(a1, b1) + SS * e(a1, b1) * T(a1 * p1) if s1 > 0 else SS * d(a1, b1) * R(a1 * p1)
            c2 = d(a2, b2) + e(a2, b2) * T(a2 * p2) if s2 > 0 else d(a2, b2) * R(a2 * p2)
            tot += np.sum(W * hb * c1 * c2 * G1(q1) * G2(q2))
    return complex(tot)


def displayed_two_particle(out: OrderedFamily, in_: OrderedFamily, params: ModelParams, dp=0.01) -> complex:
    """The two generic R/T/S expressions: all labels equal, or g_2 on the other label."""
    h1, h2 = out.packets
    g1, g2 = in_.packets
    s = h1.label
    if not (h2.label == s and g1.label == s):
        raise ValueError("displayed forms need h_1, h_2, g_1 on the same label")
    P1, w1 = _nodes(*h1.support, dp)
    P2, w2 = _nodes(*h2.support, dp)
    p1, p2 = P1[:, None], P2[None, :]
    W = w1[:, None] * w2[None, :] / (2 * np.pi) ** 2
    hb = np.conj(h1.profile(p1)) * np.conj(h2.profile(p2))
    S = lambda x: bulk_S(x, params)
    R = lambda x: _R(x, params)
    T = lambda x: _T(x, params)
    if g2.label == s:
        val = (R(s * p2) * S(s * p1 + s * p2) * R(s * p1) * g1.profile(-p2) * g2.profile(-p1)
               + R(s * p1) * S(s * p1 + s * p2) * S(s * p1 - s * p2) * R(s * p2) * g1.profile(-p1) * g2.profile(-p2))
    else:
        val = (R(s * p2) * S(s * p1 + s * p2) * T(s * p1) * g1.profile(-p2) * g2.profile(p1)
               + R(s * p1) * S(s * p1 + s * p2) * S(s * p1 - s * p2) * T(s * p2) * g1.profile(-p1) * g2.profile(p2))
    return complex(np.sum(W * hb * val))


def closed_form(out: OrderedFamily, in_: OrderedFamily, params: ModelParams, dp=0.01):
    if len(out) != len(in_):
        return 0j
    if len(out) == 1:
        return one_particle_closed_form(out.packets[0], in_.packets[0], params, dp)
    if len(out) == 2:
        return two_particle_closed_form(out, in_, params, dp)
    raise ValueError("closed forms exist for one and two particles only")


# --- unitarity budget --------------------------------------------------------

@dataclass(frozen=True)
class Budget:
    reflected: complex
    transmitted: complex
    total: float

    @property
    def residual(self):
        return abs(self.reflected + self.transmitted - self.total)


def unitarity_budget(g: Packet, params: ModelParams, dp=0.005) -> Budget:
    """Amplitudes of g into its own reflected and transmitted images.

    h_R(p) = R(alpha p) g(-p) on the same label and h_T(p) = T(-alpha p) g(p)
    on the other one; |R|^2 + |T|^2 = 1 makes the two add up to ||g||^2.
    """
    if g.role != "in":
        raise ValueError("the budget starts from an in packet")
    al = g.label
    lo, hi = g.support
    q, w = _nodes(lo, hi, dp)
    gq = g.profile(q)
    # reflected: p = -q on label al; transmitted: p = q on label -al
    refl = np.sum(w * np.abs(_R(-al * q, params) * gq) ** 2) / (2 * np.pi)
    trans = np.sum(w * np.abs(_T(-al * q, params) * gq) ** 2) / (2 * np.pi)
    return Budget(complex(refl), complex(trans), g.norm_sq())


# --- tables ------------------------------------------------------------------

AMPLITUDE_COLUMNS = ("out_labels", "in_labels", "out_supports", "in_supports", "re", "im", "abs2", "formula")


def _fmt_sup(fam):
    return ";".join(f"({a:.6g},{b:.6g})" for a, b in (pk.support for pk in fam.packets))


def amplitude_rows(cases: Sequence, grid, params, dp=0.01):
    """One row per (out, in) pair and formula: pipeline and, where defined, closed form."""
    rows = []
    for out, in_ in cases:
        vals = [("pipeline", transition_amplitude(out, in_, grid, params))]
        if len(out) == len(in_) and len(out) in (1, 2):
            vals.append(("closed", closed_form(out, in_, params, dp)))
        for name, v in vals:
            rows.append({
                "out_labels": "".join("+" if pk.label > 0 else "-" for pk in out.packets),
                "in_labels": "".join("+" if pk.label > 0 else "-" for pk in in_.packets),
                "out_supports": _fmt_sup(out), "in_supports": _fmt_sup(in_),
                "re": f"{v.real:.12e}", "im": f"{v.imag:.12e}", "abs2": f"{abs(v) ** 2:.12e}",
                "formula": name,
            })
    return rows


def amplitude_csv(rows) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=AMPLITUDE_COLUMNS, lineterminator="\n")
    wr.writeheader()
    wr.writerows(rows)
    return buf.getvalue()
