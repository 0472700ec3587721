"""Batch front-end: `python -m rtnls run <subcommand>`.

Every subcommand writes `<sub>_<table>.csv` files plus `<sub>_summary.csv`
into the output directory.  Summary columns are
name, value, tolerance, relation, pass; a check passes when
`value <relation> tolerance` holds ("band" means |value - target| <= band,
the target and band being written as "target+-band").

Exit status: 0 all checks pass, 1 some check fails, 2 configuration error,
3 a module raised while running.

CSV schemas
  kernels_residuals      g, eta, identity, residual
  classical_field        t, x, re, im, order, est_error
  classical_boundary     t, kind, residual, est_error, richardson_ratio
  classical_energy       t, energy, mass
  classical_identities   identity, max_residual, seeds
  oracle_deviation       run, g, N, t, deviation
  oracle_drift           run, energy_drift, mass_drift
  algebra_goldens        key, terms, sha256, match
  algebra_sectors        sector, generated, reference, match
  algebra_correlators    labels, generated_terms, reference_terms, match
  algebra_words          word, bindings, max_abs_diff, max_abs_value
  fock_props             n, trial, rt_residual, s_residual
  fock_bounds            quantity, max_value, samples
  fock_ccr               check, value
  fock_boundary          t, continuity, jump
  scatter_amplitudes     out_labels, in_labels, out_supports, in_supports, re, im, abs2, formula
  scatter_unitarity      family, before_re, before_im, after_re, after_im, diff
  scatter_residuals      t, residual
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from itertools import product

import numpy as np

from .config import ConfigError, RunConfig

SUBCOMMANDS = ("kernels", "classical", "oracle", "algebra", "fock", "scatter")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_MODULE = 0, 1, 2, 3


@dataclass
class Check:
    name: str
    value: float
    tol: float
    relation: str = "<"
    target: float = 0.0

    @property
    def passed(self):
        v = self.value
        if not np.isfinite(v):
            return False
        if self.relation == "<":
            return v < self.tol
        if self.relation == "<=":
            return v <= self.tol
        if self.relation == ">=":
            return v >= self.tol
        if self.relation == "==":
            return v == self.tol
        if self.relation == "band":
            return abs(v - self.target) <= self.tol
        raise ValueError(f"unknown relation {self.relation!r}")

    def row(self):
        tol = f"{self.target:.12e}+-{self.tol:.12e}" if self.relation == "band" else _fmt(self.tol)
        return (self.name, _fmt(self.value), tol, self.relation, "pass" if self.passed else "fail")


@dataclass
class Report:
    name: str
    tables: dict = field(default_factory=dict)     # table -> (columns, rows)
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12e}"
    return str(v)


def write_report(rep: Report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for table, (cols, rows) in rep.tables.items():
        paths.append(_write_csv(os.path.join(out_dir, f"{rep.name}_{table}.csv"), cols,
                                [[_fmt(v) for v in r] for r in rows]))
    paths.append(_write_csv(os.path.join(out_dir, f"{rep.name}_summary.csv"),
                            ("name", "value", "tolerance", "relation", "pass"),
                            [c.row() for c in rep.checks]))
    return paths


def _write_csv(path, cols, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(cols)
        wr.writerows(rows)
    return path


def _rng(cfg, stream):
    return np.random.default_rng([cfg["seed"], stream])


# --- kernels -----------------------------------------------------------------

def run_kernels(cfg: RunConfig) -> Report:
    from .kernels import ModelParams, verify_kernel_identities
    k = cfg["kernels"]
    rng = _rng(cfg, 1)
    model = cfg.params()
    points = [(float(g), float(e)) for g in k["g_values"] for e in k["eta_values"]]
    if (model.g, model.eta) not in points:
        points.append((model.g, model.eta))
    rows, worst = [], 0.0
    for g, eta in points:
        p = rng.uniform(-k["spread"], k["spread"], int(k["samples"]))
        rep = verify_kernel_identities(ModelParams(g, eta), p)
        rows += [(g, eta, name, v) for name, v in rep.as_rows()]
        worst = max(worst, rep.max_residual())
    out = Report("kernels")
    out.tables["residuals"] = (("g", "eta", "identity", "residual"), rows)
    out.checks.append(Check("kernels.max_residual", worst, cfg.tol("kernels")))
    return out


# --- classical -----------------------------------------------------------------

def identity_suite(cfg: RunConfig):
    """Max relation-RT, prop-beta, bracket and beta_- parity residuals over random seeds."""
    from .classical_field import SeedProfiles, build_profiles
    from .profiles import random_even_profile, random_profile
    rng = _rng(cfg, 2)
    params = cfg.params()
    n = int(cfg["classical"]["identity_seeds"])
    p = np.linspace(-6.0, 6.0, 241)
    worst = dict.fromkeys(("relation_rt", "prop_beta", "bracket", "beta_minus_odd"), 0.0)
    for _ in range(n):
        seeds = SeedProfiles(random_profile(rng), random_even_profile(rng))
        res = build_profiles(seeds, params).invariant_residuals(p)
        for k, v in res.items():
            worst[k] = max(worst[k], v)
    return worst, n


def run_classical(cfg: RunConfig) -> Report:
    from .classical_field import boundary_residuals, build_profiles, energy, field_values, mass
    params, quad, N = cfg.params(), cfg.quadrature(), int(cfg["N"])
    prof = build_profiles(cfg.seeds(), params)
    c = cfg["classical"]
    times = [float(t) for t in c["times"]]
    xs = np.round(np.arange(-c["x_max"], c["x_max"] + 1e-9, c["x_step"]), 12)
    out = Report("classical")

    rows = []
    coarse = quad.coarse()
    for t in times:
        fine = field_values(t, xs, prof, N, quad)
        rough = field_values(t, xs, prof, N, coarse)
        rows += [(t, x, v.real, v.imag, N, abs(v - r)) for x, v, r in zip(xs, fine, rough)]
    out.tables["field"] = (("t", "x", "re", "im", "order", "est_error"), rows)

    rows = []
    for t in times:
        b = boundary_residuals(t, prof, N, quad)
        rows.append((t, "continuity", b.continuity, b.continuity_err, b.continuity_ratio))
        rows.append((t, "jump", b.jump, b.jump_err, b.jump_ratio))
        out.checks += [
            Check(f"boundary.continuity[t={t:g}]", b.continuity, cfg.tol("boundary")),
            Check(f"boundary.jump[t={t:g}]", b.jump, cfg.tol("boundary")),
            Check(f"boundary.continuity_ratio[t={t:g}]", b.continuity_ratio, cfg.tol("richardson_min"), ">="),
            Check(f"boundary.jump_ratio[t={t:g}]", b.jump_ratio, cfg.tol("richardson_min"), ">="),
        ]
    out.tables["boundary"] = (("t", "kind", "residual", "est_error", "richardson_ratio"), rows)

    rows = [(t, energy(t, prof, N, quad), mass(t, prof, N, quad)) for t in times]
    out.tables["energy"] = (("t", "energy", "mass"), rows)
    e0 = rows[0][1]
    drift = max(abs(e - e0) for _, e, _ in rows) / abs(e0)
    out.checks.append(Check("series.energy_drift", drift, cfg.tol("energy_drift")))

    worst, n = identity_suite(cfg)
    out.tables["identities"] = (("identity", "max_residual", "seeds"),
                                [(k, v, n) for k, v in worst.items()])
    out.checks += [Check(f"identity.{k}", v, cfg.tol("identities")) for k, v in worst.items()]
    return out


# --- oracle ----------------------------------------------------------------------

def run_oracle(cfg: RunConfig) -> Report:
    from .classical_field import build_profiles
    from .kernels import ModelParams
    from .pde_oracle import compare_series, energy_drift, mass_drift
    params, quad, N = cfg.params(), cfg.quadrature(), int(cfg["N"])
    grid, seeds = cfg.oracle_grid(), cfg.seeds()
    t_final = float(cfg["oracle"]["t_final"])
    Ns = int(cfg["oracle"]["scaling_N"])
    out = Report("oracle")
    dev_rows, drift_rows, worst = [], [], {}

    def one(tag, g, n):
        pr = ModelParams(g, params.eta)
        w, rows, run = compare_series(build_profiles(seeds, pr), n, quad, pr, t_final, grid, return_run=True)
        dev_rows.extend((tag, g, n, t, d) for t, d in rows)
        drift_rows.append((tag, energy_drift(run), mass_drift(run)))
        worst[tag] = w
        return run

    # at g = 0 every order above the free one carries a factor g^n and vanishes
    one("free", 0.0, 0)
    run = one("coupled", params.g, N)
    if Ns == N:
        worst["scaling_g"] = worst["coupled"]
    else:
        one("scaling_g", params.g, Ns)
    one("scaling_2g", 2 * params.g, Ns)
    ratio = worst["scaling_2g"] / worst["scaling_g"] if worst["scaling_g"] > 0 else float("nan")

    out.tables["deviation"] = (("run", "g", "N", "t", "deviation"), dev_rows)
    out.tables["drift"] = (("run", "energy_drift", "mass_drift"), drift_rows)
    out.checks += [
        Check("oracle.free_deviation", worst["free"], cfg.tol("oracle_free")),
        Check("oracle.coupled_deviation", worst["coupled"], cfg.tol("oracle_coupled")),
        Check("oracle.g_doubling_ratio", ratio, cfg.tol("oracle_scaling_band"), "band",
              cfg.tol("oracle_scaling")),
        Check("oracle.energy_drift", energy_drift(run), cfg.tol("energy_drift")),
    ]
    return out


# --- algebra ---------------------------------------------------------------------

GOLDEN_FILE = "algebra_goldens.json"


def golden_text():
    from .rt_symbolic import golden_records
    return json.dumps(golden_records(), indent=1, sort_keys=True) + "\n"


def load_goldens():
    return resources.files("rtnls").joinpath("data", GOLDEN_FILE).read_text()


def _digest(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def word_cross_check(cfg: RunConfig, kinds_list=None):
    """Max |rewrite-engine value - Fock matrix element| per generator word."""
    from .fock import FockSpace, word_vev
    from .kernels import ModelParams
    from .numerics import MomentumGrid
    from .profiles import random_profile
    from .rt_symbolic import smeared_word_vev
    a = cfg["algebra"]
    grid = MomentumGrid(a["P"], a["M"])
    params = ModelParams(a["g"], a["eta"])
    space = FockSpace(grid, params, max_n=max(1, int(a["word_length"]) // 2))
    rng = _rng(cfg, 3)
    if kinds_list is None:
        kinds_list = [k for L in range(1, int(a["word_length"]) + 1)
                      for k in product(("a", "ad", "r", "t"), repeat=L)]
    rp = lambda: random_profile(rng, n_terms=1, width=(0.5, 1.2), center=(-2.0, 2.0))
    stats = {k: [0.0, 0.0] for k in kinds_list}
    for _ in range(int(a["bindings"])):
        for kinds in kinds_list:
            word = [(k, (rp(), rp()) if k in ("a", "ad") else rp()) for k in kinds]
            s = smeared_word_vev(word, grid, params)
            f = word_vev(space, word)
            st = stats[kinds]
            st[0] = max(st[0], abs(s - f))
            st[1] = max(st[1], abs(f))
    return stats


def run_algebra(cfg: RunConfig) -> Report:
    from .rt_symbolic import (REFERENCE_SECTORS, canonical_on_support, golden_records,
                              reference_two_particle, sector_integrand, two_particle_correlator)
    out = Report("algebra")
    text = golden_text()
    gold_text = load_goldens()
    gen, gold = golden_records(), json.loads(gold_text)
    rows = []
    for key in sorted(set(gen) | set(gold)):
        g1, g2 = gen.get(key), gold.get(key)
        ok = g1 is not None and g2 is not None and _digest(g1) == _digest(g2)
        rows.append((key, len(g1 or []), _digest(g1), ok))
    out.tables["goldens"] = (("key", "terms", "sha256", "match"), rows)
    out.checks.append(Check("algebra.golden_bytes_differ", float(text != gold_text), 0.0, "=="))

    rows, bad = [], 0
    for al in product((1, -1), repeat=2):
        got = sector_integrand(*al)
        ref = tuple(sorted(REFERENCE_SECTORS[al], key=repr))
        ok = got == ref
        bad += not ok
        rows.append((f"{al[0]:+d}{al[1]:+d}", repr(got), repr(ref), ok))
    out.tables["sectors"] = (("sector", "generated", "reference", "match"), rows)
    out.checks.append(Check("algebra.sector_mismatches", float(bad), 0.0, "=="))

    rows, bad = [], 0
    for al in product((1, -1), repeat=2):
        for be in product((1, -1), repeat=2):
            g, r = two_particle_correlator(al, be), reference_two_particle(al, be)
            ok = canonical_on_support(g) == canonical_on_support(r)
            bad += not ok
            rows.append((f"{al[0]:+d}{al[1]:+d},{be[0]:+d}{be[1]:+d}", len(g), len(r), ok))
    out.tables["correlators"] = (("labels", "generated_terms", "reference_terms", "match"), rows)
    out.checks.append(Check("algebra.correlator_mismatches", float(bad), 0.0, "=="))

    stats = word_cross_check(cfg)
    n = int(cfg["algebra"]["bindings"])
    out.tables["words"] = (("word", "bindings", "max_abs_diff", "max_abs_value"),
                           [(" ".join(k), n, d, v) for k, (d, v) in stats.items()])
    worst = max(d for d, _ in stats.values())
    out.checks.append(Check("algebra.cross_module", worst, cfg.tol("cross_module")))
    return out


# --- fock ------------------------------------------------------------------------

def _fock_random_space(cfg):
    from .fock import FockSpace
    from .kernels import ModelParams
    from .numerics import MomentumGrid
    f = cfg["fock"]
    return FockSpace(MomentumGrid(f["random_P"], f["random_M"]), ModelParams(f["g"], f["eta"]))


def _random_smear(rng):
    from .fock import SmearProfile
    from .profiles import random_profile
    return SmearProfile(random_profile(rng, center=(-2.0, 2.0)), random_profile(rng, center=(-2.0, 2.0)))


def random_fock_state(space, n, rng):
    from .fock import create
    st = space.vacuum()
    for _ in range(n):
        st = create(st, _random_smear(rng))
    return st.scaled(1.0 / st.norm())


def smear_norm(space, f):
    v = f.momentum_values(space.grid.p)
    return float(np.sqrt(np.sum(space.weights * np.abs(v) ** 2)))


def fock_props(cfg, trials=3):
    from .fock import create
    space = _fock_random_space(cfg)
    rng = _rng(cfg, 4)
    rows = []
    for n in range(1, int(cfg["fock"]["max_n"]) + 1):
        for k in range(trials):
            st = random_fock_state(space, n - 1, rng)
            comp = create(st, _random_smear(rng)).component(n)
            rows.append((n, k, comp.rt_residual(), comp.s_residual()))
    return rows


def fock_bounds(cfg, samples=None):
    """Worst adjointness defect and worst ||a+(f) phi|| / (sqrt(n+1) ||f|| ||phi||)."""
    from .fock import annihilate, create, inner_product
    space = _fock_random_space(cfg)
    rng = _rng(cfg, 5)
    samples = int(cfg["fock"]["random_states"]) if samples is None else samples
    top = int(cfg["fock"]["max_n"])
    adj = ratio = 0.0
    for _ in range(samples):
        n = int(rng.integers(0, top))
        phi = random_fock_state(space, n, rng)
        psi = random_fock_state(space, n + 1, rng)
        f = _random_smear(rng)
        f_norm = smear_norm(space, f)
        up = create(phi, f)
        ratio = max(ratio, up.norm() / (np.sqrt(n + 1) * f_norm))
        d = abs(inner_product(phi, annihilate(psi, f)) - inner_product(up, psi)) / f_norm
        adj = max(adj, d)
    return adj, ratio, samples


def fock_ccr(cfg):
    """CCR, [Phi, Phi] and the exchange lemma on ordered 1- and 2-particle states."""
    from .fock import (FieldQuadrature, FockSpace, SmearProfile, check_ordered, field_apply,
                       inner_product, tilde_create)
    from .kernels import ModelParams
    from .numerics import MomentumGrid
    from .profiles import AnalyticProfile
    f = cfg["fock"]
    space = FockSpace(MomentumGrid(f["P"], f["M"]), ModelParams(f["g"], f["eta"]))
    quad = FieldQuadrature(s_max=float(f["s_max"]))
    t = float(f["t"])
    pos = lambda c, w, amp: SmearProfile.single(1, AnalyticProfile.gaussian(amp, w, c), "position")
    f1, f2, h1, h2 = (pos(*f[k]) for k in ("f1", "f2", "h1", "h2"))
    try:
        for ff in (f1, f2):
            check_ordered([h1, h2, ff], tol=float(f["ordering_tol"]))
    except ValueError as exc:
        raise ConfigError(f"fock layout: {exc}") from exc
    om = space.vacuum()
    res = {}
    psi1 = tilde_create(om, t, h1)
    com = (inner_product(field_apply(psi1, t, f1, True, quad), field_apply(psi1, t, f2, True, quad))
           - inner_product(field_apply(psi1, t, f2, False, quad), field_apply(psi1, t, f1, False, quad)))
    res["ccr_1p"] = abs(com - f1.inner(f2) * inner_product(psi1, psi1))
    psi2 = tilde_create(tilde_create(om, t, h2), t, h1)
    lemma = (field_apply(psi2, t, f1, False, quad) - tilde_create(om, t, h2).scaled(f1.inner(h1))
             - tilde_create(om, t, h1).scaled(f1.inner(h2)))
    res["lemma_2p"] = lemma.norm()
    a1 = field_apply(psi2, t, f1, True, quad)
    a2 = field_apply(psi2, t, f2, True, quad)
    b1 = field_apply(psi2, t, f2, False, quad)
    b2 = field_apply(psi2, t, f1, False, quad)
    com = inner_product(a1, a2) - inner_product(b1, b2)
    res["ccr_2p"] = abs(com - f1.inner(f2) * inner_product(psi2, psi2))
    pp = field_apply(b1, t, f1, False, quad) - field_apply(b2, t, f2, False, quad)
    res["phi_phi_2p"] = pp.norm()
    return res


def run_fock(cfg: RunConfig) -> Report:
    from .fock import boundary_residuals, create
    out = Report("fock")
    rows = fock_props(cfg)
    out.tables["props"] = (("n", "trial", "rt_residual", "s_residual"), rows)
    out.checks += [Check("fock.rt_prop", max(r[2] for r in rows), cfg.tol("fock_props")),
                   Check("fock.s_prop", max(r[3] for r in rows), cfg.tol("fock_props"))]

    adj, ratio, n = fock_bounds(cfg)
    out.tables["bounds"] = (("quantity", "max_value", "samples"),
                            [("adjoint_defect", adj, n), ("creation_bound_ratio", ratio, n)])
    out.checks += [Check("fock.adjoint", adj, cfg.tol("fock_adjoint")),
                   Check("fock.creation_bound_ratio", ratio, cfg.tol("fock_bound_ratio"), "<=")]

    space = _fock_random_space(cfg)
    rng = _rng(cfg, 6)
    chi = create(space.vacuum(), _random_smear(rng)).component(1)
    rows = [(t,) + boundary_residuals(chi, t) for t in (0.0, 0.5, 1.0)]
    out.tables["boundary"] = (("t", "continuity", "jump"), rows)
    out.checks += [Check("fock.bc_continuity", max(r[1] for r in rows), cfg.tol("fock_bc")),
                   Check("fock.bc_jump", max(r[2] for r in rows), cfg.tol("fock_bc"))]

    res = fock_ccr(cfg)
    out.tables["ccr"] = (("check", "value"), list(res.items()))
    out.checks += [Check(f"fock.{k}", v, cfg.tol("fock_ccr")) for k, v in res.items()]
    return out


# --- scatter -----------------------------------------------------------------------

def _scatter_setup(cfg):
    from .kernels import ModelParams
    from .numerics import MomentumGrid
    s = cfg["scatter"]
    return MomentumGrid(s["P"], s["M"]), ModelParams(s["g"], s["eta"])


def scatter_packet(label, lo, hi, role, amp=1.0):
    """Normalized packet whose momentum modulus is in (lo, hi) on the side fixed by its role."""
    from .scattering import Packet
    side = label if role == "out" else -label
    a, b = sorted((side * lo, side * hi))
    return Packet.on(label, a, b, role, amp).normalized()


def scatter_cases():
    from .scattering import OrderedFamily
    O = lambda *pk: OrderedFamily(pk, "out")
    I = lambda *pk: OrderedFamily(pk, "in")
    cases = []
    for al, be in product((1, -1), repeat=2):
        cases.append((O(scatter_packet(al, 1.0, 2.0, "out")),
                      I(scatter_packet(be, 1.2, 2.3, "in", 0.7 + 0.2j))))
    for a1, a2, b1, b2 in product((1, -1), repeat=4):
        cases.append((O(scatter_packet(a1, 2.3, 3.2, "out"), scatter_packet(a2, 1.0, 2.0, "out", 0.8)),
                      I(scatter_packet(b1, 1.1, 1.9, "in", 0.9 + 0.3j), scatter_packet(b2, 2.2, 3.3, "in"))))
    # particle-number mismatch: exactly zero
    cases.append((O(scatter_packet(1, 1.0, 2.0, "out")),
                  I(scatter_packet(1, 1.1, 1.9, "in"), scatter_packet(-1, 2.2, 3.3, "in"))))
    return cases


def unitarity_families():
    from .scattering import OrderedFamily
    O = lambda *pk: OrderedFamily(pk, "out")
    fams = []
    for a2 in (1, -1):
        phi = O(scatter_packet(1, 2.3, 3.2, "out"), scatter_packet(a2, 1.0, 2.0, "out"))
        psi = O(scatter_packet(1, 2.35, 3.25, "out", 1j), scatter_packet(a2, 0.95, 1.9, "out"))
        fams.append((f"+{'+' if a2 > 0 else '-'}", phi, psi))
    return fams


def run_scatter(cfg: RunConfig) -> Report:
    from .scattering import (AMPLITUDE_COLUMNS, amplitude_rows, asymptotic_residual, residual_ladder,
                             s_map, state_overlap, transition_amplitude)
    grid, params = _scatter_setup(cfg)
    s = cfg["scatter"]
    out = Report("scatter")
    cases = scatter_cases()
    rows = amplitude_rows(cases, grid, params, float(s["dp"]))
    out.tables["amplitudes"] = (AMPLITUDE_COLUMNS, [[r[c] for c in AMPLITUDE_COLUMNS] for r in rows])
    closed_diff, zero = 0.0, 0.0
    for out_f, in_f in cases:
        if len(out_f) != len(in_f):
            zero = max(zero, abs(transition_amplitude(out_f, in_f, grid, params)))
    by_case = {}
    for r in rows:
        by_case.setdefault((r["out_labels"], r["in_labels"], r["out_supports"], r["in_supports"]), {})[
            r["formula"]] = complex(float(r["re"]), float(r["im"]))
    for v in by_case.values():
        if "closed" in v:
            closed_diff = max(closed_diff, abs(v["closed"] - v["pipeline"]))
    out.checks += [Check("scatter.n_ne_m_amplitude", zero, 0.0, "=="),
                   Check("scatter.closed_vs_pipeline", closed_diff, cfg.tol("scatter_closed"))]

    rows, worst = [], 0.0
    for tag, phi, psi in unitarity_families():
        a = state_overlap(phi, psi, grid, params)
        b = state_overlap(s_map(phi), s_map(psi), grid, params)
        rows.append((tag, a.real, a.imag, b.real, b.imag, abs(a - b)))
        worst = max(worst, abs(a - b))
    out.tables["unitarity"] = (("family", "before_re", "before_im", "after_re", "after_im", "diff"), rows)
    out.checks.append(Check("scatter.s_unitarity", worst, cfg.tol("scatter_unitarity")))

    lo, hi = s["residual_packet"]
    pk = scatter_packet(1, lo, hi, "out")
    r20 = asymptotic_residual(pk, float(s["t_residual"]))
    ts, rs = residual_ladder(pk, float(s["ladder_t0"]), float(s["ladder_ratio"]), int(s["ladder_count"]))
    out.tables["residuals"] = (("t", "residual"), [(float(s["t_residual"]), r20)] + list(zip(ts, rs)))
    steps = [rs[i + 1] / rs[i] if rs[i] > 0 else float("inf") for i in range(len(rs) - 1)]
    out.checks += [Check(f"scatter.residual[t={float(s['t_residual']):g}]", r20, cfg.tol("scatter_residual")),
                   Check("scatter.ladder_max_step_ratio", max(steps), 1.0)]
    return out


RUNNERS = {"kernels": run_kernels, "classical": run_classical, "oracle": run_oracle,
           "algebra": run_algebra, "fock": run_fock, "scatter": run_scatter}


# --- entry point -------------------------------------------------------------------

def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser():
    ap = argparse.ArgumentParser(prog="rtnls", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment and write CSV reports")
    run.add_argument("subcommand", choices=SUBCOMMANDS)
    run.add_argument("--config", help="JSON config (default: $RTNLS_CONFIG, else built-in defaults)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    run.add_argument("--g", type=float, help="coupling")
    run.add_argument("--eta", type=float, help="impurity strength")
    run.add_argument("--N", type=int, help="truncation order of the series")
    run.add_argument("--t", type=_floats, help="comma-separated times for the classical sweep")
    run.add_argument("--P", type=float, help="momentum cutoff of the classical quadrature")
    run.add_argument("--M", type=int, help="momentum nodes of the classical quadrature")
    run.add_argument("--t-final", dest="t_final", type=float, help="oracle end time")
    sub.add_parser("defaults", help="print the default config")
    return ap


_OVERRIDES = {"seed": "seed", "g": "model.g", "eta": "model.eta", "N": "N", "t": "classical.times",
              "P": "quadrature.P", "M": "quadrature.M", "t_final": "oracle.t_final", "out": "output"}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "defaults":
        print(RunConfig.from_dict().dumps())
        return EXIT_OK
    try:
        cfg = RunConfig.load(args.config)
        over = {key: getattr(args, name) for name, key in _OVERRIDES.items()
                if getattr(args, name) is not None}
        if over:
            cfg = cfg.override(**over)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rep = RUNNERS[args.subcommand](cfg)
        paths = write_report(rep, cfg["output"])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - every module failure maps to one exit code
        print(f"{args.subcommand} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODULE
    for c in rep.checks:
        print(",".join(c.row()))
    print(f"wrote {len(paths)} files to {cfg['output']}")
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
