"""Term rewriting for the reflection-transmission algebra.

Generators are a_alpha(p), a+_alpha(p) (bulk, half-line label alpha) and
r(p), t(p) (defect, label free).  Momentum arguments are integer linear
forms in named variables, so a(-p) or S(a1 p1 - a2 p2) are exact objects.
A Term is coeff * prod(scalar factors) * prod(2 pi delta) * word, and an
Expression is a tuple of Terms.  Nothing is evaluated pointwise; numbers
only come out of `evaluate_smeared`.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .kernels import ModelParams, bulk_S, defect_TR

AD, DEF_R, DEF_T, A = "ad", "r", "t", "a"
_RANK = {AD: 0, DEF_R: 1, DEF_T: 1, A: 2}


# --- linear momentum forms ---------------------------------------------------

class Lin(tuple):
    """Sorted tuple of (variable, integer coefficient) pairs, no zeros."""

    def __new__(cls, pairs=()):
        acc = {}
        for v, c in pairs:
            acc[v] = acc.get(v, 0) + int(c)
        return super().__new__(cls, tuple(sorted((v, c) for v, c in acc.items() if c)))

    @classmethod
    def var(cls, name, sign=1):
        return cls(((name, sign),))

    def __add__(self, other):
        return Lin(tuple(self) + tuple(other))

    def __neg__(self):
        return Lin((v, -c) for v, c in self)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        return Lin((v, k * c) for v, c in self)

    def coeff(self, name):
        for v, c in self:
            if v == name:
                return c
        return 0

    @property
    def variables(self):
        return tuple(v for v, _ in self)

    def substitute(self, name, form):
        c = self.coeff(name)
        if c == 0:
            return self
        rest = Lin((v, k) for v, k in self if v != name)
        return rest + form.scale(c)

    def normalized(self):
        """Overall sign fixed so the first coefficient is positive (delta is even)."""
        return -self if self and self[0][1] < 0 else self

    def evaluate(self, values):
        out = 0.0
        for v, c in self:
            out = out + c * values[v]
        return out

    def text(self):
        if not self:
            return "0"
        s = ""
        for v, c in self:
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else f"{abs(c)}"
            s += f"{sign}{mag}{v}"
        return s[1:] if s[0] == "+" else s


def signed(name, alpha):
    """alpha * p as a Lin."""
    return Lin.var(name, int(alpha))


# --- atoms, factors, terms ---------------------------------------------------

@dataclass(frozen=True, order=True)
class Atom:
    kind: str
    label: int
    arg: Lin

    def __post_init__(self):
        if self.kind not in _RANK:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.kind in (DEF_R, DEF_T) and self.label != 0:
            raise ValueError("defect generators carry no half-line label")
        if self.kind in (A, AD) and self.label not in (1, -1):
            raise ValueError("bulk generators need a label +1 or -1")

    @property
    def rank(self):
        return _RANK[self.kind]

    def key(self):
        return (self.arg, self.label)

    def text(self):
        lab = "" if self.label == 0 else ("_+" if self.label > 0 else "_-")
        name = {AD: "a+", A: "a", DEF_R: "r", DEF_T: "t"}[self.kind]
        return f"{name}{lab}({self.arg.text()})"


def a(label, name, sign=1):
    return Atom(A, int(label), Lin.var(name, sign))


def ad(label, name, sign=1):
    return Atom(AD, int(label), Lin.var(name, sign))


def r(arg):
    return Atom(DEF_R, 0, arg)


def t(arg):
    return Atom(DEF_T, 0, arg)


def _clean_factors(factors):
    """Sort and cancel S(L) S(-L) pairs."""
    pool = Counter(factors)
    for (kind, arg), n in list(pool.items()):
        if kind != "S" or not arg or n == 0:
            continue
        mate = ("S", -arg)
        m = min(n, pool.get(mate, 0))
        if m and mate != (kind, arg):
            pool[(kind, arg)] -= m
            pool[mate] -= m
    out = []
    for f, n in pool.items():
        out.extend([f] * n)
    return tuple(sorted(out))


@dataclass(frozen=True)
class Term:
    coeff: complex
    word: tuple = ()
    factors: tuple = ()
    deltas: tuple = ()

    @classmethod
    def make(cls, coeff, word=(), factors=(), deltas=()):
        return cls(complex(coeff), tuple(word), _clean_factors(factors),
                   tuple(sorted(Lin(d).normalized() for d in deltas)))

    def key(self):
        return (self.word, self.factors, self.deltas)

    def variables(self):
        vs = set()
        for at in self.word:
            vs.update(at.arg.variables)
        for _, arg in self.factors:
            vs.update(arg.variables)
        for d in self.deltas:
            vs.update(d.variables)
        return vs

    def text(self):
        c = self.coeff
        if c.imag == 0:
            cs = f"{c.real:+g}"
        else:
            cs = f"+({c.real:g}{c.imag:+g}i)"
        parts = [cs]
        parts += [f"{k}({arg.text()})" for k, arg in self.factors]
        parts += [f"2pi.delta({d.text()})" for d in self.deltas]
        parts += [at.text() for at in self.word]
        return " ".join(parts)


class Expression(tuple):
    """Finite sum of Terms, kept merged and sorted."""

    def __new__(cls, terms=()):
        acc = {}
        for tm in terms:
            k = tm.key()
            acc[k] = acc.get(k, 0) + tm.coeff
        out = [Term(c, *k) for k, c in acc.items() if c != 0]
        out.sort(key=_term_sort_key)
        return super().__new__(cls, tuple(out))

    @classmethod
    def word(cls, *atoms, coeff=1):
        return cls((Term.make(coeff, atoms),))

    def __add__(self, other):
        return Expression(tuple(self) + tuple(other))

    def __mul__(self, other):
        """Operator product; scalars and deltas commute with everything."""
        out = []
        for t1 in self:
            for t2 in other:
                out.append(Term.make(t1.coeff * t2.coeff, t1.word + t2.word,
                                     t1.factors + t2.factors, t1.deltas + t2.deltas))
        return Expression(out)

    def scaled(self, c):
        return Expression(Term(tm.coeff * c, *tm.key()) for tm in self)

    def is_scalar(self):
        return all(not tm.word for tm in self)

    def text(self):
        return "0" if not self else "\n".join(tm.text() for tm in self)

    def to_records(self):
        recs = []
        for tm in self:
            recs.append({
                "coeff": [tm.coeff.real, tm.coeff.imag],
                "factors": [[k, list(map(list, arg))] for k, arg in tm.factors],
                "deltas": [list(map(list, d)) for d in tm.deltas],
                "word": [[at.kind, at.label, list(map(list, at.arg))] for at in tm.word],
            })
        return recs

    def dumps(self):
        return json.dumps(self.to_records(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_records(cls, recs):
        lin = lambda rows: Lin(tuple(map(tuple, rows)))
        terms = []
        for rec in recs:
            terms.append(Term.make(complex(*rec["coeff"]),
                                   [Atom(k, lab, lin(arg)) for k, lab, arg in rec["word"]],
                                   [(k, lin(arg)) for k, arg in rec["factors"]],
                                   [lin(d) for d in rec["deltas"]]))
        return cls(terms)


def _term_sort_key(tm):
    return (len(tm.word), tm.word, tm.deltas, tm.factors)


# --- rewriting ---------------------------------------------------------------

def _exchange(left: Atom, right: Atom):
    """Rewrite of the adjacent pair (left, right); list of (coeff, factors, deltas, atoms)."""
    lk, rk = left.kind, right.kind
    if lk == A and rk == AD:
        a1, p1 = left.label, left.arg
        a2, p2 = right.label, right.arg
        out = [(1, [("S", p1.scale(a1) - p2.scale(a2))], [], [right, left])]
        if a1 == a2:
            out.append((1, [], [p1 - p2], []))
            out.append((1, [], [p1 + p2], [Atom(DEF_R, 0, p1.scale(a1))]))
        else:
            out.append((1, [], [p1 - p2], [Atom(DEF_T, 0, p1.scale(a1))]))
        return out
    if lk == A and rk in (DEF_R, DEF_T):
        q, p = right.arg, left.arg
        return [(1, [("S", q - p), ("S", q + p)], [], [right, left])]
    if lk in (DEF_R, DEF_T) and rk == AD:
        q, p = left.arg, right.arg
        return [(1, [("S", q - p), ("S", q + p)], [], [right, left])]
    if lk == rk == A or lk == rk == AD:
        # x1 x2 = S(a2 p2 - a1 p1) x2 x1 for both a and a+
        s = right.arg.scale(right.label) - left.arg.scale(left.label)
        return [(1, [("S", s)], [], [right, left])]
    if left.rank == right.rank == 1:
        return [(1, [], [], [right, left])]
    raise ValueError(f"no exchange rule for {left.text()} {right.text()}")


def _first_violation(word, sort):
    for i in range(len(word) - 1):
        x, y = word[i], word[i + 1]
        if x.rank > y.rank:
            return i
        if sort and x.rank == y.rank and x.key() > y.key():
            return i
    return None


def normal_order(expr: Expression, sort=True, vacuum=False) -> Expression:
    """Creators left, defects in the middle, annihilators right.

    With sort=True, operators of equal rank are also put in ascending
    (argument, label) order, which makes the result a unique normal form.
    With vacuum=True, terms whose vacuum expectation is already known to
    vanish (creator leftmost or annihilator rightmost) are dropped early.
    """
    done, todo = [], list(expr)
    while todo:
        tm = todo.pop()
        w = tm.word
        if vacuum and w and (w[0].kind == AD or w[-1].kind == A):
            continue
        i = _first_violation(w, sort)
        if i is None:
            done.append(tm)
            continue
        for c, fac, dl, atoms in _exchange(w[i], w[i + 1]):
            todo.append(Term.make(tm.coeff * c, w[:i] + tuple(atoms) + w[i + 2:],
                                  tm.factors + tuple(fac), tm.deltas + tuple(dl)))
    return Expression(done)


def vacuum_expectation(expr: Expression) -> Expression:
    """<Omega, expr Omega> as a scalar distribution (empty words)."""
    ordered = normal_order(expr, sort=False, vacuum=True)
    out = []
    for tm in ordered:
        if any(at.kind in (A, AD) for at in tm.word):
            continue
        fac = list(tm.factors)
        for at in tm.word:
            fac.append(("R" if at.kind == DEF_R else "T", at.arg))
        out.append(Term.make(tm.coeff, (), fac, tm.deltas))
    return Expression(out)


def rt_automorphism(atom: Atom) -> Expression:
    """Reflection-transmission rewrite of a single bulk generator (never applied by default).

    a_al(p)  = t(al p) a_{-al}(p) + r(al p) a_al(-p)
    a+_al(p) = a+_{-al}(p) t(-al p) + a+_al(-p) r(-al p)   (adjoint, with r+(p) = r(-p))
    """
    al, p = atom.label, atom.arg
    if atom.kind == A:
        return Expression((Term.make(1, (Atom(DEF_T, 0, p.scale(al)), Atom(A, -al, p))),
                           Term.make(1, (Atom(DEF_R, 0, p.scale(al)), Atom(A, al, -p)))))
    if atom.kind == AD:
        return Expression((Term.make(1, (Atom(AD, -al, p), Atom(DEF_T, 0, p.scale(-al)))),
                           Term.make(1, (Atom(AD, al, -p), Atom(DEF_R, 0, p.scale(-al))))))
    raise ValueError("the automorphism acts on bulk generators only")


def rewrite_at(expr: Expression, position: int) -> Expression:
    """Apply `rt_automorphism` to the generator at `position` in every term."""
    out = []
    for tm in expr:
        if position >= len(tm.word):
            out.append(tm)
            continue
        rep = rt_automorphism(tm.word[position])
        for sub in rep:
            out.append(Term.make(tm.coeff * sub.coeff,
                                 tm.word[:position] + sub.word + tm.word[position + 1:],
                                 tm.factors, tm.deltas))
    return Expression(out)


# --- delta bookkeeping -------------------------------------------------------

class UnresolvableDelta(ValueError):
    pass


def _resolve(tm: Term, keep=()):
    """Eliminate delta factors; returns (substitution dict, remaining factors).

    Each delta removes its largest variable not listed in `keep`.
    """
    subs = {}
    deltas = list(tm.deltas)
    factors = list(tm.factors)
    while deltas:
        d = deltas.pop(0)
        for v, f in subs.items():
            d = d.substitute(v, f)
        cands = [v for v, c in d if abs(c) == 1 and v not in keep]
        if not cands:
            cands = [v for v, c in d if abs(c) == 1]
        if not cands:
            raise UnresolvableDelta(f"delta({d.text()}) cannot be resolved")
        v = max(cands)
        c = d.coeff(v)
        form = (d - Lin.var(v, c)).scale(-c)
        subs = {k: f.substitute(v, form) for k, f in subs.items()}
        subs[v] = form
    return subs, factors


def _apply_subs(arg: Lin, subs):
    for v, f in subs.items():
        arg = arg.substitute(v, f)
    return arg


def canonical_on_support(expr: Expression, keep=()) -> Counter:
    """Multiset of (coeff, factors, delta pattern) with deltas substituted into factors.

    The delta pattern records which variable was eliminated and how, so two
    expressions agree on the support of their distributions exactly when
    the multisets agree.
    """
    out = Counter()
    for tm in expr:
        if tm.word:
            raise ValueError("canonical_on_support expects a scalar expression")
        subs, factors = _resolve(tm, keep)
        fac = _clean_factors(tuple((k, _apply_subs(arg, subs)) for k, arg in factors))
        pattern = tuple(sorted((v, f) for v, f in subs.items()))
        c = complex(round(tm.coeff.real, 12), round(tm.coeff.imag, 12))
        out[(c, fac, pattern)] += 1
    return out


# --- numeric evaluation ------------------------------------------------------

def _factor_value(kind, x, params):
    if kind == "S":
        return bulk_S(x, params)
    T, R = defect_TR(x, params)
    return T if kind == "T" else R


def evaluate_smeared(expr: Expression, bindings: dict, grid, params: ModelParams):
    """Smeared value of a scalar distribution.

    bindings: variable -> callable weight w(p).  Every bound variable is
    integrated with dp/2pi over the grid; each 2 pi delta removes one of
    them.  Weights are evaluated at the substituted arguments, e.g. w(-p).
    """
    if not expr.is_scalar():
        raise ValueError("evaluate_smeared expects a scalar expression (take a vacuum expectation first)")
    total = 0j
    p, w = np.asarray(grid.p), np.asarray(grid.w) / (2 * np.pi)
    for tm in expr:
        missing = tm.variables() - set(bindings)
        if missing:
            raise ValueError(f"unbound momentum variables {sorted(missing)}")
        subs, factors = _resolve(tm)
        free = sorted(set(bindings) - set(subs))
        pieces = [(fn, subs.get(v, Lin.var(v))) for v, fn in bindings.items()]
        pieces += [(kind, _apply_subs(arg, subs)) for kind, arg in factors]
        val = complex(tm.coeff)
        for comp, items in _components(free, pieces):
            val *= _component_sum(comp, items, p, w, params)
        total += val
    return total


def _components(free, pieces):
    """Split a term into groups of free variables coupled by a common piece.

    The grid sum of a product factorizes over such groups, so a word with
    k independent variables costs k one-dimensional sums instead of M^k.
    """
    parent = {v: v for v in free}

    def root(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for _, arg in pieces:
        vs = [v for v, _ in arg]
        for v in vs[1:]:
            parent[root(v)] = root(vs[0])
    groups = {}
    for v in free:
        groups.setdefault(root(v), ([], []))[0].append(v)
    const = []
    for item, arg in pieces:
        vs = [v for v, _ in arg]
        (groups[root(vs[0])][1] if vs else const).append((item, arg))
    out = list(groups.values())
    if const:
        out.append(([], const))
    return out


def _component_sum(comp, items, p, w, params):
    values, val = {}, np.ones([1] * len(comp), dtype=complex)
    for ax, v in enumerate(comp):
        s = [1] * len(comp)
        s[ax] = len(p)
        values[v] = p.reshape(s)
        val = val * w.reshape(s)
    for item, arg in items:
        x = np.asarray(arg.evaluate(values) if arg else 0.0, dtype=float) + np.zeros(val.shape)
        val = val * (_factor_value(item, x, params) if isinstance(item, str) else item(x))
    return complex(np.sum(val))


# --- builders ----------------------------------------------------------------

def one_particle_correlator(alpha, beta):
    """<a+_alpha(p) Omega, a+_beta(q) Omega> = vev(a_alpha(p) a+_beta(q))."""
    return vacuum_expectation(Expression.word(a(alpha, "p"), ad(beta, "q")))


def two_particle_correlator(alphas, betas):
    """<a+_al1(p1) a+_al2(p2) Omega, a+_be1(q1) a+_be2(q2) Omega>.

    The bra is conjugated into the annihilator word a_al2(p2) a_al1(p1).
    """
    (a1, a2), (b1, b2) = alphas, betas
    word = Expression.word(a(a2, "p2"), a(a1, "p1"), ad(b1, "q1"), ad(b2, "q2"))
    return vacuum_expectation(word)


def reference_two_particle(alphas, betas):
    """Hand-entered eight-term display of the two-particle correlator.

    [x + y T] brackets are expanded with x = delta_ab, y = eps_ab, so the
    return value is a scalar Expression in the same conventions as
    `two_particle_correlator` (2 pi delta normalisation).
    """
    (a1, a2), (b1, b2) = alphas, betas
    P1, P2 = signed("p1", a1), signed("p2", a2)
    Q1, Q2 = signed("q1", b1), signed("q2", b2)
    p1, p2, q1, q2 = (Lin.var(v) for v in ("p1", "p2", "q1", "q2"))
    dl = lambda x, y: 1 if x == y else 0
    ep = lambda x, y: 1 - dl(x, y)

    def bracket_t(x, y, arg, extra=()):
        # [delta_xy + (extra S factors) eps_xy T(arg)] as (coeff, factors) pieces
        return [(dl(x, y), ()), (ep(x, y), tuple(extra) + (("T", arg),))]

    def bracket_r(x, y, arg):
        return [(dl(x, y), (("R", arg),))]

    S1 = ("S", P1 - Q1)
    SS = (("S", P1 - Q2), ("S", P1 + Q2))
    rows = [
        ((S1,), bracket_t(a2, b1, P2), bracket_t(a1, b2, P1), (p2 - q1, p1 - q2)),
        ((S1,), bracket_r(a2, b1, P2), bracket_t(a1, b2, P1), (p2 + q1, p1 - q2)),
        ((S1,), bracket_t(a2, b1, P2), bracket_r(a1, b2, P1), (p2 - q1, p1 + q2)),
        ((S1,), bracket_r(a2, b1, P2), bracket_r(a1, b2, P1), (p2 + q1, p1 + q2)),
        ((), bracket_t(a1, b1, P1, SS), bracket_t(a2, b2, P2), (p1 - q1, p2 - q2)),
        (SS, bracket_r(a1, b1, P1), bracket_t(a2, b2, P2), (p1 + q1, p2 - q2)),
        ((), bracket_t(a1, b1, P1, SS), bracket_r(a2, b2, P2), (p1 - q1, p2 + q2)),
        (SS, bracket_r(a1, b1, P1), bracket_r(a2, b2, P2), (p1 + q1, p2 + q2)),
    ]
    terms = []
    for pre, left, right, dls in rows:
        for (c1, f1), (c2, f2) in product(left, right):
            if c1 * c2:
                terms.append(Term.make(c1 * c2, (), pre + f1 + f2, dls))
    return Expression(terms)


# --- two-point function -------------------------------------------------------

@dataclass(frozen=True)
class TwoPoint:
    sector: tuple
    integrand: tuple      # ((coeff, factors, phase), ...), phase in {"x12", "x~12"}
    value: complex


# the four theta-sectors of the free two-point function, as (coeff, factor, phase)
REFERENCE_SECTORS = {
    (1, 1): ((1, (), "x12"), (1, (("R", Lin.var("p")),), "x~12")),
    (-1, -1): ((1, (), "x12"), (1, (("R", Lin.var("p", -1)),), "x~12")),
    (1, -1): ((1, (("T", Lin.var("p")),), "x12"),),
    (-1, 1): ((1, (("T", Lin.var("p", -1)),), "x12"),),
}


def sector_integrand(alpha1, alpha2):
    """Integrand of <Phi_al1(t1,x1) Phi+_al2(t2,x2)> in the variable p, from the algebra.

    Phi_al(t,x) ~ int dp/2pi a_al(p) e^{ipx - ip^2 t}; the q integral of
    Phi+ collapses on q = p (phase e^{ip x12}) or q = -p (phase e^{ip x~12}).
    """
    vev = vacuum_expectation(Expression.word(a(alpha1, "p"), ad(alpha2, "q")))
    rows = []
    for tm in vev:
        subs, factors = _resolve(tm, keep=("p",))
        q = subs["q"]
        phase = "x12" if q == Lin.var("p") else "x~12"
        fac = _clean_factors(tuple((k, _apply_subs(arg, subs)) for k, arg in factors))
        rows.append((int(round(tm.coeff.real)), fac, phase))
    return tuple(sorted(rows, key=repr))


def two_point(t1, x1, t2, x2, params: ModelParams, sigma=0.05):
    """<Omega, Phi(t1,x1) Phi+(t2,x2) Omega> with a Gaussian regulator exp(-sigma p^2)."""
    from scipy.integrate import quad

    if not sigma > 0:
        raise ValueError("the regulator sigma must be positive")
    if x1 == 0 and x2 == 0:
        raise ValueError("the two-point function needs (x1, x2) != (0, 0)")
    al1 = 1 if x1 > 0 else -1
    al2 = 1 if x2 > 0 else -1
    rows = sector_integrand(al1, al2)
    t12, x12, xt12 = t1 - t2, x1 - x2, x1 + x2

    def f(pp):
        tot = 0j
        for c, fac, phase in rows:
            v = c * np.exp(1j * pp * (x12 if phase == "x12" else xt12))
            for kind, arg in fac:
                v *= complex(_factor_value(kind, np.asarray(arg.evaluate({"p": pp}), dtype=float), params))
            tot += v
        return tot * np.exp(-1j * pp * pp * t12 - sigma * pp * pp) / (2 * np.pi)

    L = np.sqrt(40.0 / sigma)
    val, _ = quad(f, -L, L, complex_func=True, limit=2000, epsabs=1e-13, epsrel=1e-12)
    return TwoPoint((al1, al2), rows, complex(val))


def golden_records():
    """Canonical term lists checked in as regression goldens."""
    recs = {}
    for al, be in product((1, -1), repeat=2):
        recs[f"one_particle[{al:+d},{be:+d}]"] = one_particle_correlator(al, be).to_records()
    for al in product((1, -1), repeat=2):
        for be in product((1, -1), repeat=2):
            key = f"two_particle[{al[0]:+d}{al[1]:+d},{be[0]:+d}{be[1]:+d}]"
            recs[key] = two_particle_correlator(al, be).to_records()
    for al in product((1, -1), repeat=2):
        recs[f"two_point[{al[0]:+d},{al[1]:+d}]"] = [
            [c, [[k, list(map(list, arg))] for k, arg in fac], ph] for c, fac, ph in sector_integrand(*al)]
    return recs


# --- smeared words ------------------------------------------------------------

@lru_cache(maxsize=4096)
def _word_vacuum(atoms):
    # the reduction depends on kinds and labels only, so it is shared across bindings
    return vacuum_expectation(Expression.word(*atoms))


def smeared_word_vev(word, grid, params: ModelParams):
    """<Omega, X_1 ... X_k Omega> for smeared generators, through the rewrite rules.

    word: sequence of (kind, smear) with kind in {"a", "ad", "r", "t"}.
    For bulk kinds, smear is a pair (f_+, f_-) of callables in momentum
    space; a(f) = int dp/2pi conj(f_al) a_al and a+(f) = int dp/2pi a+_al f_al.
    For defect kinds, smear is one callable w with r(w) = int dp/2pi w r.
    """
    bulk = [i for i, (kind, _) in enumerate(word) if kind in (A, AD)]
    total = 0j
    for labels in product((1, -1), repeat=len(bulk)):
        lab = dict(zip(bulk, labels))
        atoms, bindings = [], {}
        for i, (kind, smear) in enumerate(word):
            v = f"v{i + 1}"
            if kind in (A, AD):
                al = lab[i]
                fn = smear[0] if al > 0 else smear[1]
                atoms.append(Atom(kind, al, Lin.var(v)))
                bindings[v] = (lambda x, fn=fn: np.conj(fn(x))) if kind == A else fn
            elif kind in (DEF_R, DEF_T):
                atoms.append(Atom(kind, 0, Lin.var(v)))
                bindings[v] = smear
            else:
                raise ValueError(f"unknown generator kind {kind!r}")
        n_a = sum(1 for at in atoms if at.kind == A)
        n_ad = sum(1 for at in atoms if at.kind == AD)
        if n_a != n_ad:
            continue  # particle-number grading: exactly zero
        vev = _word_vacuum(tuple(atoms))
        if vev:
            total += evaluate_smeared(vev, bindings, grid, params)
    return total
