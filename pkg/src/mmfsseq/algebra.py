"""Finitely presented trigraded commutative algebras over F2[tau].

Everything is done one (stem, filtration) bidegree at a time.  In a fixed
(s, f) the degree pieces of all weights together form a finitely generated
F2[tau]-module; its free basis is the set of tau-free atom monomials with
that (s, f), and a homogeneous element is a vector of tau-polynomial
coefficients.  Quotients by relation multiples are then computed with the
Smith normal form machinery from taulin.

A presentation may optionally name a list of generators (expressions in the
atoms).  The algebra is then the F2[tau]-subalgebra they span inside the
atom polynomial ring, divided by relation x generator-monomial multiples.
This is how spectral sequence pages (whose generators are things like
``tau e`` or ``Delta c + tau a g``) are modelled.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .grading import (
    AtomTable,
    Expression,
    Monomial,
    ONE_MONOMIAL,
    TAU_NAME,
    TriDegree,
    degree_of,
    is_homogeneous,
    parse_expression,
)
from .taulin import (
    TauMatrix,
    TauScalar,
    TorsionModule,
    _is_tau_power,
    _pdeg,
    _pdivmod,
    _pmul,
    solve_linear,
    subquotient_decomposition,
)


@dataclass(frozen=True)
class Window:
    """Box of bidegrees: s_min <= s <= s_max and f <= f_max (None = unbounded)."""

    s_max: int
    f_max: Optional[int] = None
    s_min: int = 0

    def contains(self, deg) -> bool:
        s, f = deg[0], deg[1]
        if s < self.s_min or s > self.s_max:
            return False
        return self.f_max is None or f <= self.f_max

    def __contains__(self, deg):
        return self.contains(deg)

    def to_json(self) -> dict:
        d = {"s_min": self.s_min, "s_max": self.s_max}
        if self.f_max is not None:
            d["f_max"] = self.f_max
        return d

    @classmethod
    def from_json(cls, d) -> Optional["Window"]:
        if d is None:
            return None
        return cls(s_max=d["s_max"], f_max=d.get("f_max"), s_min=d.get("s_min", 0))


@dataclass(frozen=True)
class Presentation:
    atoms: AtomTable
    relations: Tuple[Expression, ...] = ()
    completeness: Optional[Window] = None
    generators: Optional[Tuple[Expression, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(r for r in self.relations if r))
        for r in self.relations:
            h = is_homogeneous(r, self.atoms)
            if not h.ok:
                raise ValueError(f"relation {r.serialize(self.atoms)} is not homogeneous")
        if self.generators is not None:
            gens = tuple(self.generators)
            for g in gens:
                d = degree_of(g, self.atoms)
                if d.f < 1:
                    raise ValueError(f"generator {g.serialize(self.atoms)} must have filtration >= 1")
            object.__setattr__(self, "generators", gens)

    @classmethod
    def from_strings(cls, atoms: AtomTable, relations: Sequence[str] = (), completeness=None, generators=None):
        rels = tuple(parse_expression(r, atoms) for r in relations)
        gens = None if generators is None else tuple(parse_expression(g, atoms) for g in generators)
        return cls(atoms, rels, completeness, gens)

    def generator_list(self) -> Tuple[Expression, ...]:
        if self.generators is not None:
            return self.generators
        return tuple(Expression([Monomial.make({n: 1})]) for n in self.atoms.names())

    def is_complete_at(self, deg) -> bool:
        return self.completeness is not None and self.completeness.contains(deg)

    def __hash__(self):
        return hash((tuple(self.atoms.items()), self.relations, self.completeness, self.generators))


class PartialKnowledgeError(ValueError):
    """Raised when an answer would rely on relations outside the completeness window."""


# ---------------------------------------------------------------------------
# monomial enumeration


def _reachable(degs: Sequence[TriDegree], s: int, f: int) -> List[List[int]]:
    """reach[i][g] is a bitmask over t <= s of the (t, g) reachable by degs[i:]."""
    n = len(degs)
    full = (1 << (s + 1)) - 1
    reach = [None] * (n + 1)
    last = [0] * (f + 1)
    last[0] = 1
    reach[n] = last
    for i in range(n - 1, -1, -1):
        d = degs[i]
        cur = list(last)
        for g in range(f + 1):
            k = 1
            while k * d.f <= g:
                src = last[g - k * d.f]
                if src:
                    cur[g] |= (src << (k * d.s)) & full
                k += 1
        reach[i] = cur
        last = cur
    return reach


def _exponent_vectors(degs: Sequence[TriDegree], s: int, f: int):
    """All exponent vectors e with sum e_i * (s_i, f_i) = (s, f).  Requires every f_i >= 1."""
    n = len(degs)
    out = []
    if f < 0:
        return out
    nonneg_s = all(d.s >= 0 for d in degs)
    if nonneg_s and s < 0:
        return out
    # with nonnegative stems, prune by suffix reachability
    reach = _reachable(degs, s, f) if nonneg_s else None
    vec = [0] * n

    def rec(i, rs, rf):
        if reach is not None and not (reach[i][rf] >> rs) & 1:
            return
        if i == n:
            if rs == 0 and rf == 0:
                out.append(tuple(vec))
            return
        d = degs[i]
        k = 0
        while k * d.f <= rf:
            if nonneg_s and k * d.s > rs:
                break
            vec[i] = k
            rec(i + 1, rs - k * d.s, rf - k * d.f)
            k += 1
        vec[i] = 0

    rec(0, s, f)
    return out


def _atom_monomials_sf(atoms: AtomTable, s: int, f: int) -> List[Monomial]:
    names = atoms.names()
    degs = [atoms.degree(n) for n in names]
    out = []
    for v in _exponent_vectors(degs, s, f):
        out.append(Monomial.make({n: k for n, k in zip(names, v) if k}))
    return out


def monomial_order_key(m: Monomial, atoms: AtomTable) -> tuple:
    """Sort key: larger monomials first.  A lexicographically smaller exponent
    vector (in table order) counts as a larger monomial."""
    return m.key(atoms)


def enumerate_monomials(p: Presentation, deg) -> List[Monomial]:
    """All monomials in the atoms (tau-power included) of exactly degree deg."""
    deg = TriDegree(*deg)
    if deg.f < 0:
        return []
    out = []
    for m in _atom_monomials_sf(p.atoms, deg.s, deg.f):
        k = m.degree(p.atoms).w - deg.w
        if k >= 0:
            out.append(m.with_tau(k))
    out.sort(key=lambda m: monomial_order_key(m, p.atoms))
    return out


# ---------------------------------------------------------------------------
# vectors in a fixed (s, f)


class Ambient:
    """Free F2[tau]-module on the tau-free atom monomials of bidegree (s, f)."""

    def __init__(self, atoms: AtomTable, s: int, f: int):
        self.atoms = atoms
        self.s, self.f = s, f
        mons = _atom_monomials_sf(atoms, s, f)
        mons.sort(key=lambda m: monomial_order_key(m, atoms))
        self.basis: List[Monomial] = mons
        self.index = {m: i for i, m in enumerate(mons)}
        self.weights = [m.degree(atoms).w for m in mons]

    def __len__(self):
        return len(self.basis)

    def vector(self, x: Expression) -> List[int]:
        v = [0] * len(self.basis)
        for t in x.terms:
            i = self.index.get(t.tau_free())
            if i is None:
                raise ValueError(f"term {t.serialize(self.atoms)} is not in bidegree ({self.s},{self.f})")
            v[i] ^= 1 << t.tau
        return v

    def expression(self, v: Sequence[int]) -> Expression:
        terms = []
        for i, c in enumerate(v):
            c = c.bits if isinstance(c, TauScalar) else c
            k = 0
            while c:
                if c & 1:
                    terms.append(self.basis[i].with_tau(k))
                c >>= 1
                k += 1
        return Expression(terms)

    def weight_of(self, v: Sequence[int]) -> Optional[int]:
        """Weight of a homogeneous vector (None for zero)."""
        for i, c in enumerate(v):
            c = c.bits if isinstance(c, TauScalar) else c
            if c:
                return self.weights[i] - (_pdeg(c & -c))
        return None


def generator_monomials(p: Presentation, s: int, f: int) -> List[Tuple[Tuple[int, ...], Expression]]:
    """Products of generators in bidegree (s, f): (exponent vector, expanded expression)."""
    gens = p.generator_list()
    degs = [degree_of(g, p.atoms) for g in gens]
    out = []
    for v in _exponent_vectors(degs, s, f):
        e = Expression([ONE_MONOMIAL])
        for g, k in zip(gens, v):
            for _ in range(k):
                e = e * g
        out.append((v, e))
    return out


def relation_multiples(p: Presentation, s: int, f: int) -> List[Expression]:
    """relation x (generator or atom) monomial, landing in bidegree (s, f)."""
    out = []
    for r in p.relations:
        d = degree_of(r, p.atoms)
        for _, q in generator_monomials(p, s - d.s, f - d.f):
            e = r * q
            if e:
                out.append(e)
    return out


@dataclass
class GradedPiece:
    """Cyclic summands of a degree piece.  complete=False marks an upper-bound model."""

    degree: Tuple[int, ...]
    summands: List[Tuple[TorsionModule, Expression]] = field(default_factory=list)
    complete: bool = True

    def __iter__(self):
        return iter(self.summands)

    def __len__(self):
        return len(self.summands)

    def __getitem__(self, i):
        return self.summands[i]

    @property
    def upper_bound(self) -> bool:
        return not self.complete


def quotient_summands(amb: Ambient, spanning: Sequence[Expression], killed: Sequence[Expression]):
    """Decompose span(spanning)/span(killed) inside the ambient; returns [(module, expr, weight)]."""
    cyc = [amb.vector(x) for x in spanning]
    bnd = [amb.vector(x) for x in killed]
    cyc_cols = [[TauScalar(c) for c in v] for v in cyc]
    bnd_cols = [[TauScalar(c) for c in v] for v in bnd]
    out = []
    for mod, rep in subquotient_decomposition(cyc_cols, bnd_cols, len(amb)):
        raw = [c.bits for c in rep]
        out.append((mod, amb.expression(raw), amb.weight_of(raw)))
    out.sort(key=lambda t: (-t[2], t[1].serialize(amb.atoms)))
    return out


def module_at(p: Presentation, s: int, f: int) -> GradedPiece:
    """All summands in bidegree (s, f), every weight."""
    amb = Ambient(p.atoms, s, f)
    if p.generators is None:
        spanning = [Expression([m]) for m in amb.basis]
    else:
        spanning = [e for _, e in generator_monomials(p, s, f)]
    killed = relation_multiples(p, s, f)
    summ = quotient_summands(amb, spanning, killed)
    return GradedPiece((s, f), [(m, e) for m, e, _ in summ], p.is_complete_at((s, f)))


def graded_basis(p: Presentation, deg) -> GradedPiece:
    """Cyclic summands generated exactly in tridegree deg."""
    deg = TriDegree(*deg)
    piece = module_at(p, deg.s, deg.f)
    keep = [(m, e) for m, e in piece.summands if degree_of(e, p.atoms) == deg]
    return GradedPiece(deg.as_tuple(), keep, piece.complete)


def parallel_map(func, items: Iterable, workers: Optional[int] = None) -> list:
    """Map a pure per-degree function; uses processes when workers > 1."""
    items = list(items)
    if not workers or workers <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, items))


# ---------------------------------------------------------------------------
# normal forms


def _column_echelon(cols: List[List[int]], n: int) -> List[Tuple[int, List[int]]]:
    """Echelon form of the column span: list of (pivot row, column), pivot rows increasing.

    Columns have zeros above their pivot row.  Euclid column operations only.
    """
    work = [list(c) for c in cols if any(c)]
    out = []
    for i in range(n):
        live = [c for c in work if c[i]]
        if not live:
            continue
        rest = [c for c in work if not c[i]]
        # gcd-combine the live columns on row i
        while len(live) > 1:
            live.sort(key=lambda c: (_pdeg(c[i]), c))
            piv = live[0]
            nxt = [piv]
            for c in live[1:]:
                q, r = _pdivmod(c[i], piv[i])
                for k in range(n):
                    if piv[k]:
                        c[k] ^= _pmul(q, piv[k])
                if c[i]:
                    nxt.append(c)
                elif any(c):
                    rest.append(c)
            live = nxt
        out.append((i, live[0]))
        work = rest
    return out


def _reduce(v: List[int], ech) -> List[int]:
    v = list(v)
    for i, col in ech:
        if v[i]:
            q, _ = _pdivmod(v[i], col[i])
            if q:
                for k in range(len(v)):
                    if col[k]:
                        v[k] ^= _pmul(q, col[k])
    return v


@lru_cache(maxsize=4096)
def _echelon_cached(p: Presentation, s: int, f: int):
    amb = Ambient(p.atoms, s, f)
    cols = [amb.vector(e) for e in relation_multiples(p, s, f)]
    return amb, _column_echelon(cols, len(amb))


def normal_form(x: Expression, p: Presentation, allow_partial: bool = False) -> Expression:
    """Canonical representative of x modulo the relation submodule.

    Zero exactly when x lies in the span of relation multiples.  Outside the
    completeness window a PartialKnowledgeError is raised unless
    allow_partial is set.
    """
    if not x:
        return Expression()
    deg = degree_of(x, p.atoms)
    if not allow_partial and not p.is_complete_at(deg):
        raise PartialKnowledgeError(
            f"degree {deg} lies outside the completeness window; relations there are not known to be complete"
        )
    amb, ech = _echelon_cached(p, deg.s, deg.f)
    return amb.expression(_reduce(amb.vector(x), ech))


def in_relation_ideal(x: Expression, p: Presentation) -> bool:
    """Membership test in the relation submodule (no window check)."""
    return not normal_form(x, p, allow_partial=True)


def ideal_coefficients(x: Expression, p: Presentation):
    """Write x as an F2[tau]-combination of relation multiples via solve_linear.

    Returns (multiples, coefficients) or None when x is not in the span.
    """
    if not x:
        return [], []
    deg = degree_of(x, p.atoms)
    amb = Ambient(p.atoms, deg.s, deg.f)
    mults = relation_multiples(p, deg.s, deg.f)
    if not mults:
        return None
    cols = [amb.vector(e) for e in mults]
    m = TauMatrix._from_raw(len(amb), len(cols), [[c[i] for c in cols] for i in range(len(amb))])
    sol = solve_linear(m, [TauScalar(c) for c in amb.vector(x)])
    if sol is None:
        return None
    return mults, sol


# ---------------------------------------------------------------------------
# exact tridegree slices over F2
#
# In a single tridegree the module is an F2-vector space spanned by tau^k * m.
# Large systems (high stems) are handled here with bitset elimination.


@lru_cache(maxsize=8192)
def _generator_monomials_cached(p: Presentation, s: int, f: int):
    return tuple(generator_monomials(p, s, f))


def exact_generator_products(p: Presentation, deg) -> List[Expression]:
    """tau-multiples of generator products landing exactly in deg."""
    deg = TriDegree(*deg)
    out = []
    for _, e in _generator_monomials_cached(p, deg.s, deg.f):
        if not e:
            continue
        k = degree_of(e, p.atoms).w - deg.w
        if k >= 0:
            out.append(e * TauScalar(1 << k))
    return out


def exact_relation_multiples(p: Presentation, deg) -> List[Expression]:
    deg = TriDegree(*deg)
    out = []
    for r in p.relations:
        d = degree_of(r, p.atoms)
        for _, q in _generator_monomials_cached(p, deg.s - d.s, deg.f - d.f):
            e = r * q
            if not e:
                continue
            k = degree_of(e, p.atoms).w - deg.w
            if k >= 0:
                out.append(e * TauScalar(1 << k))
    return out


class F2Echelon:
    """Incremental row echelon form of F2 vectors stored as int bitmasks.

    Optionally tracks, for each stored vector, which input combination produced it.
    """

    def __init__(self):
        self.piv: Dict[int, Tuple[int, int]] = {}

    def reduce(self, v: int, combo: int = 0) -> Tuple[int, int]:
        while v:
            lb = v.bit_length() - 1
            hit = self.piv.get(lb)
            if hit is None:
                break
            v ^= hit[0]
            combo ^= hit[1]
        return v, combo

    def add(self, v: int, combo: int = 0) -> Tuple[bool, int]:
        """Insert v; returns (independent, residual combination when dependent)."""
        r, c = self.reduce(v, combo)
        if r:
            self.piv[r.bit_length() - 1] = (r, c)
            return True, 0
        return False, c

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0

    @property
    def rank(self) -> int:
        return len(self.piv)


class MonomialIndex:
    """Assigns bit positions to monomials on first sight."""

    def __init__(self):
        self.pos: Dict[Monomial, int] = {}
        self.mons: List[Monomial] = []

    def vec(self, x: Expression) -> int:
        v = 0
        for t in x.terms:
            i = self.pos.get(t)
            if i is None:
                i = len(self.mons)
                self.pos[t] = i
                self.mons.append(t)
            v ^= 1 << i
        return v

    def expr(self, v: int) -> Expression:
        out = []
        i = 0
        while v:
            if v & 1:
                out.append(self.mons[i])
            v >>= 1
            i += 1
        return Expression(out)
