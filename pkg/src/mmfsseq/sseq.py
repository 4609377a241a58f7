"""Spectral sequence pages: Leibniz propagation, validation, d^2 obligations,
inference of differentials from relations, forced relations and page turning.

Differentials are stored on generators only.  Any other value is obtained
by writing the element as a tau-multiple of products of generators and
applying the Leibniz rule (mod 2, so d(x^2) = 0 and there are no signs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .algebra import (
    Ambient,
    F2Echelon,
    GradedPiece,
    MonomialIndex,
    PartialKnowledgeError,
    Presentation,
    Window,
    exact_generator_products,
    exact_relation_multiples,
    generator_monomials,
    in_relation_ideal,
    parallel_map,
    quotient_summands,
    relation_multiples,
)
from .grading import (
    AtomTable,
    Expression,
    Monomial,
    ONE_MONOMIAL,
    TriDegree,
    degree_of,
    is_homogeneous,
    parse_expression,
    parse_relation,
    parse_structured,
)
from .taulin import InconsistentInput, TauMatrix, TauScalar, TorsionModule, kernel_basis


def differential_shift(r: int) -> TriDegree:
    """Degree of d_r: (-1, r, 0)."""
    return TriDegree(-1, r, 0)


ONE = Expression([ONE_MONOMIAL])
ZERO = Expression()


# ---------------------------------------------------------------------------
# data types


@dataclass
class DifferentialTable:
    """d_r values on generators.  An empty expression is a zero differential;
    a generator missing from the table has an unknown differential."""

    page: int
    values: Dict[Expression, Expression] = field(default_factory=dict)

    def __post_init__(self):
        if self.page < 2:
            raise ValueError("differential pages start at r = 2")

    @property
    def shift(self) -> TriDegree:
        return differential_shift(self.page)

    def get(self, key: Expression) -> Optional[Expression]:
        return self.values.get(key)

    def __len__(self):
        return len(self.values)

    def items(self):
        return self.values.items()


@dataclass(frozen=True)
class Unknown:
    """Outcome for a differential that cannot be determined from the data."""

    term: Expression
    reason: str

    def __str__(self):
        return f"unknown: {self.term} ({self.reason})"


@dataclass
class GeneratorRow:
    expr: Expression
    degree: TriDegree
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.degree, TriDegree):
            self.degree = TriDegree(*self.degree)
        if not self.label:
            self.label = str(self.expr)


class Page:
    """A page: presentation (generators + relations + window) and d_r on the generators.

    differentials is None for the E-infinity page.
    """

    def __init__(self, presentation: Presentation, generators: Sequence[GeneratorRow],
                 differentials: Optional[DifferentialTable] = None):
        atoms = presentation.atoms
        for row in generators:
            h = is_homogeneous(row.expr, atoms)
            if not h.ok or h.degree != row.degree:
                raise ValueError(f"generator {row.label} is not homogeneous at its listed degree {row.degree}")
        gens = tuple(row.expr for row in generators)
        if presentation.generators != gens:
            presentation = Presentation(atoms, presentation.relations, presentation.completeness, gens)
        self.presentation = presentation
        self.generators = list(generators)
        self.differentials = differentials
        self._keys = KeySet(gens, atoms)

    @property
    def atoms(self) -> AtomTable:
        return self.presentation.atoms

    @property
    def r(self) -> Optional[int]:
        return None if self.differentials is None else self.differentials.page

    def with_relations(self, extra: Iterable[Expression]) -> "Page":
        rels = list(self.presentation.relations)
        seen = set(rels)
        for e in extra:
            if e and e not in seen:
                rels.append(e)
                seen.add(e)
        p = Presentation(self.atoms, tuple(rels), self.presentation.completeness, self.presentation.generators)
        return Page(p, self.generators, self.differentials)

    def with_window(self, window: Optional[Window]) -> "Page":
        p = Presentation(self.atoms, self.presentation.relations, window, self.presentation.generators)
        return Page(p, self.generators, self.differentials)

    def value_of(self, i: int) -> Optional[Expression]:
        if self.differentials is None:
            return ZERO
        return self.differentials.get(self.generators[i].expr)


# ---------------------------------------------------------------------------
# factorization into generators


class KeySet:
    """Factorizes atom expressions as tau-multiples of products of key expressions."""

    def __init__(self, keys: Sequence[Expression], atoms: AtomTable):
        self.keys = list(keys)
        self.atoms = atoms
        self.index: Dict[Expression, int] = {}
        for i, k in enumerate(self.keys):
            self.index.setdefault(k, i)
        self.mono = [(i, next(iter(k.terms))) for i, k in enumerate(self.keys)
                     if len(k) == 1 and not next(iter(k.terms)).tau_free().is_unit()]
        self.comp = [(i, k) for i, k in enumerate(self.keys) if len(k) > 1]
        self._cache: Dict[Monomial, object] = {}

    def extended(self, extra: Expression) -> Tuple["KeySet", int]:
        if extra in self.index:
            return self, self.index[extra]
        ks = KeySet(self.keys + [extra], self.atoms)
        return ks, len(self.keys)

    def factor_monomial(self, t: Monomial):
        """(tau exponent, {key index: exponent}) or None."""
        if t in self._cache:
            return self._cache[t]
        mono = self.mono
        memo = {}

        def rec(j, rem):
            if not rem.exps:
                return (rem.tau, {})
            if j == len(mono):
                return None
            key = (j, rem)
            if key in memo:
                return memo[key]
            i, kap = mono[j]
            powers = [rem]
            while kap.divides(powers[-1]):
                powers.append(powers[-1].quotient(kap))
            res = None
            for k in range(len(powers) - 1, -1, -1):
                sub = rec(j + 1, powers[k])
                if sub is not None:
                    tau, ex = sub
                    if k:
                        ex = dict(ex)
                        ex[i] = k
                    res = (tau, ex)
                    break
            memo[key] = res
            return res

        out = rec(0, t)
        self._cache[t] = out
        return out

    def factor(self, x: Expression):
        """List of (tau exponent, {key index: exponent}) summing to x, or Unknown."""
        remaining = set(x.terms)
        out = []
        while remaining:
            t = min(remaining, key=lambda m: (m.key(self.atoms), m.tau))
            done = False
            for i, G in self.comp:
                for ell in sorted(G.terms, key=lambda m: (m.key(self.atoms), m.tau)):
                    if not ell.divides(t):
                        continue
                    q = t.quotient(ell)
                    prods = [g * q for g in G.terms]
                    if not all(pp in remaining for pp in prods):
                        continue
                    fq = self.factor_monomial(q)
                    if fq is None:
                        continue
                    tau, ex = fq
                    ex = dict(ex)
                    ex[i] = ex.get(i, 0) + 1
                    out.append((tau, ex))
                    remaining.difference_update(prods)
                    done = True
                    break
                if done:
                    break
            if done:
                continue
            ft = self.factor_monomial(t)
            if ft is None:
                return Unknown(Expression([t]), "not a product of generators")
            out.append(ft)
            remaining.remove(t)
        return out

    def power(self, i: int, k: int) -> Expression:
        return self.keys[i] ** k


def _tau(k: int) -> TauScalar:
    return TauScalar(1 << k)


def _d_product(ks: KeySet, tau: int, ex: Mapping[int, int], values, formal: Optional[int]):
    """Leibniz on tau^tau * prod key_i^ex_i.  Returns (known, coefficient of d(formal)) or Unknown."""
    known = ZERO
    coeff = ZERO
    for i, k in ex.items():
        if k % 2 == 0:
            continue
        rest = ONE * _tau(tau)
        for j, kj in ex.items():
            e = kj - 1 if j == i else kj
            if e:
                rest = rest * ks.power(j, e)
        if i == formal:
            coeff = coeff + rest
            continue
        v = values(i)
        if v is None:
            return Unknown(ks.keys[i], "no differential recorded for this generator")
        if isinstance(v, Unknown):
            return v
        known = known + rest * v
    return known, coeff


def _d_expression(ks: KeySet, x: Expression, values, formal: Optional[int] = None):
    if not x:
        return ZERO, ZERO
    if x in ks.index:
        i = ks.index[x]
        if i == formal:
            return ZERO, ONE
        v = values(i)
        if v is None:
            return Unknown(x, "no differential recorded for this generator")
        return v, ZERO
    fac = ks.factor(x)
    if isinstance(fac, Unknown):
        return fac
    known, coeff = ZERO, ZERO
    for tau, ex in fac:
        r = _d_product(ks, tau, ex, values, formal)
        if isinstance(r, Unknown):
            return r
        known = known + r[0]
        coeff = coeff + r[1]
    return known, coeff


def _d_structured(ks: KeySet, terms, values, formal: Optional[int] = None):
    """Leibniz on a parsed product structure, keeping parenthesized groups intact."""
    known, coeff = ZERO, ZERO
    for factors in terms:
        mono = ONE
        groups = []
        for base, k, grp in factors:
            if grp:
                groups.append((base, k))
            else:
                mono = mono * (base ** k)
        if not mono:
            continue
        parts = [(mono, 1)] + groups
        derivs = []
        for base, k in parts:
            if k % 2 == 0:
                derivs.append(None)
                continue
            r = _d_expression(ks, base, values, formal)
            if isinstance(r, Unknown):
                return r
            derivs.append(r)
        for j, (base, k) in enumerate(parts):
            if derivs[j] is None:
                continue
            rest = ONE
            for i, (b2, k2) in enumerate(parts):
                e = k2 - 1 if i == j else k2
                if e:
                    rest = rest * (b2 ** e)
            known = known + rest * derivs[j][0]
            coeff = coeff + rest * derivs[j][1]
    return known, coeff


def _table_values(ks: KeySet, table: Optional[DifferentialTable]):
    def values(i):
        if table is None:
            return ZERO
        return table.get(ks.keys[i])
    return values


def leibniz_differential(x: Union[Monomial, Expression, str], table: DifferentialTable,
                         page: Optional[Page] = None, atoms: Optional[AtomTable] = None):
    """d(x) by the Leibniz rule from the generator values in table.

    The generators used for factorization are the page generators when a
    page is given, otherwise the keys of the table.  Returns an Expression,
    or an Unknown carrying the term that could not be resolved.
    """
    if page is not None:
        atoms = page.atoms
        ks = page._keys
    else:
        if atoms is None:
            from .grading import MMF_ATOMS
            atoms = MMF_ATOMS
        ks = KeySet(list(table.values.keys()), atoms)
    if isinstance(x, str):
        lhs, rhs = parse_relation(x, atoms)
        r = _d_structured(ks, lhs + rhs, _table_values(ks, table))
    else:
        if isinstance(x, Monomial):
            x = Expression([x])
        r = _d_expression(ks, x, _table_values(ks, table))
    if isinstance(r, Unknown):
        return r
    return r[0]


# ---------------------------------------------------------------------------
# validation


@dataclass
class RowCheck:
    source: Expression
    target: Expression
    source_degree: Optional[TriDegree]
    target_degree: Optional[TriDegree]
    expected: Optional[TriDegree]
    ok: bool
    message: str = ""


def validate_differential_table(table: DifferentialTable, atoms: AtomTable,
                                listed: Optional[Mapping[Expression, TriDegree]] = None) -> List[RowCheck]:
    """Degree law deg(target) = deg(source) + (-1, r, 0) for every nonzero row.

    listed optionally gives the tabulated source degree, which must then agree
    with the computed one as well.
    """
    out = []
    for src, tgt in table.items():
        msg = ""
        try:
            ds = degree_of(src, atoms)
        except ValueError as e:
            out.append(RowCheck(src, tgt, None, None, None, False, str(e)))
            continue
        if listed is not None and src in listed and listed[src] != ds:
            msg = f"listed degree {listed[src]} differs from computed {ds}"
        if not tgt:
            out.append(RowCheck(src, tgt, ds, None, None, not msg, msg))
            continue
        exp = ds + table.shift
        try:
            dt = degree_of(tgt, atoms)
        except ValueError as e:
            out.append(RowCheck(src, tgt, ds, None, exp, False, str(e)))
            continue
        ok = dt == exp and not msg
        if dt != exp:
            msg = (msg + "; " if msg else "") + f"target degree {dt} but expected {exp}"
        out.append(RowCheck(src, tgt, ds, dt, exp, ok, msg))
    return out


# ---------------------------------------------------------------------------
# d^2 and forced relations


@dataclass
class Obligation:
    generator: Expression
    expression: Union[Expression, Unknown]
    degree: Optional[TriDegree]
    resolved: Optional[bool]  # None: outside the completeness window or unknown

    def __str__(self):
        state = {True: "resolved", False: "UNRESOLVED", None: "unknown"}[self.resolved]
        return f"d(d({self.generator})) = {self.expression}  [{state}]"


def check_d_squared(page: Page) -> List[Obligation]:
    """Nonzero Leibniz values d(d(x)) over the generators x of the page."""
    out = []
    if page.differentials is None:
        return out
    ks = page._keys
    vals = _table_values(ks, page.differentials)
    for row in page.generators:
        v = page.differentials.get(row.expr)
        if not v:
            continue
        r = _d_expression(ks, v, vals)
        if isinstance(r, Unknown):
            out.append(Obligation(row.expr, r, None, None))
            continue
        dd = r[0]
        if not dd:
            continue
        deg = degree_of(dd, page.atoms)
        resolved = in_relation_ideal(dd, page.presentation)
        if not resolved and not page.presentation.is_complete_at(deg):
            resolved = None
        out.append(Obligation(row.expr, dd, deg, resolved))
    return out


@dataclass
class ForcedRelation:
    expression: Expression
    origin: str


def forced_relations_detail(page: Page, next_rows: Sequence[GeneratorRow]):
    """(forced relations with their origin, rows whose d could not be evaluated)."""
    out: List[ForcedRelation] = []
    seen = set()
    unresolved: List[Tuple[GeneratorRow, Unknown]] = []
    for ob in check_d_squared(page):
        if isinstance(ob.expression, Unknown):
            continue
        if ob.expression not in seen:
            seen.add(ob.expression)
            out.append(ForcedRelation(ob.expression, f"d^2 of {ob.generator}"))
    if page.differentials is None:
        return out, unresolved
    ks = page._keys
    vals = _table_values(ks, page.differentials)
    for row in next_rows:
        r = _d_expression(ks, row.expr, vals)
        if isinstance(r, Unknown):
            unresolved.append((row, r))
            continue
        e = r[0]
        if e and e not in seen:
            seen.add(e)
            out.append(ForcedRelation(e, f"survival of {row.label}"))
    return out, unresolved


def forced_relations(page: Page, next_rows: Sequence[GeneratorRow]) -> List[Expression]:
    return [f.expression for f in forced_relations_detail(page, next_rows)[0]]


# ---------------------------------------------------------------------------
# inference


@dataclass
class Inference:
    unknown: Expression
    degree: TriDegree
    coefficient: Expression
    rhs: Expression
    value: Optional[Expression] = None
    unique: Optional[bool] = None
    alternatives: List[Expression] = field(default_factory=list)
    inconsistent: bool = False
    complete: bool = True
    message: str = ""

    def __str__(self):
        if self.inconsistent:
            return f"inconsistent: {self.message}"
        u = {True: "unique", False: "not unique", None: "uniqueness not certified"}[self.unique]
        return f"d({self.unknown}) = {self.value}  [{u}]"


def _parse_key(x, atoms) -> Expression:
    if isinstance(x, str):
        return parse_expression(x, atoms)
    if isinstance(x, Monomial):
        return Expression([x])
    return x


def infer_differential(relation, known: DifferentialTable, unknown, page: Page,
                       max_columns: int = 60000) -> Inference:
    """Solve c * d(unknown) = rhs obtained by applying Leibniz to a relation.

    relation: text ``lhs = rhs`` (product grouping is respected) or an Expression.
    The equation is solved in the exact target tridegree of the page model;
    uniqueness is claimed only when multiplication by c is injective there
    modulo the page relations.
    """
    atoms = page.atoms
    ukey = _parse_key(unknown, atoms)
    ks, fidx = page._keys.extended(ukey)
    vals = _table_values(ks, known)
    if isinstance(relation, str):
        lhs, rhs = parse_relation(relation, atoms)
        res = _d_structured(ks, lhs + rhs, vals, fidx)
    else:
        res = _d_expression(ks, relation, vals, fidx)
    xdeg = degree_of(ukey, atoms) + known.shift
    if isinstance(res, Unknown):
        return Inference(ukey, xdeg, ZERO, ZERO, inconsistent=False, unique=None,
                         message=f"cannot apply Leibniz: {res}")
    rhs_e, coeff = res
    inf = Inference(ukey, xdeg, coeff, rhs_e)
    if not coeff:
        if rhs_e and not in_relation_ideal(rhs_e, page.presentation):
            inf.inconsistent = True
            inf.message = "the unknown drops out and the remaining terms do not vanish"
        else:
            inf.message = "the unknown drops out of the relation; no information"
        return inf
    cdeg = degree_of(coeff, atoms)
    tdeg = xdeg + cdeg
    if rhs_e and degree_of(rhs_e, atoms) != tdeg:
        inf.inconsistent = True
        inf.message = f"degree mismatch: rhs at {degree_of(rhs_e, atoms)}, expected {tdeg}"
        return inf
    pres = page.presentation
    inf.complete = pres.is_complete_at(xdeg) and pres.is_complete_at(tdeg)

    cands = exact_generator_products(pres, xdeg)
    rel_t = exact_relation_multiples(pres, tdeg)
    rel_x = exact_relation_multiples(pres, xdeg)
    if len(cands) + len(rel_t) > max_columns:
        inf.message = "system too large"
        return inf
    idx = MonomialIndex()
    ech = F2Echelon()
    for r in rel_t:
        ech.add(idx.vec(r))
    kernel_combos = []
    for j, c in enumerate(cands):
        ok, combo = ech.add(idx.vec(coeff * c), 1 << j)
        if not ok:
            kernel_combos.append(combo)
    resid, combo = ech.reduce(idx.vec(rhs_e))
    if resid:
        inf.inconsistent = True
        inf.message = "no element of the target degree satisfies the constraint"
        return inf

    def combine(bits):
        out = ZERO
        j = 0
        while bits:
            if bits & 1:
                out = out + cands[j]
            bits >>= 1
            j += 1
        return out

    # reduce modulo relations in the source degree for a canonical answer
    xi = MonomialIndex()
    ex = F2Echelon()
    for r in rel_x:
        ex.add(xi.vec(r))
    value = combine(combo)
    inf.value = _reduce_expr(value, xi, ex)
    alts = []
    for kc in kernel_combos:
        k = combine(kc)
        v, _ = ex.reduce(xi.vec(k))
        if v:
            ok, _ = ex.add(v)
            if ok:
                alts.append(inf.value + xi.expr(v))
    inf.alternatives = alts
    inf.unique = not alts
    return inf


def _reduce_expr(x: Expression, idx: MonomialIndex, ech: F2Echelon) -> Expression:
    # full reduction so the result does not depend on insertion order
    v = idx.vec(x)
    out = 0
    while v:
        lb = v.bit_length() - 1
        hit = ech.piv.get(lb)
        if hit is None:
            out ^= 1 << lb
            v ^= 1 << lb
        else:
            v ^= hit[0]
    return idx.expr(out)


def equal_in_page(x: Expression, y: Expression, page: Page) -> bool:
    """x == y modulo the page relations (exact tridegree)."""
    diff = x + y
    if not diff:
        return True
    deg = degree_of(diff, page.atoms)
    idx = MonomialIndex()
    ech = F2Echelon()
    for r in exact_relation_multiples(page.presentation, deg):
        ech.add(idx.vec(r))
    return ech.contains(idx.vec(diff))


# ---------------------------------------------------------------------------
# page turning


@dataclass
class Summand:
    module: TorsionModule
    rep: Expression
    degree: TriDegree

    def __str__(self):
        return f"{self.degree} {self.rep} -> {self.module}"


@dataclass
class NextPage:
    r: Optional[int]
    window: Window
    homology: Dict[Tuple[int, int], List[Summand]]
    indecomposables: List[Summand]
    complete: bool = True
    errors: Dict[Tuple[int, int], str] = field(default_factory=dict)

    def at(self, deg) -> List[Summand]:
        deg = TriDegree(*deg)
        return [x for x in self.homology.get((deg.s, deg.f), []) if x.degree == deg]

    def indecomposables_at(self, deg) -> List[Summand]:
        deg = TriDegree(*deg)
        return [x for x in self.indecomposables if x.degree == deg]


class UnresolvedObligations(RuntimeError):
    def __init__(self, obligations):
        self.obligations = obligations
        super().__init__("d^2 obligations unresolved in the window: " + "; ".join(str(o) for o in obligations))


def _gm_differential(page: Page, vec: Tuple[int, ...]) -> Expression:
    """d of a generator product given by its exponent vector."""
    gens = page.presentation.generators
    out = ZERO
    for i, k in enumerate(vec):
        if k % 2 == 0:
            continue
        v = page.value_of(i)
        if v is None:
            raise ValueError(f"no differential recorded for generator {page.generators[i].label}")
        if not v:
            continue
        rest = v
        for j, kj in enumerate(vec):
            e = kj - 1 if j == i else kj
            if e:
                rest = rest * (gens[j] ** e)
        out = out + rest
    return out


def _cycles_and_boundaries(page: Page, s: int, f: int):
    """(cycles, boundaries) as expressions in bidegree (s, f) of the current page."""
    pres = page.presentation
    rel_here = relation_multiples(pres, s, f)
    gms = generator_monomials(pres, s, f)
    if page.r is None:
        return [e for _, e in gms] + rel_here, list(rel_here)
    r = page.r
    amb_t = Ambient(page.atoms, s - 1, f + r)
    d_cols = [amb_t.vector(_gm_differential(page, v)) for v, _ in gms]
    rel_t = [amb_t.vector(e) for e in relation_multiples(pres, s - 1, f + r)]
    cols = d_cols + rel_t
    cycles = list(rel_here)
    if not gms:
        pass
    elif len(amb_t) == 0 or not any(any(c) for c in cols):
        cycles += [e for _, e in gms]
    else:
        m = TauMatrix._from_raw(len(amb_t), len(cols), [[c[i] for c in cols] for i in range(len(amb_t))])
        for kv in kernel_basis(m):
            y = [c.bits for c in kv[: len(gms)]]
            z = ZERO
            for j, yj in enumerate(y):
                if yj:
                    z = z + gms[j][1] * TauScalar(yj)
            if z:
                cycles.append(z)
    bnd = list(rel_here)
    for v, _ in generator_monomials(pres, s + 1, f - r):
        b = _gm_differential(page, v)
        if b:
            bnd.append(b)
    return cycles, bnd


def page_homology(page: Page, s: int, f: int) -> List[Summand]:
    cycles, bnd = _cycles_and_boundaries(page, s, f)
    amb = Ambient(page.atoms, s, f)
    out = []
    for mod, rep, w in quotient_summands(amb, cycles, bnd):
        out.append(Summand(mod, rep, TriDegree(s, f, w)))
    return out


def _homology_task(args):
    page, s, f = args
    try:
        return (s, f), page_homology(page, s, f), None
    except (InconsistentInput, ValueError) as e:
        return (s, f), [], str(e)


def turn_page(page: Page, window: Optional[Window] = None, workers: Optional[int] = None,
              indecomposables: bool = True, check_obligations: bool = True) -> NextPage:
    """Homology of (E_r, d_r) in every bidegree of the window, plus indecomposables.

    The window defaults to the completeness window of the page presentation;
    computing outside it is allowed but the result is flagged incomplete.
    """
    pres = page.presentation
    if window is None:
        window = pres.completeness
    if window is None or window.f_max is None:
        raise ValueError("turn_page needs a window with a filtration bound")
    c = pres.completeness
    complete = (c is not None and c.s_min <= window.s_min and window.s_max <= c.s_max
                and (c.f_max is None or window.f_max <= c.f_max))
    if check_obligations:
        bad = [o for o in check_d_squared(page)
               if o.resolved is False and o.degree is not None and window.contains(o.degree)]
        if bad:
            raise UnresolvedObligations(bad)
    tasks = [(page, s, f) for s in range(window.s_min, window.s_max + 1) for f in range(0, window.f_max + 1)]
    results = parallel_map(_homology_task, tasks, workers)
    hom: Dict[Tuple[int, int], List[Summand]] = {}
    errors = {}
    for key, summ, err in results:
        hom[key] = summ
        if err:
            errors[key] = err
    nxt = NextPage(None if page.r is None else page.r + 1, window, hom, [], complete, errors)
    if indecomposables:
        for s in range(window.s_min, window.s_max + 1):
            for f in range(1, window.f_max + 1):
                if (s, f) in errors:
                    continue
                try:
                    nxt.indecomposables.extend(_indecomposables_at(page, hom, s, f, window))
                except (InconsistentInput, ValueError) as e:
                    errors[(s, f)] = str(e)
    return nxt


def _indecomposables_at(page: Page, hom, s: int, f: int, window: Window) -> List[Summand]:
    if not hom.get((s, f)):
        return []
    prods = []
    for s1 in range(0, s + 1):
        for f1 in range(1, f):
            s2, f2 = s - s1, f - f1
            if (s1, f1) > (s2, f2):
                continue
            a = hom.get((s1, f1))
            b = hom.get((s2, f2))
            if not a or not b:
                continue
            for x in a:
                for y in b:
                    p = x.rep * y.rep
                    if p:
                        prods.append(p)
    if (s, f) not in hom:
        return []
    cycles, bnd = _cycles_and_boundaries(page, s, f)
    amb = Ambient(page.atoms, s, f)
    out = []
    for mod, rep, w in quotient_summands(amb, cycles, bnd + prods):
        out.append(Summand(mod, rep, TriDegree(s, f, w)))
    return out


# ---------------------------------------------------------------------------
# generator comparison and collapse


@dataclass
class GeneratorDiff:
    missing: List[Tuple[TriDegree, str]] = field(default_factory=list)
    extra: List[Tuple[TriDegree, str]] = field(default_factory=list)
    agree: List[Tuple[TriDegree, str, str]] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.missing and not self.extra

    def __str__(self):
        lines = [f"missing {d} {lab}" for d, lab in self.missing]
        lines += [f"extra {d} {lab}" for d, lab in self.extra]
        lines += [f"agree {d} {a} ~ {b}" for d, a, b in self.agree]
        return "\n".join(lines) if lines else "(no differences)"


def compare_generators(computed: Sequence, expected: Sequence, window: Optional[Window] = None) -> GeneratorDiff:
    """Match computed indecomposables against table rows by tridegree (with multiplicity)."""
    def norm(x):
        if isinstance(x, Summand):
            return x.degree, str(x.rep)
        if isinstance(x, GeneratorRow):
            return x.degree, x.label
        d, lab = x
        return TriDegree(*d), str(lab)

    comp = [norm(x) for x in computed]
    exp = [norm(x) for x in expected]
    if window is not None:
        comp = [c for c in comp if window.contains(c[0])]
        exp = [e for e in exp if window.contains(e[0])]
    diff = GeneratorDiff()
    pool = list(comp)
    for d, lab in sorted(exp, key=lambda t: (t[0].as_tuple(), t[1])):
        hit = next((i for i, c in enumerate(pool) if c[0] == d), None)
        if hit is None:
            diff.missing.append((d, lab))
        else:
            diff.agree.append((d, lab, pool[hit][1]))
            pool.pop(hit)
    diff.extra = sorted(pool, key=lambda t: (t[0].as_tuple(), t[1]))
    return diff


def collapse_violations(rows: Sequence[GeneratorRow], r_min: int = 5, r_max: Optional[int] = None):
    """Pairs (x, y, r) of rows with deg(y) = deg(x) + (-1, r, 0) for some r >= r_min."""
    out = []
    for x in rows:
        for y in rows:
            dd = y.degree - x.degree
            if dd.s == -1 and dd.w == 0 and dd.f >= r_min and (r_max is None or dd.f <= r_max):
                out.append((x, y, dd.f))
    return out
