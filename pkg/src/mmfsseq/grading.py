"""Tridegrees, atoms, monomials and homogeneous expressions.

Expressions are mod-2 sums of monomials in named atoms (tau included as
a power on each monomial).  The parser reads the plain/TeX-ish table
notation, e.g. ``"Delta c + tau a g"``, ``"h_1^2 (Delta c + tau a g)"``
or ``"\\tau^2 \\Delta^4 a g"``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

from .taulin import TauScalar


@dataclass(frozen=True, order=True)
class TriDegree:
    s: int
    f: int
    w: int

    def __add__(self, other: "TriDegree") -> "TriDegree":
        return TriDegree(self.s + other.s, self.f + other.f, self.w + other.w)

    def __sub__(self, other: "TriDegree") -> "TriDegree":
        return TriDegree(self.s - other.s, self.f - other.f, self.w - other.w)

    def __neg__(self):
        return TriDegree(-self.s, -self.f, -self.w)

    def __mul__(self, k: int) -> "TriDegree":
        return TriDegree(self.s * k, self.f * k, self.w * k)

    __rmul__ = __mul__

    def __iter__(self):
        return iter((self.s, self.f, self.w))

    def __getitem__(self, i):
        return (self.s, self.f, self.w)[i]

    def as_tuple(self) -> tuple:
        return (self.s, self.f, self.w)

    def __str__(self):
        return f"({self.s},{self.f},{self.w})"


ZERO_DEGREE = TriDegree(0, 0, 0)
TAU_DEGREE = TriDegree(0, 0, -1)
TAU_NAME = "tau"

_ALIASES = {
    "\\Delta": "Delta", "Δ": "Delta", "Delta": "Delta",
    "\\tau": "tau", "τ": "tau", "tau": "tau",
}
_SUBSCRIPT = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")


def canonical_atom_name(name: str) -> str:
    name = name.strip()
    if name in _ALIASES:
        return _ALIASES[name]
    m = re.fullmatch(r"h_?\{?(\d+)\}?", name.translate(_SUBSCRIPT))
    if m:
        return f"h_{int(m.group(1))}"
    return name


@dataclass(frozen=True)
class Atom:
    name: str
    degree: TriDegree


class AtomTable:
    """Ordered collection of atoms.  tau is always present and always first."""

    def __init__(self, atoms: Iterable[Tuple[str, TriDegree]]):
        self._order: Dict[str, int] = {}
        self._deg: Dict[str, TriDegree] = {}
        items = list(atoms)
        names = [canonical_atom_name(n) for n, _ in items]
        if TAU_NAME not in names:
            items = [(TAU_NAME, TAU_DEGREE)] + items
        for name, deg in items:
            name = canonical_atom_name(name)
            if not isinstance(deg, TriDegree):
                deg = TriDegree(*deg)
            if name in self._deg:
                raise ValueError(f"duplicate atom name {name!r}")
            if name == TAU_NAME:
                if deg != TAU_DEGREE:
                    raise ValueError(f"tau must have degree {TAU_DEGREE}")
            elif deg.f < 1:
                raise ValueError(f"atom {name!r} must have filtration >= 1")
            self._order[name] = len(self._order)
            self._deg[name] = deg

    def __contains__(self, name):
        return name in self._deg

    def __iter__(self) -> Iterator[Atom]:
        for n in self._order:
            yield Atom(n, self._deg[n])

    def __len__(self):
        return len(self._order)

    def names(self, include_tau: bool = False) -> list:
        return [n for n in self._order if include_tau or n != TAU_NAME]

    def degree(self, name: str) -> TriDegree:
        return self._deg[name]

    def index(self, name: str) -> int:
        return self._order[name]

    def items(self):
        return [(n, self._deg[n]) for n in self._order]

    def __eq__(self, other):
        return isinstance(other, AtomTable) and self.items() == other.items()

    def __repr__(self):
        return "AtomTable(" + ", ".join(f"{n}{d}" for n, d in self.items()) + ")"


MMF_ATOM_DEGREES = [
    ("tau", TriDegree(0, 0, -1)),
    ("h_0", TriDegree(0, 1, 0)),
    ("h_1", TriDegree(1, 1, 1)),
    ("h_2", TriDegree(3, 1, 2)),
    ("c", TriDegree(8, 3, 5)),
    ("P", TriDegree(8, 4, 4)),
    ("u", TriDegree(11, 3, 7)),
    ("a", TriDegree(12, 3, 6)),
    ("d", TriDegree(14, 4, 8)),
    ("n", TriDegree(15, 3, 8)),
    ("e", TriDegree(17, 4, 10)),
    ("g", TriDegree(20, 4, 12)),
    ("Delta", TriDegree(24, 4, 12)),
]

MMF_ATOMS = AtomTable(MMF_ATOM_DEGREES)


# ---------------------------------------------------------------------------
# monomials and expressions


@dataclass(frozen=True)
class Monomial:
    """Product of atoms times tau^tau.  exps is sorted by atom name."""

    exps: Tuple[Tuple[str, int], ...] = ()
    tau: int = 0

    @classmethod
    def make(cls, exps: Mapping[str, int], tau: int = 0) -> "Monomial":
        clean = {}
        for k, v in exps.items():
            if v < 0:
                raise ValueError("negative exponent")
            if k == TAU_NAME:
                tau += v
            elif v:
                clean[k] = clean.get(k, 0) + v
        return cls(tuple(sorted(clean.items())), tau)

    @property
    def exponents(self) -> dict:
        return dict(self.exps)

    def __mul__(self, other: "Monomial") -> "Monomial":
        e = dict(self.exps)
        for k, v in other.exps:
            e[k] = e.get(k, 0) + v
        return Monomial(tuple(sorted(e.items())), self.tau + other.tau)

    def __pow__(self, k: int) -> "Monomial":
        return Monomial(tuple((n, v * k) for n, v in self.exps), self.tau * k)

    def tau_free(self) -> "Monomial":
        return Monomial(self.exps, 0)

    def with_tau(self, k: int) -> "Monomial":
        return Monomial(self.exps, k)

    def is_unit(self) -> bool:
        return not self.exps and self.tau == 0

    def divides(self, other: "Monomial") -> bool:
        oe = dict(other.exps)
        return self.tau <= other.tau and all(oe.get(k, 0) >= v for k, v in self.exps)

    def quotient(self, other: "Monomial") -> "Monomial":
        """self / other, assuming other divides self."""
        e = dict(self.exps)
        for k, v in other.exps:
            e[k] -= v
            if e[k] < 0:
                raise ValueError("monomial does not divide")
        if self.tau < other.tau:
            raise ValueError("monomial does not divide")
        return Monomial.make(e, self.tau - other.tau)

    def degree(self, atoms: AtomTable) -> TriDegree:
        s = f = w = 0
        for k, v in self.exps:
            d = atoms.degree(k)
            s += v * d.s
            f += v * d.f
            w += v * d.w
        return TriDegree(s, f, w - self.tau)

    def key(self, atoms: AtomTable) -> tuple:
        """Exponent vector in table order (tau excluded)."""
        v = [0] * len(atoms)
        for k, e in self.exps:
            v[atoms.index(k)] = e
        v.pop(atoms.index(TAU_NAME))
        return tuple(v)

    def serialize(self, atoms: AtomTable) -> str:
        parts = []
        for k, v in sorted(self.exps, key=lambda kv: atoms.index(kv[0])):
            parts.append(k if v == 1 else f"{k}^{v}")
        if self.tau:
            parts.append(TAU_NAME if self.tau == 1 else f"{TAU_NAME}^{self.tau}")
        return " ".join(parts) if parts else "1"

    def __str__(self):
        return self.serialize(MMF_ATOMS) if all(k in MMF_ATOMS for k, _ in self.exps) else repr(self)


ONE_MONOMIAL = Monomial()


class Expression:
    """Mod-2 sum of distinct monomials."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Monomial] = ()):
        acc = set()
        for t in terms:
            if t in acc:
                acc.remove(t)
            else:
                acc.add(t)
        self.terms = frozenset(acc)

    @classmethod
    def monomial(cls, m: Monomial) -> "Expression":
        return cls([m])

    @classmethod
    def from_coefficients(cls, coeffs: Mapping[Monomial, TauScalar]) -> "Expression":
        """Build sum c_m(tau) * m from tau-polynomial coefficients."""
        out = []
        for m, c in coeffs.items():
            bits = c.bits if isinstance(c, TauScalar) else int(c)
            k = 0
            while bits:
                if bits & 1:
                    out.append(m.with_tau(m.tau + k))
                bits >>= 1
                k += 1
        return cls(out)

    def tau_coefficients(self) -> Dict[Monomial, TauScalar]:
        """Group terms by tau-free part: self = sum c_m(tau) m."""
        acc: Dict[Monomial, int] = {}
        for t in self.terms:
            m = t.tau_free()
            acc[m] = acc.get(m, 0) ^ (1 << t.tau)
        return {m: TauScalar(b) for m, b in acc.items() if b}

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "Expression") -> "Expression":
        out = Expression()
        out.terms = self.terms ^ other.terms
        return out

    __sub__ = __add__

    def __mul__(self, other) -> "Expression":
        if isinstance(other, Monomial):
            return Expression([t * other for t in self.terms])
        if isinstance(other, TauScalar):
            out = []
            bits = other.bits
            k = 0
            while bits:
                if bits & 1:
                    out.extend(t.with_tau(t.tau + k) for t in self.terms)
                bits >>= 1
                k += 1
            return Expression(out)
        if isinstance(other, Expression):
            return Expression([a * b for a in self.terms for b in other.terms])
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Expression":
        out = Expression([ONE_MONOMIAL])
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Expression) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def sorted_terms(self, atoms: AtomTable) -> list:
        # larger exponent vectors (table order) first, then lower tau power
        return sorted(self.terms, key=lambda m: (tuple(-x for x in m.key(atoms)), m.tau))

    def serialize(self, atoms: AtomTable = MMF_ATOMS) -> str:
        if not self.terms:
            return "0"
        return " + ".join(m.serialize(atoms) for m in self.sorted_terms(atoms))

    def __str__(self):
        try:
            return self.serialize(MMF_ATOMS)
        except KeyError:
            return repr(self)

    def __repr__(self):
        return "Expression(" + " + ".join(sorted(repr(t) for t in self.terms)) + ")"


def product(factors: Iterable[Expression]) -> Expression:
    out = Expression([ONE_MONOMIAL])
    for f in factors:
        out = out * f
    return out


# ---------------------------------------------------------------------------
# degrees


@dataclass(frozen=True)
class Homogeneity:
    ok: bool
    degree: Optional[TriDegree] = None
    witness: Optional[Tuple[Tuple[Monomial, TriDegree], Tuple[Monomial, TriDegree]]] = None

    def __bool__(self):
        return self.ok


class DegreeError(ValueError):
    pass


def degree_of(x, atoms: AtomTable = MMF_ATOMS) -> TriDegree:
    if isinstance(x, Monomial):
        return x.degree(atoms)
    h = is_homogeneous(x, atoms)
    if not h.ok:
        (m1, d1), (m2, d2) = h.witness
        raise DegreeError(f"inhomogeneous expression: {m1.serialize(atoms)} has degree {d1} but {m2.serialize(atoms)} has {d2}")
    if h.degree is None:
        raise DegreeError("the zero expression has no degree")
    return h.degree


def is_homogeneous(x: Expression, atoms: AtomTable = MMF_ATOMS) -> Homogeneity:
    """True (with the common degree) iff all terms share one degree.  Zero is homogeneous with degree None."""
    first = None
    for m in x.sorted_terms(atoms):
        d = m.degree(atoms)
        if first is None:
            first = (m, d)
        elif d != first[1]:
            return Homogeneity(False, None, (first, (m, d)))
    return Homogeneity(True, first[1] if first else None, None)


# ---------------------------------------------------------------------------
# parsing


class ParseError(ValueError):
    """Base class for expression syntax errors."""

    def __init__(self, msg: str, term: str = ""):
        super().__init__(msg)
        self.term = term


class UnknownAtomError(ParseError):
    pass


class MalformedExponentError(ParseError):
    pass


class InhomogeneousError(ParseError):
    pass


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<lpar>[(\[])|(?P<rpar>[)\]])|(?P<plus>\+)|(?P<caret>\^)|
        (?P<brace>\{[^}]*\})|(?P<num>\d+)|
        (?P<name>\\?Delta|\\?tau|Δ|τ|h_?\{?\d+\}?|h[₀-₉]+|\\?[A-Za-z])|
        (?P<other>\S)
    )""",
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text: str, atoms: AtomTable):
        self.text = text
        self.atoms = atoms
        self.toks = _tokenize(text)
        self.i = 0
        # (base, exponent, parenthesized) factors of every parsed term, innermost first
        self.structure = []

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def term_text(self, start: int) -> str:
        # text of the additive term containing position start
        lo = self.text.rfind("+", 0, start) + 1
        hi = self.text.find("+", start)
        hi = len(self.text) if hi < 0 else hi
        return self.text[lo:hi].strip()

    def parse(self):
        terms = [self.parse_term()]
        while self.peek()[0] == "plus":
            self.take()
            terms.append(self.parse_term())
        kind, val, pos = self.peek()
        if kind is not None:
            raise ParseError(f"unexpected {val!r} at position {pos} in {self.text!r}", self.term_text(pos))
        return terms

    def parse_term(self):
        start = self.peek()[2]
        factors = []
        while self.peek()[0] in ("name", "num", "lpar"):
            factors.append(self.parse_factor())
        if not factors:
            kind, val, pos = self.peek()
            raise ParseError(f"empty term at position {pos} in {self.text!r}", self.term_text(pos))
        self.structure.append([(b, k, grp) for b, k, grp in factors])
        return (start, product(b ** k for b, k, _ in factors))

    def parse_exponent(self, base_text: str, pos: int) -> int:
        kind, val, p = self.take()
        bad = MalformedExponentError(f"malformed exponent after {base_text!r} in term {self.term_text(pos)!r}", self.term_text(pos))
        if kind == "num":
            k = int(val)
        elif kind == "brace":
            inner = val[1:-1].strip()
            if not inner.isdigit():
                raise bad
            k = int(inner)
        else:
            raise bad
        if k < 1:
            raise bad
        return k

    def parse_factor(self):
        kind, val, pos = self.take()
        if kind == "lpar":
            inner = [self.parse_term()]
            while self.peek()[0] == "plus":
                self.take()
                inner.append(self.parse_term())
            k2, v2, p2 = self.take()
            if k2 != "rpar":
                raise ParseError(f"unbalanced parenthesis at position {pos} in {self.text!r}", self.term_text(pos))
            base = Expression([t for _, e in inner for t in e.terms])
            base_text = self.text[pos:p2 + 1]
        elif kind == "num":
            if val != "1" and val != "0":
                raise ParseError(f"numeric factor {val!r} is not allowed (mod 2 only 0 and 1)", self.term_text(pos))
            base = Expression([ONE_MONOMIAL]) if val == "1" else Expression()
            base_text = val
        else:
            name = canonical_atom_name(val)
            if name not in self.atoms:
                raise UnknownAtomError(f"unknown atom {val!r} in term {self.term_text(pos)!r}", self.term_text(pos))
            base = Expression([Monomial.make({name: 1})])
            base_text = val
        k = 1
        if self.peek()[0] == "caret":
            self.take()
            k = self.parse_exponent(base_text, pos)
        return (base, k, kind == "lpar")


def parse_expression(text: str, atoms: AtomTable = MMF_ATOMS, homogeneous: bool = True) -> Expression:
    """Parse table notation into a canonical Expression.

    Raises UnknownAtomError, MalformedExponentError or InhomogeneousError
    (all ParseError subclasses) naming the offending term.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", "")
    p = _Parser(text, atoms)
    terms = p.parse()
    total = Expression([t for _, e in terms for t in e.terms])
    if homogeneous:
        h = is_homogeneous(total, atoms)
        if not h.ok:
            (m1, d1), (m2, d2) = h.witness
            raise InhomogeneousError(
                f"inhomogeneous sum in {text!r}: term {m1.serialize(atoms)} has degree {d1}, "
                f"term {m2.serialize(atoms)} has degree {d2}",
                m2.serialize(atoms),
            )
    return total


def parse_structured(text: str, atoms: AtomTable = MMF_ATOMS) -> list:
    """Top-level additive terms, each a list of factors (base, exponent, parenthesized).

    Keeps the product grouping written in the text, e.g. ``h_1 (Delta u + tau n g)``
    gives one term with factors h_1 and the parenthesized sum.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", "")
    p = _Parser(text, atoms)
    p.structure = []
    terms = []
    terms.append(p.parse_term())
    top = [p.structure[-1]]
    while p.peek()[0] == "plus":
        p.take()
        terms.append(p.parse_term())
        top.append(p.structure[-1])
    kind, val, pos = p.peek()
    if kind is not None:
        raise ParseError(f"unexpected {val!r} at position {pos} in {text!r}", p.term_text(pos))
    return top


def parse_relation(text: str, atoms: AtomTable = MMF_ATOMS):
    """Split ``lhs = rhs`` (or a bare expression meaning ``= 0``) into structured sides."""
    if text.count("=") > 1:
        raise ParseError(f"more than one '=' in {text!r}", text)
    if "=" in text:
        lhs, rhs = text.split("=")
        return parse_structured(lhs, atoms), parse_structured(rhs, atoms)
    return parse_structured(text, atoms), []


def structured_value(terms: list) -> Expression:
    out = Expression()
    for factors in terms:
        out = out + product(b ** k for b, k, _ in factors)
    return out


def parse_monomial(text: str, atoms: AtomTable = MMF_ATOMS) -> Monomial:
    e = parse_expression(text, atoms)
    if len(e) != 1:
        raise ParseError(f"{text!r} is not a single monomial", text)
    return next(iter(e))
