"""Hidden tau extensions and stem-wise assembly of homotopy modules.

A hidden extension ``tau * x = y`` jumps Adams filtration, so on E-infinity
the two classes look unrelated.  Gluing along such rows turns E-infinity
classes into families, each a cyclic F2[tau]-module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .algebra import Window, parallel_map
from .grading import (
    AtomTable,
    Expression,
    MMF_ATOMS,
    Monomial,
    TriDegree,
    degree_of,
    parse_expression,
)
from .sseq import KeySet, Unknown
from .taulin import TorsionModule

TAU_STEP = TriDegree(0, 1, -1)


class HiddenExtensionError(ValueError):
    """A hidden extension row violating the degree law."""


class AmbiguousChain(ValueError):
    """Two hidden extensions leave the same class."""


@dataclass(frozen=True)
class HiddenExtension:
    source: Expression
    target: Expression
    source_degree: TriDegree
    target_degree: TriDegree
    ref: str = ""
    multiplier: str = "tau"

    @property
    def jump(self) -> int:
        """Filtration jump j, with target degree = source degree + (0, j, -1)."""
        return self.target_degree.f - self.source_degree.f

    def law_holds(self) -> bool:
        d = self.target_degree - self.source_degree
        return d.s == 0 and d.w == -1 and d.f >= 1

    def __str__(self):
        return f"tau * {self.source} = {self.target}  {self.source_degree} -> {self.target_degree}"


def make_extension(source: Expression, target: Expression, atoms: AtomTable = MMF_ATOMS, ref: str = "",
                   check: bool = True) -> HiddenExtension:
    h = HiddenExtension(source, target, degree_of(source, atoms), degree_of(target, atoms), ref)
    if check and not h.law_holds():
        raise HiddenExtensionError(
            f"hidden extension {source} -> {target}: degree difference {h.target_degree - h.source_degree} "
            "is not (0, j, -1) with j >= 1"
        )
    return h


def extensions_from_dataset(d) -> List[HiddenExtension]:
    return [make_extension(h.source, h.target, d.atoms, h.ref) for h in d.hidden_tau]


# ---------------------------------------------------------------------------
# expansion by g and Delta^8 multiples


def _monomial(text_or_expr, atoms) -> Expression:
    return parse_expression(text_or_expr, atoms) if isinstance(text_or_expr, str) else text_or_expr


def expand_hidden_extensions(base: Sequence[HiddenExtension], window: Window, atoms: AtomTable = MMF_ATOMS,
                             multipliers: Sequence[str] = ("g", "Delta^8")) -> List[HiddenExtension]:
    """Closure of the base rows under multiplication by g^a Delta^(8b), a, b >= 0.

    Only rows whose source lies in the window are emitted.  Rows are
    deduplicated and returned sorted by source degree.
    """
    mults = [(_monomial(m, atoms), degree_of(_monomial(m, atoms), atoms)) for m in multipliers]
    for _, dm in mults:
        if dm.s <= 0:
            raise ValueError("multipliers must have positive stem")
    seen: Dict[Tuple[Expression, Expression], HiddenExtension] = {}
    stack = [h for h in base if window.contains(h.source_degree)]
    while stack:
        h = stack.pop()
        key = (h.source, h.target)
        if key in seen:
            continue
        if not h.law_holds():
            raise HiddenExtensionError(f"emitted row violates the degree law: {h}")
        seen[key] = h
        for m, dm in mults:
            nd = h.source_degree + dm
            if not window.contains(nd):
                continue
            stack.append(HiddenExtension(h.source * m, h.target * m, nd, h.target_degree + dm,
                                         _times(h.ref, m, atoms)))
    return sorted(seen.values(), key=lambda h: (h.source_degree.as_tuple(), str(h.source), str(h.target)))


def _times(ref: str, m: Expression, atoms) -> str:
    return f"{ref} times {m.serialize(atoms)}" if ref else f"times {m.serialize(atoms)}"


# ---------------------------------------------------------------------------
# E-infinity knowledge


def split_tau(x: Expression) -> Tuple[int, Expression]:
    """x = tau^k * y with k maximal."""
    if not x:
        return 0, x
    k = min(t.tau for t in x.terms)
    return k, Expression([t.with_tau(t.tau - k) for t in x.terms])


@dataclass
class OrderInfo:
    order: Optional[int]  # None = tau-free
    exact: bool
    reason: str
    kind: str = "exact"  # exact, upper (order is an upper bound) or none (order 1 is a lower bound)

    @property
    def model_order(self) -> Optional[int]:
        """Order in the page model: free unless the data kills some tau-power."""
        return None if self.kind == "none" else self.order


class EinfKnowledge:
    """What the dataset says about tau-multiplication on E-infinity classes.

    Sources of information, in order: curated facts, hidden extension
    sources (tau^j y with a hidden extension means y has E-infinity order
    j + 1), and differential targets tau^k y (order at most k; g and
    Delta^8 multiples of targets are targets as well).
    """

    def __init__(self, atoms: AtomTable, generators: Sequence[Expression] = (),
                 facts: Sequence[Tuple[Expression, Optional[int]]] = (),
                 hidden: Sequence[HiddenExtension] = (),
                 targets: Sequence[Expression] = (),
                 zero_products: Sequence[Expression] = (),
                 multipliers: Sequence[str] = ("g", "Delta^8")):
        self.atoms = atoms
        self.keys = KeySet(list(generators), atoms) if generators else None
        self.facts = {f: o for f, o in facts}
        self.hidden = list(hidden)
        self.targets = [split_tau(t) for t in targets if t]
        self.zero_products = [next(iter(z.terms)) for z in zero_products if len(z) == 1]
        self.multipliers = [next(iter(_monomial(m, atoms).terms)) for m in multipliers]

    @classmethod
    def from_dataset(cls, d) -> "EinfKnowledge":
        gens = [g.expr for g in d.pages["inf"].generators] if "inf" in d.pages else []
        facts = [(x.expr, x.order) for x in d.einf_facts]
        targets = []
        for key in ("2", "3", "4"):
            p = d.pages.get(key)
            if p is not None and p.differentials:
                targets.extend(x.target for x in p.differentials)
        zero = [r.expr for r in d.relations if "inf" in r.pages and len(r.expr) == 1]
        return cls(d.atoms, gens, facts, extensions_from_dataset(d), targets, zero)

    def _is_multiple(self, y: Expression, base: Expression) -> bool:
        # y = base * g^a * Delta^(8b)?
        if len(y) != len(base) or not y:
            return False
        t0 = min(base.terms, key=lambda m: (m.key(self.atoms), m.tau))
        for t in y.terms:
            if not t0.divides(t):
                continue
            q = t.quotient(t0)
            if not self._is_periodic_unit(q):
                continue
            if base * q == y:
                return True
        return False

    def _is_periodic_unit(self, q: Monomial) -> bool:
        if q.tau:
            return False
        rem = q
        for m in self.multipliers:
            while m.divides(rem):
                rem = rem.quotient(m)
        return rem.is_unit()

    def order(self, y: Expression) -> OrderInfo:
        if y in self.facts:
            o = self.facts[y]
            return OrderInfo(o, True, "curated fact")
        for h in self.hidden:
            k, base = split_tau(h.source)
            if base == y:
                return OrderInfo(k + 1, True, f"hidden extension from tau^{k} times it")
        best = None
        for k, base in self.targets:
            if base == y or self._is_multiple(y, base):
                if best is None or k < best:
                    best = k
        if best is not None:
            if best <= 1:
                return OrderInfo(1, True, "tau times it is hit by a differential")
            return OrderInfo(best, False, f"tau^{best} times it is hit by a differential (upper bound)", "upper")
        return OrderInfo(1, False, "no tau-multiplication data (lower bound)", "none")

    def present(self, x: Expression) -> bool:
        """x is written in E-infinity generators and avoids the zero products."""
        if not x:
            return False
        for t in x.terms:
            if any(z.tau_free().divides(t.tau_free()) for z in self.zero_products):
                return False
        if self.keys is None:
            return True
        _, y = split_tau(x)
        for k, base in self.targets:
            if k == 0 and (base == y or self._is_multiple(y, base)):
                return False
        return not isinstance(self.keys.factor(x), Unknown)


def flag_missing(rows: Sequence[HiddenExtension], know: EinfKnowledge) -> List[Tuple[HiddenExtension, List[str]]]:
    """Rows with an endpoint absent from the E-infinity data, with the reason."""
    out = []
    for h in rows:
        why = []
        if not know.present(h.source):
            why.append("source not expressible in E-infinity generators")
        if not know.present(h.target):
            why.append("target not expressible in E-infinity generators")
        if why:
            out.append((h, why))
    return out


# ---------------------------------------------------------------------------
# assembly


@dataclass
class Member:
    base: Expression  # tau-free part of the class
    entry: int  # tau power at which the chain enters
    degree: TriDegree  # degree of the base class
    contribution: Optional[int]  # number of nonzero tau-powers contributed; None = tau-free
    exact: bool


@dataclass
class Family:
    lead: Expression
    degree: TriDegree
    module: TorsionModule
    members: List[Member] = field(default_factory=list)
    bound: str = ""  # "", "lower bound" or "upper bound"
    notes: List[str] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return not self.bound

    def line(self, stem: int, atoms: AtomTable = MMF_ATOMS) -> str:
        s = f"stem {stem}: lead={self.lead.serialize(atoms)} ({self.degree.f},{self.degree.w}) -> {self.module}"
        if self.bound:
            s += f"  [{self.bound}]"
        return s

    def to_json(self, atoms: AtomTable = MMF_ATOMS) -> dict:
        return {
            "lead": self.lead.serialize(atoms),
            "s": self.degree.s, "f": self.degree.f, "w": self.degree.w,
            "module": str(self.module),
            "order": "free" if self.module.order is None else self.module.order,
            "bound": self.bound or None,
            "chain": [m.base.serialize(atoms) for m in self.members],
            "notes": list(self.notes),
        }


@dataclass
class StemAssembly:
    stem: int
    families: List[Family]

    def report(self, atoms: AtomTable = MMF_ATOMS) -> str:
        return "\n".join(f.line(self.stem, atoms) for f in self.families)

    def to_json(self, atoms: AtomTable = MMF_ATOMS) -> dict:
        return {"stem": self.stem, "families": [f.to_json(atoms) for f in self.families]}


def assemble_stem(s: int, know: EinfKnowledge, hidden: Sequence[HiddenExtension],
                  extra_classes: Sequence[Expression] = ()) -> StemAssembly:
    """Glue E-infinity classes of stem s along hidden tau extensions.

    A class y entering the chain at tau^t and leaving through a hidden
    extension from tau^j y contributes j - t + 1 nonzero tau-powers; the last
    class contributes its E-infinity order minus t, or makes the family free.
    extra_classes (e.g. E-infinity generators in the stem) become singleton
    families unless already glued.
    """
    atoms = know.atoms
    rows = [h for h in hidden if h.source_degree.s == s]
    out_of: Dict[Expression, HiddenExtension] = {}
    for h in rows:
        k, base = split_tau(h.source)
        if base in out_of and out_of[base].target != h.target:
            raise AmbiguousChain(f"two hidden extensions leave {base.serialize(atoms)}: "
                                 f"{out_of[base].target.serialize(atoms)} and {h.target.serialize(atoms)}")
        out_of[base] = h
    targets = {split_tau(h.target)[1] for h in rows}
    leads = sorted((b for b in out_of if b not in targets), key=lambda b: degree_of(b, atoms).as_tuple())
    families: List[Family] = []
    used = set()
    for lead in leads:
        fam = _chain(lead, out_of, know)
        families.append(fam)
        used.update(m.base for m in fam.members)
    for x in extra_classes:
        k, base = split_tau(x)
        if base in used or not base or degree_of(base, atoms).s != s:
            continue
        info = know.order(base)
        used.add(base)
        deg = degree_of(base, atoms)
        mod = TorsionModule(info.order)
        families.append(Family(base, deg, mod, [Member(base, 0, deg, info.order, info.exact)],
                               bound=_bound_name([info]), notes=[info.reason]))
    families.sort(key=lambda f: (f.degree.as_tuple(), str(f.lead)))
    return StemAssembly(s, families)


def _chain(lead: Expression, out_of: Dict[Expression, HiddenExtension], know: EinfKnowledge) -> Family:
    atoms = know.atoms
    members: List[Member] = []
    notes = []
    infos: List[OrderInfo] = []
    base, entry = lead, 0
    total = 0
    free = False
    seen = set()
    while True:
        if base in seen:
            raise AmbiguousChain(f"hidden extensions form a cycle through {base.serialize(atoms)}")
        seen.add(base)
        deg = degree_of(base, atoms)
        h = out_of.get(base)
        if h is not None:
            j, _ = split_tau(h.source)
            n = j - entry + 1
            if n < 1:
                raise AmbiguousChain(f"hidden extension from tau^{j} {base.serialize(atoms)} precedes its entry tau^{entry}")
            members.append(Member(base, entry, deg, n, True))
            total += n
            entry, base = split_tau(h.target)
            continue
        info = know.order(base)
        infos.append(info)
        notes.append(f"{base.serialize(atoms)}: {info.reason}")
        if info.order is None:
            members.append(Member(base, entry, deg, None, info.exact))
            free = True
        else:
            n = info.order - entry
            if n < 1:
                raise AmbiguousChain(f"{base.serialize(atoms)} is entered at tau^{entry} but has order {info.order}")
            members.append(Member(base, entry, deg, n, info.exact))
            total += n
        break
    mod = TorsionModule(None if free else total)
    return Family(lead, degree_of(lead, atoms), mod, members, bound=_bound_name(infos), notes=notes)


def _bound_name(infos: Sequence[OrderInfo]) -> str:
    kinds = {i.kind for i in infos if not i.exact}
    if not kinds:
        return ""
    if kinds == {"upper"}:
        return "upper bound"
    if kinds == {"none"}:
        return "lower bound"
    return "bounds only"


def assemble_stems(stems: Iterable[int], know: EinfKnowledge, hidden: Sequence[HiddenExtension],
                   extra_classes: Sequence[Expression] = (), workers: Optional[int] = None) -> List[StemAssembly]:
    stems = list(stems)
    return parallel_map(_assemble_task, [(s, know, hidden, extra_classes) for s in stems], workers)


def _assemble_task(args):
    s, know, hidden, extra = args
    return assemble_stem(s, know, hidden, extra)


# ---------------------------------------------------------------------------
# tau inversion


def set_tau_one(x: Expression) -> Expression:
    """Image under tau -> 1 (terms that become equal cancel mod 2)."""
    return Expression([t.tau_free() for t in x.terms])


def invert_tau(data) -> list:
    """Classical (tau-inverted) data.

    Accepts a StemAssembly (free families survive as one class each), a list
    of (TorsionModule, Expression) pairs, or a list of expressions/rows whose
    names are mapped under tau -> 1.
    """
    if isinstance(data, StemAssembly):
        return [set_tau_one(f.lead) for f in data.families if f.module.is_free]
    out = []
    for item in data:
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], TorsionModule):
            if item[0].is_free:
                out.append(set_tau_one(item[1]))
        elif isinstance(item, Expression):
            out.append(set_tau_one(item))
        elif hasattr(item, "expr"):
            out.append(set_tau_one(item.expr))
        else:
            raise TypeError(f"cannot tau-invert {item!r}")
    return out


def hidden_report(rows: Sequence[HiddenExtension], know: Optional[EinfKnowledge] = None,
                  atoms: AtomTable = MMF_ATOMS) -> List[str]:
    flagged = {id(h): why for h, why in flag_missing(rows, know)} if know is not None else {}
    lines = []
    for h in rows:
        line = (f"{h.source_degree} tau * {h.source.serialize(atoms)} = {h.target.serialize(atoms)} "
                f"{h.target_degree} jump {h.jump}")
        if id(h) in flagged:
            line += "  [" + "; ".join(flagged[id(h)]) + "]"
        lines.append(line)
    return lines
