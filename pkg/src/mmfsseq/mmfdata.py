"""Dataset schema, loader, validator and periodicity extender.

A dataset is one JSON document with keys ``atoms``, ``relations``, ``pages``,
``hidden_tau``, ``einf_facts`` and ``torsion_legend``.  Expressions are kept
both as the transcribed text (for byte-exact round trips) and parsed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from .algebra import Presentation, Window
from .grading import (
    AtomTable,
    Expression,
    ParseError,
    TriDegree,
    canonical_atom_name,
    is_homogeneous,
    parse_expression,
    parse_relation,
    structured_value,
)
from .sseq import (
    ZERO,
    DifferentialTable,
    GeneratorRow,
    Page,
    validate_differential_table,
)

PAGE_KEYS = ("2", "3", "4", "inf")
UNSUPPORTED_KINDS = ("hidden_2", "hidden_eta", "hidden_nu")
TOP_KEYS = ("atoms", "relations", "pages", "hidden_tau", "einf_facts", "torsion_legend")


class DatasetError(ValueError):
    """Schema violation; the message names the offending row."""


def page_number(key: str) -> Optional[int]:
    return None if key == "inf" else int(key)


def period_for(key: str) -> int:
    """Delta exponent of the periodicity: Delta^4 on E2, Delta^8 afterwards."""
    return 4 if key == "2" else 8


# ---------------------------------------------------------------------------
# rows


@dataclass(frozen=True)
class GenRow:
    s: int
    f: int
    w: int
    text: str
    expr: Expression
    source: str = ""

    @property
    def degree(self) -> TriDegree:
        return TriDegree(self.s, self.f, self.w)

    def where(self) -> str:
        return f"{self.source or 'row'} at ({self.s},{self.f},{self.w})"


@dataclass(frozen=True)
class DiffRow:
    source_text: str
    target_text: str
    source: Expression
    target: Expression
    source_ref: str = ""


@dataclass(frozen=True)
class RelationRow:
    text: str
    expr: Expression
    pages: tuple
    window: Optional[Window] = None
    source: str = ""


@dataclass(frozen=True)
class HiddenRow:
    s: int
    f: int
    w: int
    source_text: str
    target_text: str
    source: Expression
    target: Expression
    ref: str = ""

    @property
    def degree(self) -> TriDegree:
        return TriDegree(self.s, self.f, self.w)


@dataclass(frozen=True)
class FactRow:
    s: int
    f: int
    w: int
    text: str
    expr: Expression
    order: Optional[int]  # None = tau-free
    ref: str = ""


@dataclass
class PageData:
    key: str
    window: Optional[Window]
    completeness: Optional[Window]
    generators: List[GenRow]
    differentials: Optional[List[DiffRow]]  # None on E-infinity

    @property
    def r(self) -> Optional[int]:
        return page_number(self.key)

    def differential_of(self, expr: Expression) -> Optional[Expression]:
        if self.differentials is None:
            return None
        for d in self.differentials:
            if d.source == expr:
                return d.target
        return ZERO


@dataclass
class Dataset:
    atoms: AtomTable
    relations: List[RelationRow] = field(default_factory=list)
    pages: Dict[str, PageData] = field(default_factory=dict)
    hidden_tau: List[HiddenRow] = field(default_factory=list)
    einf_facts: List[FactRow] = field(default_factory=list)
    torsion_legend: Dict[str, str] = field(default_factory=dict)

    def page(self, key) -> PageData:
        return self.pages[normalize_page_key(key)]

    def legend(self) -> Dict[Optional[int], str]:
        """Torsion legend keyed by order (None = free)."""
        return {(None if k == "free" else int(k)): v for k, v in self.torsion_legend.items()}


def normalize_page_key(key) -> str:
    k = str(key).strip().lower()
    if k in ("inf", "infinity", "oo", "∞", "e_inf", "einf"):
        return "inf"
    if k not in PAGE_KEYS:
        raise KeyError(f"unknown page {key!r}; expected one of {', '.join(PAGE_KEYS)}")
    return k


# ---------------------------------------------------------------------------
# loading


def relation_value(text: str, atoms: AtomTable) -> Expression:
    """``lhs = rhs`` or a bare expression, as the expression that must vanish."""
    lhs, rhs = parse_relation(text, atoms)
    return structured_value(lhs) + structured_value(rhs)


def _parse(text, atoms, where: str, homogeneous=True) -> Expression:
    if not isinstance(text, str):
        raise DatasetError(f"{where}: expression must be a string, got {text!r}")
    try:
        return parse_expression(text, atoms, homogeneous=homogeneous)
    except ParseError as e:
        raise DatasetError(f"{where}: {e}") from e


def _int(row, key, where):
    v = row.get(key) if isinstance(row, dict) else None
    if not isinstance(v, int) or isinstance(v, bool):
        raise DatasetError(f"{where}: field {key!r} must be an integer")
    return v


def _require(row, keys, where):
    if not isinstance(row, dict):
        raise DatasetError(f"{where}: expected an object")
    missing = [k for k in keys if k not in row]
    if missing:
        raise DatasetError(f"{where}: missing field(s) {', '.join(missing)}")


def _window(d, where):
    if d is None:
        return None
    try:
        return Window.from_json(d)
    except (KeyError, TypeError) as e:
        raise DatasetError(f"{where}: bad window {d!r}") from e


def from_json(doc: dict) -> Dataset:
    if not isinstance(doc, dict):
        raise DatasetError("dataset must be a JSON object")
    for k in UNSUPPORTED_KINDS:
        if k in doc:
            raise DatasetError(f"unsupported data kind {k!r}: only hidden tau extensions are supported")
    unknown = [k for k in doc if k not in TOP_KEYS]
    if unknown:
        raise DatasetError(f"unknown top-level key(s): {', '.join(unknown)}")

    items = []
    for name, deg in doc.get("atoms", {}).items():
        if not (isinstance(deg, list) and len(deg) == 3 and all(isinstance(x, int) for x in deg)):
            raise DatasetError(f"atoms.{name}: degree must be [s, f, w]")
        items.append((name, TriDegree(*deg)))
    try:
        atoms = AtomTable(items)
    except ValueError as e:
        raise DatasetError(f"atoms: {e}") from e

    relations = []
    for i, row in enumerate(doc.get("relations", [])):
        where = f"relations[{i}]"
        _require(row, ("expr",), where)
        try:
            expr = relation_value(row["expr"], atoms)
        except ParseError as e:
            raise DatasetError(f"{where}: {e}") from e
        h = is_homogeneous(expr, atoms)
        if not h.ok:
            raise DatasetError(f"{where}: relation {row['expr']!r} is not homogeneous")
        pages = tuple(normalize_page_key(p) for p in row.get("pages", PAGE_KEYS))
        relations.append(RelationRow(row["expr"], expr, pages, _window(row.get("window"), where), row.get("source", "")))

    pages = {}
    for key, pd in doc.get("pages", {}).items():
        try:
            nkey = normalize_page_key(key)
        except KeyError as e:
            raise DatasetError(f"pages: {e.args[0]}") from e
        if nkey != key:
            raise DatasetError(f"pages: page key {key!r} must be written {nkey!r}")
        gens, seen = [], {}
        for i, row in enumerate(pd.get("generators", [])):
            where = f"pages.{key}.generators[{i}]"
            _require(row, ("s", "f", "w", "expr"), where)
            s, f, w = (_int(row, k, where) for k in ("s", "f", "w"))
            where = f"{where} ({s},{f},{w})"
            expr = _parse(row["expr"], atoms, where)
            if expr in seen:
                raise DatasetError(f"{where}: duplicate generator {row['expr']!r} (first listed as row {seen[expr]})")
            seen[expr] = i
            gens.append(GenRow(s, f, w, row["expr"], expr, row.get("source", "")))
        diffs = None
        if key != "inf" or "differentials" in pd:
            diffs, dseen = [], set()
            for i, row in enumerate(pd.get("differentials", [])):
                where = f"pages.{key}.differentials[{i}]"
                _require(row, ("source", "target"), where)
                src = _parse(row["source"], atoms, where)
                tgt = _parse(row["target"], atoms, where)
                where = f"{where} d({row['source']})"
                if src not in seen:
                    raise DatasetError(f"{where}: source is not a generator of page {key}")
                if src in dseen:
                    raise DatasetError(f"{where}: differential listed twice")
                dseen.add(src)
                diffs.append(DiffRow(row["source"], row["target"], src, tgt, row.get("source_ref", "")))
        pages[key] = PageData(key, _window(pd.get("window"), f"pages.{key}"),
                              _window(pd.get("completeness"), f"pages.{key}"), gens, diffs)

    hidden = []
    for i, row in enumerate(doc.get("hidden_tau", [])):
        where = f"hidden_tau[{i}]"
        _require(row, ("s", "f", "w", "source", "target"), where)
        s, f, w = (_int(row, k, where) for k in ("s", "f", "w"))
        where = f"{where} ({s},{f},{w})"
        hidden.append(HiddenRow(s, f, w, row["source"], row["target"],
                                _parse(row["source"], atoms, where), _parse(row["target"], atoms, where),
                                row.get("ref", "")))

    facts = []
    for i, row in enumerate(doc.get("einf_facts", [])):
        where = f"einf_facts[{i}]"
        _require(row, ("s", "f", "w", "expr", "order"), where)
        s, f, w = (_int(row, k, where) for k in ("s", "f", "w"))
        order = row["order"]
        if order != "free" and not (isinstance(order, int) and order >= 1):
            raise DatasetError(f"{where}: order must be 'free' or a positive integer")
        facts.append(FactRow(s, f, w, row["expr"], _parse(row["expr"], atoms, where),
                             None if order == "free" else order, row.get("ref", "")))

    legend = {}
    for k, v in doc.get("torsion_legend", {}).items():
        if k != "free" and not (k.isdigit() and int(k) >= 1):
            raise DatasetError(f"torsion_legend: key {k!r} must be 'free' or a positive integer")
        legend[k] = v

    return Dataset(atoms, relations, pages, hidden, facts, legend)


def loads(text: str) -> Dataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DatasetError(f"invalid JSON: {e}") from e
    return from_json(doc)


def load_dataset(file: Union[str, Path, None] = None) -> Dataset:
    """Load a dataset file; with no argument, the shipped mmf dataset."""
    if file is None:
        return loads(shipped_text())
    if hasattr(file, "read"):
        return loads(file.read())
    return loads(Path(file).read_text(encoding="utf-8"))


def shipped_text() -> str:
    return resources.files("mmfsseq").joinpath("data/mmf.json").read_text(encoding="utf-8")


def shipped_path() -> Path:
    return Path(str(resources.files("mmfsseq").joinpath("data/mmf.json")))


# ---------------------------------------------------------------------------
# serialization


def to_json(d: Dataset) -> dict:
    doc = {"atoms": {n: list(deg.as_tuple()) for n, deg in d.atoms.items()}}
    doc["relations"] = [
        {"expr": r.text, "pages": list(r.pages), "window": None if r.window is None else r.window.to_json(),
         "source": r.source}
        for r in d.relations
    ]
    pages = {}
    for key, p in d.pages.items():
        pd = {
            "window": None if p.window is None else p.window.to_json(),
            "completeness": None if p.completeness is None else p.completeness.to_json(),
            "generators": [{"s": g.s, "f": g.f, "w": g.w, "expr": g.text, "source": g.source} for g in p.generators],
        }
        if p.differentials is not None:
            pd["differentials"] = [{"source": x.source_text, "target": x.target_text, "source_ref": x.source_ref}
                                   for x in p.differentials]
        pages[key] = pd
    doc["pages"] = pages
    doc["hidden_tau"] = [{"s": h.s, "f": h.f, "w": h.w, "source": h.source_text, "target": h.target_text,
                          "ref": h.ref} for h in d.hidden_tau]
    doc["einf_facts"] = [{"s": x.s, "f": x.f, "w": x.w, "expr": x.text,
                          "order": "free" if x.order is None else x.order, "ref": x.ref} for x in d.einf_facts]
    doc["torsion_legend"] = dict(d.torsion_legend)
    return doc


def serialize(d: Dataset) -> str:
    return json.dumps(to_json(d), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# validation


@dataclass
class Check:
    kind: str
    where: str
    ok: bool
    detail: str = ""

    def __str__(self):
        return f"{'ok  ' if self.ok else 'FAIL'} {self.kind}: {self.where}" + (f" ({self.detail})" if self.detail else "")


@dataclass
class ValidationReport:
    checks: List[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.ok]

    def add(self, kind, where, ok, detail=""):
        self.checks.append(Check(kind, where, bool(ok), detail))

    def summary(self) -> str:
        return f"{len(self.checks)} checks, {len(self.failures)} failures"

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": [c.__dict__ for c in self.checks]}


def hidden_jump(h: HiddenRow, atoms: AtomTable) -> Optional[int]:
    """Filtration jump j of a hidden tau extension, or None if the weight/stem law fails."""
    diff = _degree(h.target, atoms) - _degree(h.source, atoms)
    if diff.s != 0 or diff.w != -1:
        return None
    return diff.f


def _degree(x: Expression, atoms) -> Optional[TriDegree]:
    h = is_homogeneous(x, atoms)
    return h.degree if h.ok else None


def validate_dataset(d: Dataset, max_jump: Optional[int] = 1) -> ValidationReport:
    """Run every degree identity and consistency check.

    max_jump is the configured filtration-jump policy for hidden tau
    extensions (None accepts any j >= 1).
    """
    rep = ValidationReport()
    atoms = d.atoms

    for key, p in d.pages.items():
        for g in p.generators:
            h = is_homogeneous(g.expr, atoms)
            ok = h.ok and h.degree == g.degree
            rep.add("homogeneous", f"E{key} {g.text} {g.where()}", ok, "" if ok else f"computed {h.degree}")
        if p.differentials is not None:
            table = DifferentialTable(p.r, {x.source: x.target for x in p.differentials})
            for chk in validate_differential_table(table, atoms, listed={g.expr: g.degree for g in p.generators}):
                rep.add("degree law", f"d{key}({chk.source}) = {chk.target}", chk.ok,
                        chk.message or f"{chk.source_degree} -> {chk.target_degree}")

    for h in d.hidden_tau:
        src = _degree(h.source, atoms)
        j = hidden_jump(h, atoms)
        where = f"tau.{h.source_text} = {h.target_text} at ({h.s},{h.f},{h.w})"
        rep.add("hidden source degree", where, src == h.degree, f"computed {src}")
        if j is None:
            rep.add("hidden degree law", where, False, "target - source is not (0, j, -1)")
        elif j < 1:
            rep.add("hidden degree law", where, False, f"filtration jump {j} < 1")
        else:
            rep.add("hidden degree law", where, True, f"jump {j}")
            if max_jump is not None:
                rep.add("hidden jump policy", where, j <= max_jump, f"jump {j}, policy allows <= {max_jump}")

    for x in d.einf_facts:
        dx = _degree(x.expr, atoms)
        rep.add("fact degree", f"{x.text} at ({x.s},{x.f},{x.w})", dx == TriDegree(x.s, x.f, x.w), f"computed {dx}")
        if x.order is not None and str(x.order) not in d.torsion_legend and d.torsion_legend:
            rep.add("fact order", x.text, False, f"order {x.order} absent from the torsion legend")

    # cross-page: page r+1 only uses atoms of page r and keeps no class that d_r moves
    keys = [k for k in PAGE_KEYS if k in d.pages]
    for k0, k1 in zip(keys, keys[1:]):
        p0, p1 = d.pages[k0], d.pages[k1]
        used = {n for g in p0.generators for t in g.expr for n, _ in t.exps}
        sources = {x.source for x in p0.differentials or [] if x.target}
        targets = {x.target for x in p0.differentials or [] if x.target}
        for g in p1.generators:
            extra = sorted({n for t in g.expr for n, _ in t.exps} - used)
            rep.add("cross-page atoms", f"E{k1} {g.text}", not extra,
                    f"atoms {', '.join(extra)} not used on E{k0}" if extra else "")
            if g.expr in sources:
                rep.add("cross-page survival", f"E{k1} {g.text}", False, f"supports a nonzero d{k0}")
            if g.expr in targets:
                rep.add("cross-page survival", f"E{k1} {g.text}", False, f"is hit by a d{k0}")

    for r in d.relations:
        if r.expr and not is_homogeneous(r.expr, atoms).ok:
            rep.add("relation", r.text, False, "not homogeneous")
    return rep


# ---------------------------------------------------------------------------
# periodicity


def _wrap(text: str) -> str:
    depth = 0
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == "+" and depth == 0:
            return f"({text})"
    return text


def delta_power_text(k: int) -> str:
    return "\\Delta" if k == 1 else f"\\Delta^{k}"


def shift_rows(rows: Sequence[GenRow], k: int, atoms: AtomTable) -> List[GenRow]:
    """Multiply every row by Delta^k."""
    dk = parse_expression(delta_power_text(k), atoms)
    ddeg = atoms.degree("Delta") * k
    out = []
    for g in rows:
        deg = g.degree + ddeg
        out.append(GenRow(deg.s, deg.f, deg.w, f"{delta_power_text(k)} {_wrap(g.text)}", g.expr * dk,
                          f"{g.source} times {delta_power_text(k)}".strip()))
    return out


def extend_by_periodicity(d: Dataset, page, window: Window, period: Optional[int] = None) -> Dataset:
    """Adjoin Delta-periodic multiples of the page's rows with stem <= window.s_max.

    The period defaults to Delta^4 on E2 and Delta^8 on later pages.
    Differentials are extended Delta-linearly.  Rows already present (same
    expression) are kept as they are.
    """
    key = normalize_page_key(page)
    p = d.pages[key]
    k = period if period is not None else period_for(key)
    ds = d.atoms.degree("Delta").s * k
    gens = list(p.generators)
    have = {g.expr for g in gens}
    diffs = None if p.differentials is None else list(p.differentials)
    dsrc = {x.source for x in diffs or []}
    base = list(p.generators)
    base_diffs = {x.source: x for x in p.differentials or []}
    lowest = min((g.s for g in base), default=0)
    mult = 1
    while lowest + ds * mult <= window.s_max:
        pre = delta_power_text(k * mult)
        dk = parse_expression(pre, d.atoms)
        for g0, g in zip(base, shift_rows(base, k * mult, d.atoms)):
            if not (window.s_min <= g.s <= window.s_max) or g.expr in have:
                continue
            gens.append(g)
            have.add(g.expr)
            x = base_diffs.get(g0.expr)
            if diffs is not None and x is not None and g.expr not in dsrc:
                diffs.append(DiffRow(f"{pre} {_wrap(x.source_text)}", f"{pre} {_wrap(x.target_text)}",
                                     x.source * dk, x.target * dk, x.source_ref))
                dsrc.add(g.expr)
        mult += 1
    gens.sort(key=lambda g: (g.s, g.f, -g.w))
    new_pages = dict(d.pages)
    win = p.window
    if win is not None and window.s_max > win.s_max:
        win = replace(win, s_max=window.s_max)
    new_pages[key] = PageData(key, win, p.completeness, gens, diffs)
    return replace(d, pages=new_pages)


# ---------------------------------------------------------------------------
# engine objects


def relations_for(d: Dataset, page) -> List[Expression]:
    key = normalize_page_key(page)
    return [r.expr for r in d.relations if key in r.pages and r.expr]


def build_presentation(d: Dataset, page, completeness: Optional[Window] = None) -> Presentation:
    key = normalize_page_key(page)
    p = d.pages[key]
    comp = completeness if completeness is not None else p.completeness
    return Presentation(d.atoms, tuple(relations_for(d, key)), comp, tuple(g.expr for g in p.generators))


def build_page(d: Dataset, page, completeness: Optional[Window] = None) -> Page:
    """sseq.Page for E_r of the dataset; every unlisted generator has zero d_r."""
    key = normalize_page_key(page)
    p = d.pages[key]
    rows = [GeneratorRow(g.expr, g.degree, g.text) for g in p.generators]
    table = None
    if p.differentials is not None:
        vals = {g.expr: ZERO for g in p.generators}
        for x in p.differentials:
            vals[x.source] = x.target
        table = DifferentialTable(p.r, vals)
    return Page(build_presentation(d, key, completeness), rows, table)


def generator_rows(d: Dataset, page) -> List[GeneratorRow]:
    p = d.page(page)
    return [GeneratorRow(g.expr, g.degree, g.text) for g in p.generators]


def empty_dataset() -> Dataset:
    return Dataset(AtomTable([]))
