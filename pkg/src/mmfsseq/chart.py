"""Deterministic SVG charts of spectral sequence pages.

x is the stem, y the filtration.  Dot colors encode the tau-torsion order
of the class, lines encode h0/h1/h2 products, differentials and hidden
tau extensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

from .algebra import Window
from .grading import AtomTable, Expression, Monomial, TriDegree, degree_of
from .homotopy import EinfKnowledge, HiddenExtension, expand_hidden_extensions, extensions_from_dataset, split_tau

SVG_COLORS = {
    "gray": "#8c8c8c",
    "red": "#d62728",
    "blue": "#1f4fd6",
    "green": "#2ca02c",
    "pink": "#f08cc0",
    "light green": "#9be39b",
    "dark blue": "#0b1f66",
    "purple": "#7b2fa6",
    "lavender": "#b9a7e8",
    "brown": "#8c564b",
    "magenta": "#e011c8",
    "orange": "#ff8c00",
    "light blue": "#6ec6f0",
    "yellow": "#e8c900",
    "black": "#000000",
}

DEFAULT_LEGEND = {None: "gray", 1: "red", 2: "blue", 3: "green", 4: "pink", 5: "light green",
                  6: "dark blue", 9: "purple", 10: "lavender", 11: "brown"}


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class LineRule:
    atom: str
    ds: int
    df: int


@dataclass
class ChartStyle:
    dot_colors: Dict[Optional[int], str] = field(default_factory=lambda: dict(DEFAULT_LEGEND))
    products: Tuple[LineRule, ...] = (LineRule("h_0", 0, 1), LineRule("h_1", 1, 1), LineRule("h_2", 3, 1))
    product_color: str = "black"
    tau_product_color: str = "magenta"
    tau_power_product_color: str = "orange"
    differential_color: str = "light blue"
    hidden_color: str = "yellow"
    tower_color: str = "red"
    unit: int = 24

    @classmethod
    def from_legend(cls, legend: Dict[Optional[int], str]) -> "ChartStyle":
        return cls(dot_colors=dict(legend))

    def dot_color(self, order: Optional[int]) -> str:
        if order not in self.dot_colors:
            raise ChartError(f"torsion order {order} has no color in the legend")
        return self.dot_colors[order]


@dataclass(frozen=True)
class Dot:
    s: int
    f: int
    w: int
    torsion: Optional[int]  # None = free
    label: str
    certified: bool = True  # False: order comes from the page model only

    @property
    def key(self):
        return (self.s, self.f, -self.w, self.label)


@dataclass(frozen=True)
class Segment:
    kind: str  # product, differential, hidden, tower
    start: Tuple[int, int, int, str]
    end: Tuple[int, int, int, str]
    color: str
    note: str = ""


@dataclass
class ChartScene:
    window: Window
    dots: List[Dot]
    segments: List[Segment]
    title: str = ""
    partial: bool = False
    legend: Dict[Optional[int], str] = field(default_factory=lambda: dict(DEFAULT_LEGEND))

    def dot_index(self) -> Dict[Tuple, Dot]:
        return {(d.s, d.f, d.w, d.label): d for d in self.dots}


# ---------------------------------------------------------------------------
# layout


@dataclass
class ChartClass:
    expr: Expression
    degree: TriDegree
    label: str


def layout_classes(classes: Sequence[ChartClass], window: Window, style: ChartStyle,
                   torsion: Callable[[Expression], Tuple[Optional[int], bool]],
                   differentials: Sequence[Tuple[Expression, Expression]] = (),
                   r: Optional[int] = None,
                   hidden: Sequence[HiddenExtension] = (),
                   towers: Sequence[Expression] = (),
                   atoms: Optional[AtomTable] = None,
                   title: str = "", partial: bool = False) -> ChartScene:
    """Place classes as dots and connect them by product, differential and hidden segments.

    torsion(expr) returns (order or None for free, certified).
    """
    dots: Dict[Expression, Dot] = {}
    for c in classes:
        if not window.contains(c.degree) or c.expr in dots:
            continue
        order, cert = torsion(c.expr)
        style.dot_color(order)
        dots[c.expr] = Dot(c.degree.s, c.degree.f, c.degree.w, order, c.label, cert)

    def key(d: Dot):
        return (d.s, d.f, d.w, d.label)

    def locate(x: Expression) -> Optional[Tuple[int, Dot]]:
        if x in dots:
            return 0, dots[x]
        k, base = split_tau(x)
        d = dots.get(base)
        return None if d is None else (k, d)

    segs: List[Segment] = []
    if atoms is not None:
        for rule in style.products:
            if rule.atom not in atoms:
                continue
            h = Expression([Monomial.make({rule.atom: 1})])
            for x, dx in sorted(dots.items(), key=lambda kv: kv[1].key):
                hit = locate(x * h)
                if hit is None:
                    continue
                k, dy = hit
                if (dy.s, dy.f) != (dx.s + rule.ds, dx.f + rule.df):
                    continue
                if k == 0:
                    color, note = style.product_color, ""
                elif k == 1:
                    color, note = style.tau_product_color, "tau"
                else:
                    color, note = style.tau_power_product_color, f"tau^{k}"
                segs.append(Segment("product", key(dx), key(dy), color, note))
    for src, tgt in differentials:
        a = locate(src)
        b = locate(tgt)
        if a is None or b is None or a[0] != 0:
            continue
        k, dy = b
        dx = a[1]
        if r is not None and (dy.s - dx.s, dy.f - dx.f) != (-1, r):
            raise ChartError(f"differential {src} -> {tgt} does not have slope (-1, {r})")
        # a target tau^k y takes the color of M2/tau^k; without one, the tau^k label alone marks it
        color = style.dot_colors.get(k, style.differential_color) if k else style.differential_color
        segs.append(Segment("differential", key(dx), key(dy), color, "" if k == 0 else f"tau^{k}"))
    for h in hidden:
        a = locate(h.source)
        b = locate(h.target)
        if a is None or b is None:
            continue
        segs.append(Segment("hidden", key(a[1]), key(b[1]), style.hidden_color, ""))
    for t in towers:
        d = dots.get(t)
        if d is not None:
            segs.append(Segment("tower", key(d), (d.s + 1, d.f + 1, d.w + 1, ""), style.tower_color, "h1-tower"))
    dot_list = sorted(dots.values(), key=lambda d: d.key)
    segs.sort(key=lambda g: (g.kind, g.start, g.end, g.color))
    return ChartScene(window, dot_list, segs, title, partial, dict(style.dot_colors))


def layout_page(d, page, window: Optional[Window] = None, style: Optional[ChartStyle] = None,
                hidden_window: Optional[Window] = None) -> ChartScene:
    """Scene for a dataset page: generators, differential targets and (on E-infinity)
    expanded hidden tau extensions with their endpoints."""
    from .mmfdata import normalize_page_key

    key = normalize_page_key(page)
    p = d.pages[key]
    atoms = d.atoms
    if style is None:
        style = ChartStyle.from_legend(d.legend()) if d.torsion_legend else ChartStyle()
    if window is None:
        window = p.window or Window(s_max=max((g.s for g in p.generators), default=0))
    classes = [ChartClass(g.expr, g.degree, g.expr.serialize(atoms)) for g in p.generators]
    diffs = []
    hidden: List[HiddenExtension] = []
    if p.differentials is not None:
        for x in p.differentials:
            diffs.append((x.source, x.target))
            if x.target:
                k, base = split_tau(x.target)
                classes.append(ChartClass(base, degree_of(base, atoms), base.serialize(atoms)))
    know = _knowledge(d, key)
    if key == "inf":
        hidden = expand_hidden_extensions(extensions_from_dataset(d), hidden_window or window, atoms)
        for h in hidden:
            for x in (h.source, h.target):
                k, base = split_tau(x)
                classes.append(ChartClass(base, degree_of(base, atoms), base.serialize(atoms)))

    def torsion(x: Expression):
        info = know.order(x)
        return info.model_order, info.exact

    title = f"E{'_inf' if key == 'inf' else key} page, stems {window.s_min}-{window.s_max}"
    comp = p.completeness
    partial = comp is None or not (comp.s_min <= window.s_min and window.s_max <= comp.s_max)
    return layout_classes(classes, window, style, torsion, diffs, p.r, hidden, (), atoms, title, partial)


def _knowledge(d, key: str) -> EinfKnowledge:
    """tau-torsion knowledge valid on page key: targets of earlier differentials,
    plus hidden extensions and curated facts on E-infinity."""
    from .mmfdata import PAGE_KEYS

    order = list(PAGE_KEYS)
    earlier = order[: order.index(key)]
    targets = []
    for k in earlier:
        p = d.pages.get(k)
        if p is not None and p.differentials:
            targets.extend(x.target for x in p.differentials)
    if key == "inf":
        return EinfKnowledge(d.atoms, (), [(x.expr, x.order) for x in d.einf_facts],
                             extensions_from_dataset(d), targets)
    return EinfKnowledge(d.atoms, (), (), (), targets)


# ---------------------------------------------------------------------------
# rendering


def _module_name(k: Optional[int]) -> str:
    if k is None:
        return "M2 (free)"
    return "M2/tau" if k == 1 else f"M2/tau^{k}"


def _fmt(x: float) -> str:
    s = f"{x:.2f}"
    return s.rstrip("0").rstrip(".") if "." in s else s


def render_svg(scene: ChartScene, style: Optional[ChartStyle] = None) -> str:
    """SVG 1.1 text.  Identical scenes give identical bytes."""
    style = style or ChartStyle(dot_colors=dict(scene.legend))
    u = style.unit
    w = scene.window
    f_top = w.f_max if w.f_max is not None else max((d.f for d in scene.dots), default=0) + 1
    ns = w.s_max - w.s_min + 1
    margin = 40
    legend_w = 300
    width = margin * 2 + ns * u + legend_w
    height = margin * 2 + (f_top + 1) * u

    def X(s: float) -> float:
        return margin + (s - w.s_min) * u + u / 2

    def Y(f: float) -> float:
        return height - margin - f * u - u / 2

    # horizontal offsets for several dots in one bidegree
    groups: Dict[Tuple[int, int], List[Dot]] = {}
    for d in scene.dots:
        groups.setdefault((d.s, d.f), []).append(d)
    pos: Dict[Tuple, Tuple[float, float]] = {}
    for (s, f), ds in groups.items():
        ds = sorted(ds, key=lambda d: (-d.w, d.label))
        n = len(ds)
        step = min(u * 0.3, (u * 0.8) / max(n, 1))
        for i, d in enumerate(ds):
            pos[(d.s, d.f, d.w, d.label)] = (X(s) + (i - (n - 1) / 2) * step, Y(f))

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
               f'viewBox="0 0 {width} {height}">')
    if scene.title:
        out.append(f'<title>{escape(scene.title)}</title>')
    out.append('<rect x="0" y="0" width="%d" height="%d" fill="#ffffff"/>' % (width, height))
    # axes and grid labels
    out.append('<g id="axes" stroke="#000000" stroke-width="1" fill="none">')
    out.append(f'<line x1="{margin}" y1="{height - margin}" x2="{margin + ns * u}" y2="{height - margin}"/>')
    out.append(f'<line x1="{margin}" y1="{height - margin}" x2="{margin}" y2="{margin}"/>')
    out.append('</g>')
    out.append('<g id="ticks" font-family="sans-serif" font-size="9" fill="#000000">')
    for s in range(w.s_min, w.s_max + 1):
        if s % 4 == 0:
            out.append(f'<text x="{_fmt(X(s))}" y="{height - margin + 12}" text-anchor="middle">{s}</text>')
    for f in range(0, f_top + 1):
        if f % 2 == 0:
            out.append(f'<text x="{margin - 6}" y="{_fmt(Y(f) + 3)}" text-anchor="end">{f}</text>')
    out.append('</g>')
    # segments
    out.append('<g id="segments" stroke-width="1.2" fill="none">')
    for g in scene.segments:
        x1, y1 = pos[g.start]
        if g.kind == "tower":
            x2, y2 = x1 + u * 0.8, y1 - u * 0.8
        else:
            x2, y2 = pos[g.end]
        color = SVG_COLORS.get(g.color, g.color)
        extra = ' marker-end="url(#arrow)"' if g.kind == "tower" else ""
        out.append(f'<line class="{g.kind}" x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                   f'stroke="{color}"{extra}/>')
        if g.note and g.kind in ("product", "differential"):
            out.append(f'<text x="{_fmt((x1 + x2) / 2 + 2)}" y="{_fmt((y1 + y2) / 2 - 2)}" font-family="sans-serif" '
                       f'font-size="7" fill="{color}" stroke="none">{escape(g.note)}</text>')
    out.append('</g>')
    # dots
    out.append('<g id="dots">')
    for d in sorted(scene.dots, key=lambda d: d.key):
        x, y = pos[(d.s, d.f, d.w, d.label)]
        name = style.dot_color(d.torsion)
        color = SVG_COLORS.get(name, name)
        fill = color if d.certified else "#ffffff"
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="{fill}" stroke="{color}" stroke-width="1.2">'
                   f'<title>{escape(d.label)} ({d.s},{d.f},{d.w}) {_module_name(d.torsion)}</title></circle>')
    out.append('</g>')
    out.extend(_legend(scene, style, margin * 2 + ns * u - 10, margin))
    out.append('</svg>')
    return "\n".join(out) + "\n"


def _legend(scene: ChartScene, style: ChartStyle, x0: int, y0: int) -> List[str]:
    out = ['<g id="legend" font-family="sans-serif" font-size="10" fill="#000000">']
    y = y0
    out.append(f'<text x="{x0}" y="{y}">dot color: tau-torsion</text>')
    y += 14
    orders = sorted(scene.legend, key=lambda k: -1 if k is None else k)
    for k in orders:
        c = scene.legend[k]
        out.append(f'<rect x="{x0}" y="{y - 8}" width="9" height="9" fill="{SVG_COLORS.get(c, c)}"/>')
        out.append(f'<text x="{x0 + 14}" y="{y}">{_module_name(k)}: {escape(c)}</text>')
        y += 13
    y += 6
    lines = [
        (style.product_color, "h0, h1, h2 products"),
        (style.tau_product_color, "product = tau times a class"),
        (style.tau_power_product_color, "product = tau^k times a class (k labelled)"),
        (style.differential_color, "differential"),
        (style.hidden_color, "hidden tau extension"),
        (style.tower_color, "h1-tower (arrow)"),
    ]
    for c, text in lines:
        out.append(f'<line x1="{x0}" y1="{y - 4}" x2="{x0 + 10}" y2="{y - 4}" stroke="{SVG_COLORS.get(c, c)}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{x0 + 14}" y="{y}">{escape(text)}</text>')
        y += 13
    y += 6
    out.append(f'<text x="{x0}" y="{y}">hollow dot: order not certified by the data</text>')
    if scene.partial:
        y += 13
        out.append(f'<text x="{x0}" y="{y}">partial: outside the relation-complete window</text>')
    out.append('</g>')
    out.append('<defs><marker id="arrow" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto">'
               '<path d="M0,0 L6,3 L0,6 z" fill="#d62728"/></marker></defs>')
    return out
