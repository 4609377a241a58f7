"""Command-line interface: mmfsseq <verb> [dataset] [options].

Exit codes: 0 success, 1 a report entry of severity error (failed check,
inconsistency), 2 usage error, 3 unreadable or malformed dataset.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .algebra import Window
from .grading import ParseError
from .mmfdata import (
    PAGE_KEYS,
    DatasetError,
    build_page,
    generator_rows,
    load_dataset,
    normalize_page_key,
    validate_dataset,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_DATA = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _page_arg(text: str) -> str:
    try:
        return normalize_page_key(text)
    except KeyError as e:
        raise argparse.ArgumentTypeError(e.args[0])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("dataset", nargs="?", default=None, help="dataset JSON (default: the shipped mmf dataset)")
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = _Parser(prog="mmfsseq", description="Trigraded spectral sequence engine over F2[tau].")
    sub = p.add_subparsers(dest="verb", parser_class=_Parser)
    sub.required = True

    v = sub.add_parser("validate", parents=[common], help="run every dataset check")
    v.add_argument("--max-jump", type=int, default=1, help="largest accepted filtration jump of hidden tau rows")
    v.add_argument("--verbose", action="store_true", help="list passing checks too")

    t = sub.add_parser("turn", parents=[common], help="compute the next page and compare with its table")
    t.add_argument("--from", dest="page", type=_page_arg, required=True)
    t.add_argument("--max-stem", type=int, default=24)
    t.add_argument("--min-stem", type=int, default=0)
    t.add_argument("--max-f", type=int, default=8)
    t.add_argument("--workers", type=int, default=None)
    t.add_argument("--no-forced", action="store_true", help="do not add relations forced by the next table")

    i = sub.add_parser("infer", parents=[common], help="infer a differential from a relation")
    i.add_argument("--relation", required=True)
    i.add_argument("--unknown", required=True)
    i.add_argument("--page", type=_page_arg, required=True)

    f = sub.add_parser("forced", parents=[common], help="relations forced on a page")
    f.add_argument("--page", type=_page_arg, required=True)

    h = sub.add_parser("homotopy", parents=[common], help="assemble a stem from hidden tau extensions")
    h.add_argument("--stem", type=int, required=True)
    h.add_argument("--window", type=int, default=None, help="largest stem for expanding hidden extensions")

    c = sub.add_parser("chart", parents=[common], help="render a page as SVG")
    c.add_argument("--page", type=_page_arg, required=True)
    c.add_argument("-o", "--output", default=None)
    c.add_argument("--max-stem", type=int, default=None)
    c.add_argument("--min-stem", type=int, default=0)
    c.add_argument("--max-f", type=int, default=None)
    return p


def _emit(args, text_lines: List[str], obj) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")
    else:
        for line in text_lines:
            sys.stdout.write(line + "\n")


def _next_key(key: str) -> Optional[str]:
    i = PAGE_KEYS.index(key)
    return PAGE_KEYS[i + 1] if i + 1 < len(PAGE_KEYS) else None


# ---------------------------------------------------------------------------
# verbs


def cmd_validate(args, d) -> int:
    rep = validate_dataset(d, max_jump=args.max_jump)
    lines = [str(c) for c in rep.checks if args.verbose or not c.ok]
    lines.append(("PASS " if rep.ok else "FAIL ") + rep.summary())
    _emit(args, lines, rep.to_json())
    return EXIT_OK if rep.ok else EXIT_ERROR


def cmd_turn(args, d) -> int:
    from .sseq import UnresolvedObligations, compare_generators, forced_relations, turn_page

    key = args.page
    if key == "inf":
        raise UsageError("the E-infinity page has no differential to turn")
    nxt_key = _next_key(key)
    page = build_page(d, key)
    expected = generator_rows(d, nxt_key) if nxt_key in d.pages else []
    if not args.no_forced and expected:
        page = page.with_relations(forced_relations(page, expected))
    window = Window(s_max=args.max_stem, f_max=args.max_f, s_min=args.min_stem)
    try:
        nxt = turn_page(page, window, workers=args.workers)
    except UnresolvedObligations as e:
        _emit(args, [f"error: {o}" for o in e.obligations],
              {"ok": False, "unresolved": [str(o) for o in e.obligations]})
        return EXIT_ERROR
    diff = compare_generators(nxt.indecomposables, expected, window)
    lines = [f"E{nxt_key} indecomposables in stems {window.s_min}-{window.s_max}, f <= {window.f_max}"
             + ("" if nxt.complete else " (outside the relation-complete window: upper-bound model)")]
    lines += [f"  {x}" for x in nxt.indecomposables]
    for deg, lab in diff.missing:
        lines.append(f"error: table row {lab} at {deg} not found")
    sev = "warning" if not nxt.complete else "error"
    for deg, lab in diff.extra:
        lines.append(f"{sev}: computed class {lab} at {deg} is not in the table")
    for (s, f), err in sorted(nxt.errors.items()):
        lines.append(f"error: ({s},{f}): {err}")
    bad = bool(diff.missing) or bool(nxt.errors) or (nxt.complete and bool(diff.extra))
    lines.append(f"{len(diff.agree)} rows agree, {len(diff.missing)} missing, {len(diff.extra)} extra")
    obj = {
        "ok": not bad,
        "page": nxt_key,
        "window": window.to_json(),
        "complete": nxt.complete,
        "indecomposables": [{"s": x.degree.s, "f": x.degree.f, "w": x.degree.w, "rep": str(x.rep),
                             "module": str(x.module)} for x in nxt.indecomposables],
        "missing": [{"degree": str(dg), "row": lab} for dg, lab in diff.missing],
        "extra": [{"degree": str(dg), "class": lab, "severity": sev} for dg, lab in diff.extra],
        "errors": {f"{s},{f}": e for (s, f), e in sorted(nxt.errors.items())},
    }
    _emit(args, lines, obj)
    return EXIT_ERROR if bad else EXIT_OK


def cmd_infer(args, d) -> int:
    from .grading import parse_expression
    from .sseq import DifferentialTable, infer_differential

    key = args.page
    if key == "inf":
        raise UsageError("the E-infinity page has no differential")
    page = build_page(d, key)
    unknown = parse_expression(args.unknown, d.atoms)
    known = DifferentialTable(page.differentials.page,
                              {k: v for k, v in page.differentials.items() if k != unknown})
    inf = infer_differential(args.relation, known, unknown, page)
    r = page.differentials.page
    if inf.inconsistent or inf.value is None:
        msg = inf.message or "no solution"
        _emit(args, [f"error: d_{r}({unknown}): {msg}"],
              {"ok": False, "unknown": str(unknown), "message": msg})
        return EXIT_ERROR
    state = "unique" if inf.unique else "not unique"
    lines = [f"d_{r}({unknown}) = {inf.value}  [{state}]",
             f"  constraint: ({inf.coefficient}) * d_{r}({unknown}) = {inf.rhs}"]
    lines += [f"  alternative: {a}" for a in inf.alternatives]
    if not inf.complete:
        lines.append("  note: relations are not known to be complete in these degrees")
    table = page.differentials.get(unknown)
    verdict = None
    if table is not None:
        from .algebra import in_relation_ideal
        from .sseq import equal_in_page
        if equal_in_page(inf.value, table, page):
            verdict = "agrees"
        elif in_relation_ideal(inf.coefficient * (inf.value + table), page.presentation):
            verdict = "also satisfies the constraint"
        else:
            verdict = "DISAGREES"
        lines.append(f"  table value: {table} ({verdict} in the page)")
    ok = verdict != "DISAGREES"
    obj = {"ok": ok, "table": None if table is None else str(table), "table_verdict": verdict, "unknown": str(unknown), "page": r, "value": str(inf.value), "unique": inf.unique,
           "coefficient": str(inf.coefficient), "rhs": str(inf.rhs),
           "alternatives": [str(a) for a in inf.alternatives], "complete": inf.complete}
    _emit(args, lines, obj)
    return EXIT_OK if ok else EXIT_ERROR


def cmd_forced(args, d) -> int:
    from .sseq import forced_relations_detail

    key = args.page
    if key == "inf":
        raise UsageError("the E-infinity page has no differential")
    page = build_page(d, key)
    nxt = _next_key(key)
    rows = generator_rows(d, nxt) if nxt in d.pages else []
    forced, unresolved = forced_relations_detail(page, rows)
    lines = [f"{x.expression} = 0  ({x.origin})" for x in forced]
    lines += [f"warning: d_{page.r}({row.label}) cannot be evaluated: {u.reason}" for row, u in unresolved]
    obj = {"page": key, "forced": [{"relation": str(x.expression), "origin": x.origin} for x in forced],
           "unresolved": [{"row": row.label, "reason": u.reason} for row, u in unresolved]}
    _emit(args, lines, obj)
    return EXIT_OK


def cmd_homotopy(args, d) -> int:
    from .homotopy import AmbiguousChain, EinfKnowledge, assemble_stem, expand_hidden_extensions, extensions_from_dataset

    top = args.window if args.window is not None else max(args.stem, 192)
    know = EinfKnowledge.from_dataset(d)
    hidden = expand_hidden_extensions(extensions_from_dataset(d), Window(s_max=top), d.atoms)
    extra = [g.expr for g in d.pages["inf"].generators] if "inf" in d.pages else []
    try:
        a = assemble_stem(args.stem, know, hidden, extra)
    except AmbiguousChain as e:
        _emit(args, [f"error: {e}"], {"ok": False, "message": str(e)})
        return EXIT_ERROR
    lines = [f.line(args.stem, d.atoms) for f in a.families] or [f"stem {args.stem}: no classes in the data"]
    _emit(args, lines, a.to_json(d.atoms))
    return EXIT_OK


def cmd_chart(args, d) -> int:
    from .chart import layout_page, render_svg

    p = d.pages[args.page]
    s_max = args.max_stem
    if s_max is None:
        s_max = p.window.s_max if p.window is not None else max((g.s for g in p.generators), default=0)
    window = Window(s_max=s_max, f_max=args.max_f, s_min=args.min_stem)
    svg = render_svg(layout_page(d, args.page, window))
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
        if args.format == "json":
            _emit(args, [], {"ok": True, "output": args.output, "bytes": len(svg.encode("utf-8"))})
    else:
        sys.stdout.write(svg)
    return EXIT_OK


VERBS = {
    "validate": cmd_validate,
    "turn": cmd_turn,
    "infer": cmd_infer,
    "forced": cmd_forced,
    "homotopy": cmd_homotopy,
    "chart": cmd_chart,
}


def run_command(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        d = load_dataset(args.dataset)
    except (OSError, DatasetError) as e:
        sys.stderr.write(f"mmfsseq: cannot load dataset: {e}\n")
        return EXIT_DATA
    try:
        if getattr(args, "page", None) is not None and args.page not in d.pages:
            raise UsageError(f"page {args.page} is not in the dataset")
        return VERBS[args.verb](args, d)
    except UsageError as e:
        sys.stderr.write(f"mmfsseq: {e}\n")
        return EXIT_USAGE
    except ParseError as e:
        sys.stderr.write(f"mmfsseq: cannot parse input: {e}\n")
        return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
