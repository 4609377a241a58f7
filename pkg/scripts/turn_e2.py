"""Turn the E2 page in a stem window and compare the result with the E3 table.

usage: python scripts/turn_e2.py [max_stem] [max_f]
"""

import sys
import time

from mmfsseq.algebra import Window
from mmfsseq.mmfdata import build_page, generator_rows, load_dataset
from mmfsseq.sseq import compare_generators, forced_relations, turn_page


def main(max_stem=24, max_f=8):
    d = load_dataset()
    page = build_page(d, "2")
    expected = generator_rows(d, "3")
    page = page.with_relations(forced_relations(page, expected))
    window = Window(s_max=int(max_stem), f_max=int(max_f))
    t0 = time.perf_counter()
    nxt = turn_page(page, window)
    dt = time.perf_counter() - t0
    diff = compare_generators(nxt.indecomposables, expected, window)
    print(f"E3 in stems 0-{window.s_max}, f <= {window.f_max}: {len(nxt.indecomposables)} indecomposables, {dt:.1f}s")
    for x in nxt.indecomposables:
        print(f"  {x}")
    print(f"{len(diff.agree)} agree, {len(diff.missing)} missing, {len(diff.extra)} extra"
          + ("" if nxt.complete else " (relations incomplete here: extras are upper-bound artifacts)"))
    for deg, lab in diff.extra:
        print(f"  extra {lab} at {deg}")
    for deg, lab in diff.missing:
        print(f"  missing {lab} at {deg}")


if __name__ == "__main__":
    main(*sys.argv[1:])
