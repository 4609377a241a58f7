"""Render the E2 and E-infinity charts of the shipped dataset to SVG.

usage: python scripts/render_charts.py [outdir]
"""

import sys
from pathlib import Path

from mmfsseq.chart import layout_page, render_svg
from mmfsseq.mmfdata import load_dataset


def main(outdir="charts"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    d = load_dataset()
    for key, name in (("2", "e2.svg"), ("inf", "einf.svg")):
        scene = layout_page(d, key)
        svg = render_svg(scene)
        (out / name).write_bytes(svg.encode("utf-8"))
        print(f"{out / name}: {len(scene.dots)} dots, {len(scene.segments)} segments")


if __name__ == "__main__":
    main(*sys.argv[1:])
