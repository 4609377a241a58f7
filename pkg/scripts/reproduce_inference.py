"""Infer three differentials from multiplicative relations and compare with the tables.

usage: python scripts/reproduce_inference.py
"""

from mmfsseq.grading import parse_expression
from mmfsseq.mmfdata import build_page, load_dataset
from mmfsseq.sseq import DifferentialTable, equal_in_page, infer_differential

CASES = [
    ("2", "c u = h_1^2 e", "u"),
    ("2", "h_1 (\\Delta u + \\tau n g) = u \\Delta h_1", "\\Delta u + \\tau n g"),
    ("4", "P \\Delta^6 h_1 c = \\tau^4 \\Delta^4 P e g^2", "\\Delta^6 h_1 c"),
]


def main():
    d = load_dataset()
    for key, rel, unk in CASES:
        page = build_page(d, key)
        x = parse_expression(unk, d.atoms)
        known = DifferentialTable(page.r, {k: v for k, v in page.differentials.items() if k != x})
        inf = infer_differential(rel, known, x, page)
        table = page.differentials.get(x)
        agree = inf.value is not None and equal_in_page(inf.value, table, page)
        state = "unique" if inf.unique else f"{len(inf.alternatives)} alternatives"
        print(f"E{key}: {rel}")
        print(f"  d_{page.r}({unk}) = {inf.value}  [{state}]  table {table}: {'agrees' if agree else 'differs'}")


if __name__ == "__main__":
    main()
