"""Compare page turning with the brute-force F2 oracle on random synthetic presentations.

usage: python scripts/oracle_comparison.py [n_seeds]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import page_oracle  # noqa: E402
from mmfsseq.algebra import Window  # noqa: E402
from mmfsseq.sseq import turn_page  # noqa: E402


def main(n_seeds=10):
    window = Window(s_max=12, f_max=8)
    cells = bad = torsion = 0
    for seed in range(int(n_seeds)):
        atoms, rels, dvals, r = page_oracle.random_case(seed)
        oracle = page_oracle.Oracle(atoms, rels, dvals, r)
        nxt = turn_page(page_oracle.engine_page(atoms, rels, dvals, r), window, indecomposables=False)
        for s in range(window.s_max + 1):
            for f in range(window.f_max + 1):
                span = [atoms.weight(e) for e in atoms.monomials_sf(s, f)]
                tail = page_oracle.tau_tail(rels, dvals) + (max(span) - min(span) if span else 0)
                want = oracle.decomposition(s, f, tail)
                got = sorted(((x.degree.w, x.module.order) for x in nxt.homology[(s, f)]),
                             key=lambda t: (t[0], -1 if t[1] is None else t[1]))
                cells += 1
                torsion += sum(1 for _, k in want if k)
                if want != got:
                    bad += 1
                    print(f"seed {seed} ({s},{f}): oracle {want} engine {got}")
        print(f"seed {seed}: {len(atoms.names)} atoms, {len(rels)} relations, {len(dvals)} differentials")
    print(f"{cells} bidegrees, {torsion} torsion summands, {bad} mismatches")


if __name__ == "__main__":
    main(*sys.argv[1:])
