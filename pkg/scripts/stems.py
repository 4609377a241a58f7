"""Assemble tau-torsion families stem by stem from the hidden tau extensions.

usage: python scripts/stems.py [first_stem] [last_stem]
"""

import sys

from mmfsseq.algebra import Window
from mmfsseq.homotopy import (
    EinfKnowledge,
    assemble_stem,
    expand_hidden_extensions,
    extensions_from_dataset,
    flag_missing,
)
from mmfsseq.mmfdata import load_dataset


def main(first=0, last=60):
    d = load_dataset()
    know = EinfKnowledge.from_dataset(d)
    hidden = expand_hidden_extensions(extensions_from_dataset(d), Window(s_max=192), d.atoms)
    print(f"{len(d.hidden_tau)} hidden tau rows expand to {len(hidden)} in stems <= 192; "
          f"{len(flag_missing(hidden, know))} have an endpoint outside the E-infinity data")
    extra = [g.expr for g in d.pages["inf"].generators]
    for s in range(int(first), int(last) + 1):
        a = assemble_stem(s, know, hidden, extra)
        if a.families:
            print(a.report(d.atoms))


if __name__ == "__main__":
    main(*sys.argv[1:])
