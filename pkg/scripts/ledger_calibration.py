"""Residuals of the two c_n normalizations against F(f1; t) at shrinking t.

The truncated expansion of the right normalization should track F with an
error shrinking like a power of t; the other one should not.

    python3 scripts/ledger_calibration.py data/graphs/sigma237.txt --k 3
"""

import argparse
from fractions import Fraction

import mpmath

from plumbed.asymptotic import MODES, AsymptoticLedger, F_f1, _ledger_coeffs, default_box
from plumbed.chardata import product_char
from plumbed.graph import read_graph
from plumbed.lattice import linking_data


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("path")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--top", type=int, default=2, help="largest n_v kept in the expansion")
    args = p.parse_args()
    with mpmath.workdps(64):
        ld = linking_data(read_graph(args.path))
        pc = product_char(ld)
        box = default_box(ld, top=args.top)
        ledgers = {m: AsymptoticLedger(args.k, _ledger_coeffs(ld, pc, args.k, box, m), m, None, box) for m in MODES}
        print(f"{'h':>10s}" + "".join(f"{m:>22s}" for m in MODES))
        for j in range(1, 6):
            h = Fraction(1, 10 * args.k * 2**j)
            t = [h] * len(ld.vge3)
            exact = F_f1(ld, pc, args.k, t)
            res = [float(abs(ledgers[m].series(t) - exact)) for m in MODES]
            print(f"{float(h):10.3e}" + "".join(f"{r:22.3e}" for r in res), flush=True)


if __name__ == "__main__":
    main()
