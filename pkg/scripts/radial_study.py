"""Convergence of the radial extrapolation as the schedule changes.

For a graph file and level k, prints |radial limit - 2(z - 1/z) WRT| for a grid
of (ratio, levels) at the default starting t.

    python3 scripts/radial_study.py data/graphs/h_graph.txt --k 3
"""

import argparse
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from plumbed.chardata import product_char
from plumbed.errors import NoConvergence
from plumbed.gausswrt import wrt_reduced
from plumbed.graph import read_graph
from plumbed.hblock import default_t0, radial_limit, zhat_false_theta
from plumbed.hp import e_frac
from plumbed.lattice import linking_data


@dataclass
class Config:
    path: str
    k: int = 3
    ratios: list = field(default_factory=lambda: [0.5, 0.7, 0.8, 0.9])
    levels: list = field(default_factory=lambda: [4, 6, 8, 10])


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("path")
    p.add_argument("--k", type=int, default=3)
    args = p.parse_args()
    cfg = Config(args.path, args.k)
    with mpmath.workdps(64):
        ld = linking_data(read_graph(cfg.path))
        pc = product_char(ld)
        z = e_frac(Fraction(1, 2 * cfg.k))
        target = 2 * (z - 1 / z) * wrt_reduced(ld, cfg.k).value
        hb = zhat_false_theta(ld, pc, 0)
        print(f"t0 = {default_t0(ld, cfg.k):.4g}")
        print("ratio  " + "".join(f"{n:>12d}" for n in cfg.levels))
        for r in cfg.ratios:
            cells = []
            for n in cfg.levels:
                try:
                    rep = radial_limit(hb, cfg.k, tolerance=1.0, levels=n, ratio=r)
                    cells.append(f"{float(abs(rep.value - target)):12.2e}")
                except NoConvergence:
                    cells.append(f"{'--':>12s}")
            print(f"{r:5.2f}  " + "".join(cells), flush=True)


if __name__ == "__main__":
    main()
