"""Three-way agreement check over the condition-satisfying fleet graphs.

    python3 scripts/verify_fleet.py --k 5 --limit 10 --out results/verify_k5.json
"""

import argparse
import json
import time
from dataclasses import asdict, dataclass

import mpmath

from plumbed.asymptotic import verify_main
from plumbed.chardata import product_char
from plumbed.fleet import default_fleet
from plumbed.lattice import linking_data


@dataclass
class Config:
    k: int = 5
    limit: int = 10
    fleet_size: int = 60
    fleet_seed: int = 1
    tolerance: float = 1e-8
    dps: int = 64
    out: str = ""


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, val in asdict(Config()).items():
        p.add_argument(f"--{name.replace('_', '-')}", type=type(val), default=val)
    cfg = Config(**vars(p.parse_args()))
    fleet = [e for e in default_fleet(cfg.fleet_size, cfg.fleet_seed) if e.satisfies_condition]
    rows = []
    with mpmath.workdps(cfg.dps):
        for e in fleet[: cfg.limit]:
            ld = linking_data(e.graph)
            t = time.perf_counter()
            rep = verify_main(ld, product_char(ld), cfg.k, tolerance=cfg.tolerance)
            dt = time.perf_counter() - t
            worst = max(rep.deltas.values())
            print(f"{e.name:16s} |V>=3|={len(ld.vge3)}  max delta {worst:.2e}  "
                  f"{'PASS' if rep.passed else 'FAIL'}  {dt:6.1f}s", flush=True)
            rows.append({"name": e.name, "seconds": dt, **rep.to_json()})
    if cfg.out:
        import os

        os.makedirs(os.path.dirname(cfg.out) or ".", exist_ok=True)
        with open(cfg.out, "w") as fh:
            json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
