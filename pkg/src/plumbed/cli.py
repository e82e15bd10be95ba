"""Command line front end.

Exit codes: 0 success, 1 mathematical failure (including refused graphs),
2 usage or I/O error, 3 budget exceeded.
"""

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from . import __version__
from .errors import (
    ConditionViolated,
    DuplicateEdge,
    DuplicateVertex,
    GraphSyntaxError,
    Infeasible,
    LevelTooSmall,
    NoConvergence,
    PlumbingError,
    UnknownVertexInEdge,
)

EXIT_OK, EXIT_MATH, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


@dataclass
class RunConfig:
    precision_digits: int = 64
    term_budget: int = 10**8
    truncation_bound: str = "8"
    radial_t0: Optional[float] = None
    radial_levels: int = 10
    radial_ratio: float = 0.8
    normalization_mode: Optional[str] = None
    output_format: str = "json"
    parallelism: int = 1
    seed: int = 1

    def check(self):
        if self.precision_digits < 32:
            raise UsageError("precision must be at least 32 digits")
        if self.term_budget <= 0:
            raise UsageError("budget must be positive")
        if self.parallelism < 1:
            raise UsageError("parallelism must be >= 1")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="plumbed", description="Quantum invariants of plumbed homology spheres.")
    p.add_argument("--precision", type=int, default=64, help="working precision in decimal digits")
    p.add_argument("--budget", type=float, default=1e8, help="term budget for enumerations")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="admissibility report")
    s.add_argument("path")

    s = sub.add_parser("wrt", help="WRT invariant at level k")
    s.add_argument("path")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--method", choices=("gppv", "reduced", "both"), default="reduced")

    s = sub.add_parser("zhat", help="homological block as a q-series")
    s.add_argument("path")
    s.add_argument("--bound", default="8", help="exponent bound for the core series")
    s.add_argument("--check-pv", action="store_true", help="also build the principal-value form and compare")

    s = sub.add_parser("verify", help="three-way check of WRT against the radial limit")
    s.add_argument("path")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--tolerance", type=float, default=1e-8)
    s.add_argument("--ledger", action="store_true", help="calibrate and record the c_n normalization")

    s = sub.add_parser("fleet", help="generate admissible test graphs")
    s.add_argument("--generate", type=int, default=10, metavar="N")
    s.add_argument("--fleet-seed", type=int, default=None, help="overrides the global --seed")
    return p


# -- commands ---------------------------------------------------------------------


def _load(path):
    from .graph import read_graph, require_admissible
    from .lattice import linking_data

    g = read_graph(path)
    require_admissible(g)
    return linking_data(g)


def cmd_validate(args, cfg):
    from .graph import read_graph, validate

    rep = validate(read_graph(args.path))
    return (EXIT_OK if rep.admissible else EXIT_MATH), rep.to_dict()


def cmd_wrt(args, cfg):
    from .gausswrt import wrt_gppv, wrt_reduced
    from .hp import complex_to_json

    if args.k < 2:
        raise UsageError("--k must be >= 2")
    ld = _load(args.path)
    out = {"k": args.k}
    vals = {}
    if args.method in ("gppv", "both"):
        r = wrt_gppv(ld, args.k, budget=cfg.term_budget)
        vals["gppv"] = r.value
        out["gppv"] = r.to_json()
    if args.method in ("reduced", "both"):
        r = wrt_reduced(ld, args.k, budget=cfg.term_budget, parallel=cfg.parallelism)
        vals["reduced"] = r.value
        out["reduced"] = r.to_json()
    if args.method == "both":
        out["delta"] = float(abs(vals["gppv"] - vals["reduced"]))
    out["value"] = complex_to_json(next(iter(vals.values())))
    return EXIT_OK, out


def cmd_zhat(args, cfg):
    from .chardata import product_char
    from .hblock import zhat_by_pv, zhat_false_theta

    ld = _load(args.path)
    pc = product_char(ld)
    bound = Fraction(args.bound)
    hb = zhat_false_theta(ld, pc, bound, budget=int(cfg.term_budget))
    out = hb.to_json()
    code = EXIT_OK
    if not hb.core.terms:
        out["warning"] = "exponent bound below the smallest exponent; the core is empty"
    if args.check_pv:
        pv = zhat_by_pv(ld, bound, budget=int(cfg.term_budget))
        same = pv.core == hb.core
        out["check_pv"] = {"agree": same}
        code = EXIT_OK if same else EXIT_MATH
    return code, out


def cmd_verify(args, cfg):
    from .asymptotic import verify_main
    from .chardata import product_char

    if args.k < 2:
        raise UsageError("--k must be >= 2")
    ld = _load(args.path)
    pc = product_char(ld)
    radial = {"levels": cfg.radial_levels, "ratio": cfg.radial_ratio}
    if cfg.radial_t0 is not None:
        radial["t0"] = cfg.radial_t0
    try:
        rep = verify_main(ld, pc, args.k, tolerance=args.tolerance, budget=cfg.term_budget,
                          radial_kwargs=radial, ledger=args.ledger)
    except NoConvergence as exc:
        return EXIT_MATH, {"k": args.k, "passed": False, "error": f"radial limit: {exc}"}
    out = rep.to_json()
    out["verdict"] = "PASS" if rep.passed else "FAIL"
    return (EXIT_OK if rep.passed else EXIT_MATH), out


def cmd_fleet(args, cfg):
    from .fleet import FleetConfig, generate_fleet

    seed = cfg.seed if args.fleet_seed is None else args.fleet_seed
    fleet = generate_fleet(FleetConfig(count=args.generate, seed=seed))
    out = {"seed": seed, "count": len(fleet), "graphs": [e.to_json() for e in fleet]}
    multi = sum(1 for e in fleet if sum(1 for v in e.graph.vertices if e.graph.degree(v) >= 3) >= 2)
    if len(fleet) >= 20 and multi * 20 < len(fleet):
        out["warning"] = "fewer than one multi-node graph per 20"
    return EXIT_OK, out


COMMANDS = {"validate": cmd_validate, "wrt": cmd_wrt, "zhat": cmd_zhat, "verify": cmd_verify, "fleet": cmd_fleet}


# -- output ---------------------------------------------------------------------------


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and all(isinstance(x, (dict, list)) for x in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, json.dumps(obj) if isinstance(obj, list) else obj


def render(report, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=False) + "\n"
    rows = list(_flatten(report))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(rows)
        return buf.getvalue()
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = RunConfig(
            precision_digits=args.precision,
            term_budget=int(args.budget),
            truncation_bound=getattr(args, "bound", "8"),
            output_format=args.format,
            parallelism=args.parallel,
            seed=args.seed,
        )
        cfg.check()
    except UsageError as exc:
        print(f"plumbed: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {"command": args.command, "version": __version__, "config": asdict(cfg)}
    try:
        with mpmath.workdps(cfg.precision_digits):
            code, result = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"plumbed: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LevelTooSmall as exc:
        print(f"plumbed: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, GraphSyntaxError, DuplicateVertex, DuplicateEdge, UnknownVertexInEdge) as exc:
        print(f"plumbed: cannot read input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Infeasible as exc:
        print(f"plumbed: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConditionViolated as exc:
        code, result = EXIT_MATH, {"refused": str(exc), "vertex": exc.vertex}
        print(f"plumbed: refused: {exc}", file=sys.stderr)
    except PlumbingError as exc:
        code, result = EXIT_MATH, {"error": f"{type(exc).__name__}: {exc}"}
        print(f"plumbed: {type(exc).__name__}: {exc}", file=sys.stderr)
    report["result"] = result
    report["exit_code"] = code
    text = render(report, cfg.output_format)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"plumbed: cannot write output: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
