"""Command line front end.

    cubequot fourier     --k 10
    cubequot quotient    --k 8 --group dihedral --eta 0.02
    cubequot verify      --k 8 --group cyclic --seed 7
    cubequot distortion  --metric m.txt --epsilon 0 0.25
    cubequot certificate --k 6 --group cyclic --epsilon 0 0.1 0.25 0.4
    cubequot sketch      --k 6 --r 1 --D 16 --s 64 --trials 1000

Every run writes one report (JSON by default, ``--format tabular`` for tab
separated lines) to stdout or ``--out``.  The exit status is 0 when no
graded record failed, 1 when one did, 2 for bad arguments and 3 when a
requested size exceeds a cap.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import suites
from .analysis import DEFAULT_BETA
from .cube import MAX_K
from .embed import C1_CAP, CUT_CAP, SUBSET_CAP, FiniteMetric, hamming_metric, quotient_metric, read_metric
from .quotient import DEFAULT_ORDER_CAP, build_quotient, make_group
from .report import Report

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3
DEFAULT_SEED = 0
DEFAULT_ETA = 0.02
SKETCH_MAX_K = 10
EXACT_VERIFY_POINTS = 8

COMMANDS = ("fourier", "quotient", "verify", "distortion", "certificate", "sketch")


class CapError(Exception):
    """A requested size exceeds one of the configured caps."""


def _cap(name: str, value: int, limit: int) -> None:
    if value > limit:
        raise CapError(f"{value} exceeds the {name} cap ({limit}); raise it with --{name}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, default=8, help="cube dimension (default 8)")
    common.add_argument("--group", default="cyclic", choices=["cyclic", "dihedral", "symmetric", "trivial", "file"])
    common.add_argument("--generators-file", type=Path, help="generators, one permutation per line")
    common.add_argument("--epsilon", type=float, nargs="+", default=[0.0, 0.1, 0.25, 0.4])
    common.add_argument("--beta", type=float, default=DEFAULT_BETA)
    common.add_argument("--eta", type=float, default=DEFAULT_ETA)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--samples", type=int, default=10**6, help="Monte Carlo samples for large k")
    common.add_argument("--format", choices=["structured", "tabular"], default="structured")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")
    common.add_argument("--max-k", type=int, default=MAX_K)
    common.add_argument("--max-group-order", type=int, default=DEFAULT_ORDER_CAP)
    common.add_argument("--max-lp-points", type=int, default=C1_CAP)
    common.add_argument("--max-cut-points", type=int, default=CUT_CAP)
    common.add_argument("--max-orbit-subset", type=int, default=SUBSET_CAP)

    p = argparse.ArgumentParser(prog="cubequot", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True
    sub.add_parser("fourier", parents=[common], help="cube and analysis identities")
    sub.add_parser("quotient", parents=[common], help="build a quotient and check its metric")
    sub.add_parser("verify", parents=[common], help="full invariant suite at given k and group")
    d = sub.add_parser("distortion", parents=[common], help="exact c_1 of a snowflaked metric")
    d.add_argument("--metric", type=Path, help="metric matrix file (default: the quotient metric)")
    d.add_argument("--exact", choices=["auto", "yes", "no"], default="auto",
                   help=f"rational re-verification (auto: up to {EXACT_VERIFY_POINTS} points)")
    sub.add_parser("certificate", parents=[common], help="Poincare lower bounds and their soundness")
    s = sub.add_parser("sketch", parents=[common], help="sketch simulation on a negative-type metric")
    s.add_argument("--metric", type=Path, help="metric matrix file (default: Hamming cube of dimension k)")
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--D", type=float, default=16.0)
    s.add_argument("--s", type=int, default=64)
    return p


def config_from_args(ns: argparse.Namespace) -> dict:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(ns).items()}
    if ns.generators_file is not None:
        cfg["group"] = "file"
    return cfg


def _quotient(cfg: dict):
    _cap("max-k", cfg["k"], cfg["max_k"])
    G = make_group(cfg["group"], cfg["k"], cfg["generators_file"], order_cap=cfg["max_group_order"])
    return build_quotient(G)


def _metric(cfg: dict) -> FiniteMetric:
    if cfg.get("metric"):
        return read_metric(cfg["metric"])
    return quotient_metric(_quotient(cfg))


def run(cfg: dict) -> Report:
    """Execute one configured command and return its report."""
    rep = Report(cfg)
    cmd, k, seed = cfg["command"], cfg["k"], cfg["seed"]
    t0 = time.perf_counter()
    if cmd in ("fourier", "verify"):
        _cap("max-k", k, cfg["max_k"])
        with rep.timed("fourier"):
            rep.add(suites.fourier_suite(k, seed))
            rep.add(suites.heat_suite(k, seed))
            rep.add(suites.influence_suite(k, seed))
    if cmd in ("quotient", "verify"):
        Q = _quotient(cfg)
        with rep.timed("quotient"):
            rep.add(suites.quotient_suite(Q, cfg["eta"], seed, cfg["samples"]))
        if cmd == "verify":
            with rep.timed("invariants"):
                rep.add(suites.invariant_suite(Q, seed, beta=cfg["beta"]))
            with rep.timed("kkl_chain"):
                rep.add(suites.kkl_chain_suite(Q, seed, cfg["beta"], cfg["epsilon"][0]))
            rep.add(suites.conversion_suite())
    if cmd == "distortion":
        M = _metric(cfg)
        _cap("max-lp-points", M.n, cfg["max_lp_points"])
        exact = {"yes": True, "no": False}.get(cfg["exact"], M.n <= EXACT_VERIFY_POINTS)
        with rep.timed("distortion"):
            rep.add(suites.distortion_suite(M, cfg["epsilon"], exact=exact, cap=cfg["max_lp_points"]))
    if cmd == "certificate":
        Q = _quotient(cfg)
        _cap("max-cut-points", Q.q, cfg["max_cut_points"])
        with rep.timed("certificate"):
            rep.add(suites.certificate_suite(Q, cfg["epsilon"], cfg["max_lp_points"], cfg["max_cut_points"]))
            if Q.q <= cfg["max_orbit_subset"]:
                rep.add(suites.subset_suite(Q, cfg["beta"], cfg["max_orbit_subset"]))
    if cmd == "sketch":
        if cfg.get("metric"):
            M = read_metric(cfg["metric"])
        else:
            _cap("max-k", k, min(cfg["max_k"], SKETCH_MAX_K))
            M = hamming_metric(k)
        with rep.timed("sketch"):
            rep.add(suites.sketch_suite(M, cfg["r"], cfg["D"], cfg["s"], cfg["trials"], seed))
    rep.timing["total_s"] = time.perf_counter() - t0
    return rep


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        print("cubequot: error: a command is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    cfg = config_from_args(ns)
    try:
        rep = run(cfg)
    except CapError as e:
        print(f"cubequot: cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except (OverflowError, MemoryError) as e:
        print(f"cubequot: cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, OSError) as e:
        print(f"cubequot: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    text = rep.to_json() if cfg["format"] == "structured" else rep.to_table()
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_FAIL if rep.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
