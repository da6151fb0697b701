import argparse
import logging
from typing import Optional, TextIO

import pyslocc.config as cfg
from pyslocc import handlers
from pyslocc.utils.log import get_logger, set_level

mylogger = get_logger(__name__)

COMMANDS = {
    "canonicalize": handlers.CanonicalizeHandler,
    "equiv": handlers.EquivHandler,
    "symmetry-map": handlers.SymmetryMapHandler,
    "selftest": handlers.SelftestHandler,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pyslocc", description="Exact SLOCC canonical forms of LxNxN states")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    # options every command understands
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", default=cfg.DEFAULT_SEED, type=int, help="Seed of every random search")
    common.add_argument("--json", action="store_true", help="Print the report as one JSON object")

    forms = argparse.ArgumentParser(add_help=False)
    forms.add_argument("--hints", default=None, help="Comma separated eigenvalue candidates, e.g. '1,-1/2,2+3i'")
    forms.add_argument("--shift", action="store_true", help="Shift each reduced slot by its smallest eigenvalue")

    p = sub.add_parser("canonicalize", parents=[common, forms], help="Canonical form of a state file")
    p.add_argument("input", help="State file (JSON)")
    p.add_argument("--out", default=None, help="Write the canonical form to this file")

    p = sub.add_parser(
        "equiv", parents=[common, forms], help="Decide whether two states lie in one orbit",
        description="Inequivalent is relative to the group generated by the superposition maps, "
                    "rescaling and block permutations, which need not be every upper-triangular T.")
    p.add_argument("a", help="State or canonical file")
    p.add_argument("b", help="State or canonical file")

    p = sub.add_parser("symmetry-map", parents=[common], help="Apply a parametric symmetry to a canonical file")
    p.add_argument("input", help="Canonical file (JSON)")
    for name, default in (("z1", "0"), ("z2", "0"), ("z3", "0"), ("d2", "1"), ("d3", "1")):
        p.add_argument(f"--{name}", default=default, help=f"Exact literal (default {default})")
    p.add_argument("--order", default=None, help="Comma separated stages among rescale,JA,EA,EJ")
    p.add_argument("--out", default=None, help="Write the transformed form to this file")

    p = sub.add_parser("selftest", parents=[common], help="Run the randomized self-test suites")
    p.add_argument("--profile", default=None, help="Comma separated suite names (default: all)")
    p.add_argument("--trials", default=None, type=int, help="Trials per suite")
    p.add_argument("--jobs", default=1, type=int, help="Worker processes")
    p.add_argument("--csv", default=None, help="Write per-trial records as CSV")
    p.add_argument("--records", default=None, help="Write per-trial records as JSON lines")
    return parser


async def starter(args: argparse.Namespace, stdout: Optional[TextIO] = None) -> int:
    """
    サブコマンドを実行し終了コードを返す
    """
    if args.verbose:
        set_level(logging.DEBUG)
    mylogger.debug(f"dispatching {args.command}")
    handler = COMMANDS[args.command](args, stdout)
    return await handler.execute()
