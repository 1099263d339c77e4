"""
Command-line front end for the rank-one cocycle toolkit.

    python main.py growth --group so --n 2 --experiment visual --t 1..8
    python main.py verify-group --group sp --n 2
    python main.py list

Exit codes: 0 all criteria pass, 2 a criterion failed, 1 usage or
configuration error.
"""

import argparse
import json
import logging
import os
import sys

from dotenv import load_dotenv
from pydantic import ValidationError

load_dotenv()

from app.core.errors import ToolkitError
from app.core.models import COMMANDS, RunConfig
from app.core.ranges import parse_int_range, parse_range
from app.experiments.registry import list_experiments
from app.pipeline.orchestrator import run

logger = logging.getLogger("main")


# ── Argument parsing ─────────────────────────────────────────────────


class _Parser(argparse.ArgumentParser):
    """Exits with status 1 on malformed arguments; 2 is reserved for failed criteria."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    # Every flag defaults to None so that only flags given on the command line
    # override the --json document.
    parser.add_argument("--json", dest="json_path", help="JSON config document; flags override its fields")
    parser.add_argument("--group", choices=["so", "su", "sp"])
    parser.add_argument("--n", type=int)
    parser.add_argument("--experiment", choices=["visual", "busemann"], help="growth curve (growth only)")
    parser.add_argument("--backend", choices=["spectral", "chart"], help="norm backend")
    parser.add_argument("--t", dest="t_list", help="t values: a..b, a..b:step or a,b,c")
    parser.add_argument("--k", dest="k_list", help="witness truncation levels")
    parser.add_argument("--s", dest="s_list", help="integrability exponents in [0, r]")
    parser.add_argument("--eps", dest="eps_list", help="decreasing cutoffs in (0, 1)")
    parser.add_argument("--xi", dest="xi_list", help="Cowling kernel exponents")
    parser.add_argument("--m", dest="m_list", help="Cowling grid sizes (odd)")
    parser.add_argument("--grid-L", dest="grid_L", type=float)
    parser.add_argument("--grid-m", dest="grid_m", type=int)
    parser.add_argument("--band", type=int, help="spherical band limit")
    parser.add_argument("--samples", type=int)
    parser.add_argument("--lam", type=float, help="lambda for lp-isometry")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out")
    parser.add_argument("--cache")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cocycles", description="Rank-one cocycle verification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        _add_run_flags(sub.add_parser(command))
    listing = sub.add_parser("list", help="list experiments and the statements they check")
    listing.add_argument("--verbose", action="store_true")
    return parser


_FLOAT_LISTS = ("t_list", "k_list", "s_list", "eps_list", "xi_list")
_SCALARS = ("group", "n", "experiment", "backend", "grid_L", "grid_m", "band", "samples", "lam", "seed", "out", "cache")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    Merge the --json document with the flags given on the command line.

    Raises:
        UsageError: For malformed parameter lists.
        ValidationError: For fields pydantic rejects.
        json.JSONDecodeError: For a malformed config document.
    """
    data: dict = {}
    if args.json_path:
        with open(args.json_path, encoding="utf-8") as fh:
            data = json.load(fh)
    for name in _FLOAT_LISTS:
        value = getattr(args, name)
        if value is not None:
            data[name] = parse_range(value)
    if args.m_list is not None:
        data["m_list"] = parse_int_range(args.m_list)
    for name in _SCALARS:
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    data["command"] = args.command
    return RunConfig(**data)


def _print_listing() -> None:
    rows = list_experiments()
    width = max(len(r["name"]) for r in rows)
    for r in rows:
        print(f"{r['name']:<{width}}  {r['summary']}")
        print(f"{'':<{width}}  checks: {r['statement']}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = "DEBUG" if args.verbose else os.environ.get("LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    if args.command == "list":
        _print_listing()
        return 0

    try:
        config = config_from_args(args)
    except json.JSONDecodeError as exc:
        print(f"config error: {args.json_path} line {exc.lineno} column {exc.colno}: {exc.msg}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        for err in exc.errors():
            field = ".".join(str(p) for p in err["loc"]) or "config"
            print(f"config error: {field}: {err['msg']}", file=sys.stderr)
        return 1
    except (ToolkitError, OSError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        return run(config)
    except Exception:
        logger.exception("Unexpected failure in %s", config.command)
        return 1


if __name__ == "__main__":
    sys.exit(main())
