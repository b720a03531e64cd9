import argparse
import asyncio
import logging
import sys

from .main import COMMANDS
from .main import main as run_main
from .templates import get_available_templates


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1, the code for invalid input."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


COMMAND_HELP = {
    "surface": "Export the arc-length profile of M_s as CSV",
    "verify": "Check every curvature identity; exit 2 if a residual is above threshold",
    "mc": "Compute MC and the extended MC for the configured flow and perturbation (JSON)",
    "search": "Search the perturbation family for positive extended MC (JSON)",
    "scan": "Evaluate MC over a grid of (s, a, template, m) values (CSV)",
}


def build_parser() -> argparse.ArgumentParser:
    templates = ", ".join(get_available_templates())
    description = (
        "zclab - Misiolek curvature of zonal flows on the surfaces M_s,\n"
        "with and without the Coriolis central extension.\n"
        f"Zonal-flow templates: {templates}.\n"
        "Environment overrides use ZCL_SECTION__KEY (e.g. ZCL_SURFACE__S=2)."
    )
    parser = _Parser(description=description, formatter_class=argparse.RawTextHelpFormatter)
    parser.add_argument(
        "--list-templates",
        action="store_true",
        help="List zonal-flow templates.",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", default=None, help="TOML config file with dotted keys")
    common.add_argument("--out", "-o", default=None, help="Output file (default: stdout)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed")
    common.add_argument(
        "--resolution",
        default=None,
        help="Grid resolution RxT, e.g. 129x128 (radial nodes x theta nodes)",
    )
    common.add_argument("--verbose", "-v", action="store_true", help="Show all logging output.")

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        sub = subparsers.add_parser(name, parents=[common], help=COMMAND_HELP[name])
        if name == "search":
            sub.add_argument("--budget", type=int, default=None, help="Objective evaluations")
    return parser


def cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list_templates:
        print("Zonal-flow templates:\n- " + "\n- ".join(get_available_templates()))
        return 0
    if not args.command:
        parser.print_help()
        return 1

    # warnings stay visible; progress messages need --verbose
    logging.getLogger().setLevel(logging.INFO if args.verbose else logging.WARNING)

    return asyncio.run(run_main(args))


if __name__ == "__main__":
    sys.exit(cli())
